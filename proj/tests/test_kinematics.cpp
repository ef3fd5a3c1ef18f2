#include <doctest.h>

#include <cmath>
#include <sstream>

#include "voltsev/errors.hpp"
#include "voltsev/kinematics.hpp"

using namespace voltsev;

namespace {

KinematicsTrace flat_trace(const std::string& id, int n_samples, double speed = 50.0,
                           double t0 = 0.0) {
  KinematicsTrace tr;
  tr.event_id = id;
  for (int i = 0; i < n_samples; ++i) {
    tr.samples.push_back({t0 + i * 0.1, speed, 0.3, -0.1});
  }
  return tr;
}

}  // namespace

TEST_CASE("trace csv round trip") {
  KinematicsTrace a = flat_trace("a", 5);
  KinematicsTrace b = flat_trace("b", 3, 62.5);
  b.samples[1].accel_long = -1.75;
  std::ostringstream out;
  write_traces_csv(out, {a, b});
  std::istringstream in(out.str());
  ParseResult parsed = parse_traces(in);
  CHECK(parsed.issues.empty());
  REQUIRE(parsed.traces.size() == 2);
  CHECK(parsed.traces[0].event_id == "a");
  CHECK(parsed.traces[1].event_id == "b");
  REQUIRE(parsed.traces[1].samples.size() == 3);
  CHECK(parsed.traces[1].samples[1].accel_long == -1.75);
  CHECK(parsed.traces[1].samples[2].t == b.samples[2].t);
}

TEST_CASE("parse requires the exact header") {
  std::istringstream in("event,t,speed\n");
  CHECK_THROWS_AS(parse_traces(in), validation_error);
}

TEST_CASE("malformed rows reject the whole event, others survive") {
  std::istringstream in(
      "event_id,t,speed_kmh,accel_long_ms2,accel_lat_ms2\n"
      "good,0.0,50,0.1,0.2\n"
      "bad,0.0,50,xx,0.2\n"
      "good,0.1,51,0.1,0.2\n"
      "bad,0.1,50,0.3,0.2\n");
  ParseResult parsed = parse_traces(in);
  REQUIRE(parsed.traces.size() == 1);
  CHECK(parsed.traces[0].event_id == "good");
  CHECK(parsed.traces[0].samples.size() == 2);
  REQUIRE(!parsed.issues.empty());
  CHECK(parsed.issues[0].line == 3);
  CHECK(parsed.rejected_events == std::vector<std::string>{"bad"});
}

TEST_CASE("negative speed and duplicate timestamps are flagged") {
  std::istringstream neg(
      "event_id,t,speed_kmh,accel_long_ms2,accel_lat_ms2\n"
      "e,0.0,-5,0.1,0.2\n");
  ParseResult p1 = parse_traces(neg);
  CHECK(p1.traces.empty());
  CHECK(p1.rejected_events.size() == 1);

  std::istringstream dup(
      "event_id,t,speed_kmh,accel_long_ms2,accel_lat_ms2\n"
      "e,0.0,50,0.1,0.2\n"
      "e,0.0,51,0.1,0.2\n");
  ParseResult p2 = parse_traces(dup);
  CHECK(p2.traces.empty());
  REQUIRE(!p2.issues.empty());
}

TEST_CASE("empty input parses to an empty list") {
  std::istringstream in("event_id,t,speed_kmh,accel_long_ms2,accel_lat_ms2\n");
  ParseResult parsed = parse_traces(in);
  CHECK(parsed.traces.empty());
  CHECK(parsed.issues.empty());
}

TEST_CASE("clean_trace removes zero-speed samples and keeps provenance") {
  KinematicsTrace tr = flat_trace("e", 10);
  tr.samples[2].speed_kmh = 0.0;
  tr.samples[7].speed_kmh = 0.0;
  KinematicsTrace cleaned = clean_trace(tr);
  CHECK(cleaned.samples.size() == 8);
  CHECK(cleaned.raw_sample_count == 10);
  CHECK(cleaned.removed_zero_speed == 2);
  CHECK_FALSE(cleaned.degenerate);
  for (const TraceSample& s : cleaned.samples) CHECK(s.speed_kmh > 0.0);

  // idempotent: cleaning again neither drops more nor rewrites provenance
  KinematicsTrace twice = clean_trace(cleaned);
  CHECK(twice.samples.size() == 8);
  CHECK(twice.raw_sample_count == 10);
  CHECK(twice.removed_zero_speed == 2);
}

TEST_CASE("all-zero-speed trace is degenerate") {
  KinematicsTrace tr = flat_trace("e", 6, 0.0);
  KinematicsTrace cleaned = clean_trace(tr);
  CHECK(cleaned.samples.empty());
  CHECK(cleaned.degenerate);
  CHECK(cleaned.removed_zero_speed == 6);
}

TEST_CASE("segment_trace splits a full 30 s trace into three bins") {
  KinematicsTrace tr = flat_trace("e", 300);
  auto bins = segment_trace(tr);
  for (int k = 0; k < kBinCount; ++k) {
    REQUIRE(bins[k].has_value());
    CHECK(bins[k]->index == k + 1);
    CHECK(bins[k]->sample_indices.size() == 100);
  }
  // K3 is the final 10 s: indices 200..299
  CHECK(bins[2]->sample_indices.front() == 200);
  CHECK(bins[2]->sample_indices.back() == 299);
  // K1 is the earliest: indices 0..99
  CHECK(bins[0]->sample_indices.front() == 0);
  CHECK(bins[0]->sample_indices.back() == 99);
}

TEST_CASE("short traces populate late bins first") {
  // 12 s: K3 gets 100 samples, K2 the remaining 20, K1 absent
  KinematicsTrace tr = flat_trace("e", 120);
  auto bins = segment_trace(tr);
  CHECK_FALSE(bins[0].has_value());
  REQUIRE(bins[1].has_value());
  CHECK(bins[1]->sample_indices.size() == 20);
  REQUIRE(bins[2].has_value());
  CHECK(bins[2]->sample_indices.size() == 100);

  // 4 s: only K3, provided it meets the minimum count
  KinematicsTrace four = flat_trace("e", 40);
  auto bins4 = segment_trace(four);
  CHECK_FALSE(bins4[0].has_value());
  CHECK_FALSE(bins4[1].has_value());
  REQUIRE(bins4[2].has_value());
  CHECK(bins4[2]->sample_indices.size() == 40);
}

TEST_CASE("bins below the minimum sample count are dropped") {
  KinematicsTrace tr = flat_trace("e", 19);  // 1.9 s, below 20 samples
  auto bins = segment_trace(tr);
  CHECK_FALSE(bins[2].has_value());
  auto relaxed = segment_trace(tr, kBinLengthSeconds, 10);
  REQUIRE(relaxed[2].has_value());
  CHECK(relaxed[2]->sample_indices.size() == 19);
}

TEST_CASE("bin membership matches an exhaustive reimplementation") {
  // irregular trace: gaps, offset start, 23.7 s span
  KinematicsTrace tr;
  tr.event_id = "e";
  for (int i = 0; i < 237; ++i) {
    if (i % 11 == 3) continue;  // punch holes
    tr.samples.push_back({4.2 + i * 0.1, 40.0, 0.2, 0.1});
  }
  auto bins = segment_trace(tr);
  const double t_end = tr.samples.back().t;
  for (int k = 1; k <= kBinCount; ++k) {
    const double begin = (kBinCount - k) * kBinLengthSeconds;
    const double end = begin + kBinLengthSeconds;
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const double back = t_end - tr.samples[i].t;
      if (back >= begin - 1e-9 && back < end - 1e-9) expect.push_back(i);
    }
    if (expect.size() >= kMinBinSamples) {
      REQUIRE(bins[k - 1].has_value());
      CHECK(bins[k - 1]->sample_indices == expect);
    } else {
      CHECK_FALSE(bins[k - 1].has_value());
    }
  }
}

TEST_CASE("duration is last minus first timestamp") {
  CHECK(flat_trace("e", 300).duration_s() == doctest::Approx(29.9));
  CHECK(flat_trace("e", 1).duration_s() == 0.0);
  CHECK(KinematicsTrace{}.duration_s() == 0.0);
}
