#include "voltsev/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"

namespace voltsev {

namespace {

constexpr std::string_view kTraceHeader = "event_id,t,speed_kmh,accel_long_ms2,accel_lat_ms2";

// Tolerance for assigning samples to wall-clock windows; far below the 0.1 s
// grid but above accumulated double rounding at ~30 s offsets.
constexpr double kWindowEps = 1e-9;

}  // namespace

double KinematicsTrace::duration_s() const {
  if (samples.size() < 2) return 0.0;
  return samples.back().t - samples.front().t;
}

ParseResult parse_traces(std::istream& in) {
  ParseResult result;
  std::string line;
  if (!std::getline(in, line)) return result;  // empty input -> empty list
  if (csv::trim(line) != kTraceHeader) {
    throw validation_error("trace CSV: expected header '" + std::string(kTraceHeader) + "'");
  }

  std::map<std::string, std::size_t> slot;  // event_id -> index into traces
  std::set<std::string> bad;                // events with at least one issue
  std::size_t line_no = 1;

  auto flag = [&](std::size_t ln, const std::string& id, std::string message) {
    result.issues.push_back({ln, id, std::move(message)});
    if (!id.empty()) bad.insert(id);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    std::vector<std::string> fields = csv::split_line(line);
    const std::string id = fields.empty() ? std::string() : std::string(csv::trim(fields[0]));
    if (fields.size() != 5) {
      flag(line_no, id, "expected 5 fields, got " + std::to_string(fields.size()));
      continue;
    }
    if (id.empty()) {
      flag(line_no, id, "empty event_id");
      continue;
    }
    TraceSample s;
    bool row_ok = true;
    auto numeric = [&](std::size_t col, const char* name, double& out) {
      std::optional<double> v = csv::parse_double(fields[col]);
      if (!v || !std::isfinite(*v)) {
        flag(line_no, id, std::string(name) + ": non-numeric or non-finite value '" +
                              std::string(csv::trim(fields[col])) + "'");
        row_ok = false;
        return;
      }
      out = *v;
    };
    numeric(1, "t", s.t);
    numeric(2, "speed_kmh", s.speed_kmh);
    numeric(3, "accel_long_ms2", s.accel_long);
    numeric(4, "accel_lat_ms2", s.accel_lat);
    if (!row_ok) continue;
    if (s.t < 0.0) {
      flag(line_no, id, "t must be non-negative");
      continue;
    }
    if (s.speed_kmh < 0.0) {
      flag(line_no, id, "speed_kmh must be non-negative");
      continue;
    }
    auto [it, inserted] = slot.try_emplace(id, result.traces.size());
    if (inserted) {
      KinematicsTrace trace;
      trace.event_id = id;
      result.traces.push_back(std::move(trace));
    }
    result.traces[it->second].samples.push_back(s);
  }

  for (KinematicsTrace& trace : result.traces) {
    std::stable_sort(trace.samples.begin(), trace.samples.end(),
                     [](const TraceSample& a, const TraceSample& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
      if (trace.samples[i].t == trace.samples[i - 1].t) {
        flag(0, trace.event_id,
             "duplicate timestamp t=" + csv::format_double(trace.samples[i].t));
        break;
      }
    }
    trace.raw_sample_count = trace.samples.size();
  }

  if (!bad.empty()) {
    std::vector<KinematicsTrace> kept;
    kept.reserve(result.traces.size());
    for (KinematicsTrace& trace : result.traces) {
      if (!bad.count(trace.event_id)) kept.push_back(std::move(trace));
    }
    result.traces = std::move(kept);
    // includes events whose every row was bad (sorted set order)
    result.rejected_events.assign(bad.begin(), bad.end());
  }
  return result;
}

ParseResult parse_traces_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open trace file: " + path);
  return parse_traces(in);
}

void write_traces_csv(std::ostream& out, const std::vector<KinematicsTrace>& traces) {
  out << kTraceHeader << '\n';
  for (const KinematicsTrace& trace : traces) {
    for (const TraceSample& s : trace.samples) {
      csv::write_row(out, {trace.event_id, csv::format_double(s.t),
                           csv::format_double(s.speed_kmh), csv::format_double(s.accel_long),
                           csv::format_double(s.accel_lat)});
    }
  }
}

KinematicsTrace clean_trace(const KinematicsTrace& trace) {
  KinematicsTrace out;
  out.event_id = trace.event_id;
  out.raw_sample_count =
      trace.raw_sample_count > 0 ? trace.raw_sample_count : trace.samples.size();
  out.removed_zero_speed = trace.removed_zero_speed;
  out.samples.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    if (s.speed_kmh == 0.0) {
      ++out.removed_zero_speed;
    } else {
      out.samples.push_back(s);
    }
  }
  out.degenerate = out.samples.empty();
  return out;
}

std::array<std::optional<TimeBin>, kBinCount> segment_trace(const KinematicsTrace& trace,
                                                            double bin_length_s,
                                                            std::size_t min_bin_samples) {
  if (!(bin_length_s > 0.0)) throw std::invalid_argument("segment_trace: bin_length_s must be > 0");
  std::array<std::optional<TimeBin>, kBinCount> bins;
  if (trace.samples.empty()) return bins;
  const double t_end = trace.samples.back().t;
  const double duration = t_end - trace.samples.front().t;
  for (int k = 1; k <= kBinCount; ++k) {
    const double begin = bin_length_s * (kBinCount - k);  // backward offset, inclusive
    const double end = begin + bin_length_s;              // exclusive
    if (begin - kWindowEps > duration) continue;          // window past the trace start
    TimeBin bin;
    bin.index = k;
    bin.window_begin_s = begin;
    bin.window_end_s = end;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
      const double back = t_end - trace.samples[i].t;
      if (back >= begin - kWindowEps && back < end - kWindowEps) bin.sample_indices.push_back(i);
    }
    if (bin.sample_indices.size() >= min_bin_samples && !bin.sample_indices.empty()) {
      bins[static_cast<std::size_t>(k - 1)] = std::move(bin);
    }
  }
  return bins;
}

}  // namespace voltsev
