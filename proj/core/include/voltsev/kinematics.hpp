#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace voltsev {

inline constexpr double kBinLengthSeconds = 10.0;
inline constexpr std::size_t kMinBinSamples = 20;
inline constexpr int kBinCount = 3;

/// One 10 Hz sample of a pre-event driving trace.
struct TraceSample {
  double t = 0.0;          ///< seconds from trace start, nominal 0.1 s grid
  double speed_kmh = 0.0;  ///< km/h, >= 0
  double accel_long = 0.0; ///< m/s^2, signed (+ accelerating, - braking)
  double accel_lat = 0.0;  ///< m/s^2, signed
};

struct KinematicsTrace {
  std::string event_id;
  std::vector<TraceSample> samples;  ///< sorted ascending by t

  // provenance carried through cleaning
  std::size_t raw_sample_count = 0;
  std::size_t removed_zero_speed = 0;
  bool degenerate = false;  ///< cleaning removed every sample

  bool empty() const { return samples.empty(); }
  /// last t minus first t; 0 for traces with fewer than 2 samples.
  double duration_s() const;
};

/// One backward-looking window over a trace. K=3 is the final
/// bin_length_s seconds before the event, K=1 the earliest.
struct TimeBin {
  int index = 0;                ///< K in 1..3
  double window_begin_s = 0.0;  ///< backward offset from trace end, inclusive
  double window_end_s = 0.0;    ///< backward offset, exclusive
  std::vector<std::size_t> sample_indices;  ///< into the trace passed to segment_trace
};

struct ParseIssue {
  std::size_t line = 0;  ///< 1-based line in the source stream
  std::string event_id;  ///< empty when the id itself was unreadable
  std::string message;
};

struct ParseResult {
  std::vector<KinematicsTrace> traces;  ///< first-appearance order, valid events only
  std::vector<ParseIssue> issues;
  std::vector<std::string> rejected_events;
};

/// Reads trace CSV (`event_id,t,speed_kmh,accel_long_ms2,accel_lat_ms2`,
/// header required). Malformed rows are reported with line numbers and the
/// affected event is excluded; empty input yields an empty list. Throws
/// validation_error only when the header itself is missing or wrong.
ParseResult parse_traces(std::istream& in);
ParseResult parse_traces_file(const std::string& path);

void write_traces_csv(std::ostream& out, const std::vector<KinematicsTrace>& traces);

/// Removes all zero-speed samples, recording the original count and how many
/// were dropped. Idempotent; a fully-removed trace comes back flagged
/// degenerate.
KinematicsTrace clean_trace(const KinematicsTrace& trace);

/// Splits a cleaned trace into up to 3 bins anchored at the trace END,
/// windows on the wall-clock axis: K=3 covers [0, L) seconds before the end,
/// K=2 [L, 2L), K=1 [2L, 3L). A bin is emitted only if its window overlaps
/// the trace and holds at least min_bin_samples samples; otherwise that slot
/// is missing. Array slot 0 is K=1.
std::array<std::optional<TimeBin>, kBinCount> segment_trace(
    const KinematicsTrace& trace, double bin_length_s = kBinLengthSeconds,
    std::size_t min_bin_samples = kMinBinSamples);

}  // namespace voltsev
