#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voltsev/dataset.hpp"
#include "voltsev/kinematics.hpp"

namespace voltsev {

inline constexpr std::size_t kMinSideSamples = 5;

/// The 16 CV volatility indices plus mean speeds for one event; any field can
/// be missing (degenerate trace, absent bin, too few samples on a side).
struct VolatilityFeatures {
  std::string event_id;
  // aggregate over the full cleaned trace
  std::optional<double> cv_long_acc, cv_long_dec, cv_lat_acc, cv_lat_dec;
  // per 10 s bin, slot 0 = K1 (earliest), slot 2 = K3 (latest)
  std::array<std::optional<double>, kBinCount> cv_long_acc_k, cv_long_dec_k, cv_lat_acc_k,
      cv_lat_dec_k;
  std::optional<double> mean_speed;
  std::array<std::optional<double>, kBinCount> mean_speed_k;
  // provenance
  std::size_t raw_sample_count = 0;
  std::size_t removed_zero_speed = 0;
  bool degenerate = false;
};

struct ColumnStats {
  std::string name;
  std::size_t n = 0;  ///< non-missing count
  std::optional<double> mean, sd, min, max;
};

struct DescriptiveStats {
  std::size_t n_rows = 0;
  std::vector<ColumnStats> columns;
};

/// Splits signed accelerations into acceleration magnitudes {v : v > 0} and
/// deceleration magnitudes {|v| : v < 0}; zeros belong to neither.
void split_signed(const std::vector<double>& values, std::vector<double>& acc_out,
                  std::vector<double>& dec_out);

/// Sample SD (n-1 denominator) over mean. Missing when fewer than
/// min_side_samples values or the mean is zero.
std::optional<double> coefficient_of_variation(const std::vector<double>& values,
                                               std::size_t min_side_samples = kMinSideSamples);

/// Computes aggregate and per-bin CVs and mean speeds from a cleaned trace and
/// its bins. A degenerate trace yields all-missing features with the event
/// retained.
VolatilityFeatures compute_features(const KinematicsTrace& cleaned,
                                    const std::array<std::optional<TimeBin>, kBinCount>& bins,
                                    std::size_t min_side_samples = kMinSideSamples);

/// clean -> segment -> compute in one step, from a raw parsed trace.
VolatilityFeatures extract_features(const KinematicsTrace& raw,
                                    double bin_length_s = kBinLengthSeconds,
                                    std::size_t min_bin_samples = kMinBinSamples,
                                    std::size_t min_side_samples = kMinSideSamples);

/// Column names of the feature CSV, in file order (event_id excluded).
const std::vector<std::string>& feature_column_names();

void write_features_csv(std::ostream& out, const std::vector<VolatilityFeatures>& features);
DataTable features_to_table(const std::vector<VolatilityFeatures>& features);

/// Per-column n/mean/sample-SD/min/max. Throws validation_error on an empty
/// table.
DescriptiveStats describe(const DataTable& table);
void write_descriptive_stats_csv(std::ostream& out, const DescriptiveStats& stats);

}  // namespace voltsev
