#include "voltsev/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"

namespace voltsev {

void split_signed(const std::vector<double>& values, std::vector<double>& acc_out,
                  std::vector<double>& dec_out) {
  acc_out.clear();
  dec_out.clear();
  for (double v : values) {
    if (v > 0.0) {
      acc_out.push_back(v);
    } else if (v < 0.0) {
      dec_out.push_back(-v);
    }
  }
}

std::optional<double> coefficient_of_variation(const std::vector<double>& values,
                                               std::size_t min_side_samples) {
  const std::size_t n = values.size();
  if (n < min_side_samples || n == 0) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (mean == 0.0) return std::nullopt;
  if (n < 2) return std::nullopt;  // sample SD needs n-1 > 0
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return sd / mean;
}

namespace {

struct ChannelCvs {
  std::optional<double> acc, dec;
};

ChannelCvs channel_cvs(const std::vector<double>& signal, std::size_t min_side_samples) {
  std::vector<double> acc, dec;
  split_signed(signal, acc, dec);
  return {coefficient_of_variation(acc, min_side_samples),
          coefficient_of_variation(dec, min_side_samples)};
}

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

VolatilityFeatures compute_features(const KinematicsTrace& cleaned,
                                    const std::array<std::optional<TimeBin>, kBinCount>& bins,
                                    std::size_t min_side_samples) {
  VolatilityFeatures f;
  f.event_id = cleaned.event_id;
  f.raw_sample_count = cleaned.raw_sample_count;
  f.removed_zero_speed = cleaned.removed_zero_speed;
  f.degenerate = cleaned.degenerate || cleaned.samples.empty();
  if (f.degenerate) return f;

  std::vector<double> longi, lat, speed;
  longi.reserve(cleaned.samples.size());
  lat.reserve(cleaned.samples.size());
  speed.reserve(cleaned.samples.size());
  for (const TraceSample& s : cleaned.samples) {
    longi.push_back(s.accel_long);
    lat.push_back(s.accel_lat);
    speed.push_back(s.speed_kmh);
  }
  ChannelCvs lg = channel_cvs(longi, min_side_samples);
  ChannelCvs lt = channel_cvs(lat, min_side_samples);
  f.cv_long_acc = lg.acc;
  f.cv_long_dec = lg.dec;
  f.cv_lat_acc = lt.acc;
  f.cv_lat_dec = lt.dec;
  f.mean_speed = mean_of(speed);

  for (std::size_t slot = 0; slot < bins.size(); ++slot) {
    if (!bins[slot]) continue;
    std::vector<double> blong, blat, bspeed;
    blong.reserve(bins[slot]->sample_indices.size());
    blat.reserve(bins[slot]->sample_indices.size());
    bspeed.reserve(bins[slot]->sample_indices.size());
    for (std::size_t i : bins[slot]->sample_indices) {
      blong.push_back(cleaned.samples[i].accel_long);
      blat.push_back(cleaned.samples[i].accel_lat);
      bspeed.push_back(cleaned.samples[i].speed_kmh);
    }
    ChannelCvs bl = channel_cvs(blong, min_side_samples);
    ChannelCvs bt = channel_cvs(blat, min_side_samples);
    f.cv_long_acc_k[slot] = bl.acc;
    f.cv_long_dec_k[slot] = bl.dec;
    f.cv_lat_acc_k[slot] = bt.acc;
    f.cv_lat_dec_k[slot] = bt.dec;
    f.mean_speed_k[slot] = mean_of(bspeed);
  }
  return f;
}

VolatilityFeatures extract_features(const KinematicsTrace& raw, double bin_length_s,
                                    std::size_t min_bin_samples, std::size_t min_side_samples) {
  KinematicsTrace cleaned = clean_trace(raw);
  auto bins = segment_trace(cleaned, bin_length_s, min_bin_samples);
  return compute_features(cleaned, bins, min_side_samples);
}

const std::vector<std::string>& feature_column_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    const char* bases[] = {"cv_long_acc", "cv_long_dec", "cv_lat_acc", "cv_lat_dec"};
    for (const char* b : bases) v.emplace_back(b);
    for (const char* b : bases) {
      for (int k = 1; k <= kBinCount; ++k) v.push_back(std::string(b) + "_k" + std::to_string(k));
    }
    v.emplace_back("mean_speed");
    for (int k = 1; k <= kBinCount; ++k) v.push_back("mean_speed_k" + std::to_string(k));
    return v;
  }();
  return names;
}

namespace {

std::vector<std::optional<double>> feature_values(const VolatilityFeatures& f) {
  std::vector<std::optional<double>> v;
  v.reserve(feature_column_names().size());
  v.push_back(f.cv_long_acc);
  v.push_back(f.cv_long_dec);
  v.push_back(f.cv_lat_acc);
  v.push_back(f.cv_lat_dec);
  for (const auto& arr : {f.cv_long_acc_k, f.cv_long_dec_k, f.cv_lat_acc_k, f.cv_lat_dec_k}) {
    for (const auto& x : arr) v.push_back(x);
  }
  v.push_back(f.mean_speed);
  for (const auto& x : f.mean_speed_k) v.push_back(x);
  return v;
}

}  // namespace

void write_features_csv(std::ostream& out, const std::vector<VolatilityFeatures>& features) {
  write_table_csv(out, features_to_table(features));
}

DataTable features_to_table(const std::vector<VolatilityFeatures>& features) {
  DataTable t;
  t.columns = feature_column_names();
  for (const VolatilityFeatures& f : features) {
    t.event_ids.push_back(f.event_id);
    t.cells.push_back(feature_values(f));
  }
  return t;
}

DescriptiveStats describe(const DataTable& table) {
  if (table.n_rows() == 0) throw validation_error("describe: empty dataset");
  DescriptiveStats stats;
  stats.n_rows = table.n_rows();
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    ColumnStats cs;
    cs.name = table.columns[c];
    double sum = 0.0;
    double lo = 0.0, hi = 0.0;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      const auto& cell = table.cells[r][c];
      if (!cell) continue;
      if (cs.n == 0) {
        lo = hi = *cell;
      } else {
        lo = std::min(lo, *cell);
        hi = std::max(hi, *cell);
      }
      sum += *cell;
      ++cs.n;
    }
    if (cs.n > 0) {
      const double mean = sum / static_cast<double>(cs.n);
      cs.mean = mean;
      cs.min = lo;
      cs.max = hi;
      if (cs.n > 1) {
        double ss = 0.0;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
          const auto& cell = table.cells[r][c];
          if (!cell) continue;
          const double d = *cell - mean;
          ss += d * d;
        }
        cs.sd = std::sqrt(ss / static_cast<double>(cs.n - 1));
      }
    }
    stats.columns.push_back(std::move(cs));
  }
  return stats;
}

void write_descriptive_stats_csv(std::ostream& out, const DescriptiveStats& stats) {
  csv::write_row(out, {"variable", "n", "mean", "sd", "min", "max"});
  auto fmt = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
  };
  for (const ColumnStats& cs : stats.columns) {
    csv::write_row(out, {cs.name, std::to_string(cs.n), fmt(cs.mean), fmt(cs.sd), fmt(cs.min),
                         fmt(cs.max)});
  }
}

}  // namespace voltsev
