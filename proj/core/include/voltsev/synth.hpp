#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voltsev/kinematics.hpp"
#include "voltsev/model.hpp"

namespace voltsev {

struct CovariateGenerator {
  enum class Kind { bernoulli, uniform, normal, fixed };
  Kind kind = Kind::fixed;
  double a = 0.0;  ///< bernoulli: p; uniform: lower; normal: mean; fixed: value
  double b = 0.0;  ///< uniform: upper; normal: sd
};

/// Data-generating process for recovery experiments: a spec, the true packed
/// parameter vector, covariate generators (generation order matters for the
/// random stream), event count, and the master seed.
struct GroundTruth {
  ModelSpec spec;
  std::vector<double> theta;  ///< packed per make_packing(spec)
  std::vector<std::pair<std::string, CovariateGenerator>> covariates;
  std::size_t n_events = 0;
  std::uint64_t seed = 0;
};

void validate_truth(const GroundTruth& truth);

/// Per event: draw covariates, realize random coefficients with pseudo-random
/// (not Halton) standardized draws, compute choice probabilities, sample the
/// outcome. Each event gets its own counter-derived stream, so output is
/// deterministic and order-independent.
EventDataset simulate_events(const GroundTruth& truth);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& json_text);
GroundTruth load_truth(const std::string& path);

/// Piecewise-constant kinematics over [t_begin, t_end) at 10 Hz.
struct TraceSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double speed_kmh = 0.0;
  double accel_long = 0.0;
  double accel_lat = 0.0;
};

struct TraceProfile {
  std::string event_id;
  std::vector<TraceSegment> segments;  ///< ascending, non-overlapping
  double noise_sd = 0.0;               ///< gaussian noise on both accel channels
};

/// Samples each profile on the 0.1 s grid with seeded accelerometer noise.
/// Overlapping segments are a validation error; gaps simply have no samples.
std::vector<KinematicsTrace> simulate_traces(const std::vector<TraceProfile>& profiles,
                                             std::uint64_t seed);

std::vector<TraceProfile> profiles_from_json(const std::string& json_text);
std::vector<TraceProfile> load_profiles(const std::string& path);

}  // namespace voltsev
