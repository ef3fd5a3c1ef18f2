#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voltsev/model.hpp"
#include "voltsev/quasirandom.hpp"

namespace voltsev {

/// Listwise-complete design compiled from a dataset and a spec: only events
/// with every referenced variable present survive.
struct PreparedSample {
  std::vector<std::string> event_ids;
  std::vector<int> chosen;     ///< outcome index 0..3 per event
  std::vector<double> weight;  ///< unit unless the spec binds a weight column
  Eigen::MatrixXd x;           ///< N x n_terms, column j = term j's variable
  std::vector<Eigen::MatrixXd> z;  ///< per random ordinal: N x |het_mean|
  std::vector<Eigen::MatrixXd> b;  ///< per random ordinal: N x |het_var|
  std::size_t dropped = 0;         ///< events removed by listwise deletion
  std::array<std::size_t, kOutcomeCount> outcome_counts{};

  std::size_t n_events() const { return chosen.size(); }
  double total_weight() const;
};

PreparedSample prepare_sample(const EventDataset& data, const ModelSpec& spec);

/// Softmax over the four utilities, max-shifted; sums to 1 within 1e-12.
Eigen::Vector4d probabilities(const Eigen::Vector4d& utilities);

/// Utilities for one event at given per-term effective coefficients; base
/// outcome is identically 0.
Eigen::Vector4d utilities_for(const PreparedSample& sample, const ModelSpec& spec,
                              const ParameterPacking& packing, const Eigen::VectorXd& theta,
                              const std::vector<double>& beta_effective, std::size_t event);

/// beta_n = beta + xi.Z + sigma*exp(gamma.B)*v, with the dot products already
/// collapsed by the caller.
inline double realize_beta(double beta, double sigma, double xi_dot_z, double gamma_dot_b,
                           double v) {
  return beta + xi_dot_z + sigma * std::exp(gamma_dot_b) * v;
}

/// Exact log-likelihood of a fixed-coefficients spec; optionally fills the
/// analytic gradient. Per-event contributions are reduced in fixed 256-event
/// blocks so results are bit-stable for any thread count.
double loglik_fixed(const PreparedSample& sample, const ModelSpec& spec,
                    const ParameterPacking& packing, const Eigen::VectorXd& theta,
                    Eigen::VectorXd* grad = nullptr, int threads = 1);

/// Mixing draws transformed to the standardized distribution of each random
/// term, frozen for the lifetime of a fit.
struct RealizedDraws {
  std::size_t n_obs = 0;
  std::size_t n_draws = 0;
  std::size_t n_random = 0;
  std::vector<double> v;  ///< [(n*n_draws + r)*n_random + q]

  double operator()(std::size_t n, std::size_t r, std::size_t q) const {
    return v[(n * n_draws + r) * n_random + q];
  }
};

/// Halton tensor for the spec's random terms (primes 2, 3, 5, ... in term
/// declaration order; discard/scramble/seed from the spec options).
DrawTensor draws_for(const ModelSpec& spec, std::size_t n_obs);
RealizedDraws realize_draws(const DrawTensor& tensor, const ModelSpec& spec);

/// Simulated log-likelihood, SLL = sum_n w_n ln[(1/R) sum_r P_nr(chosen)],
/// with per-draw probabilities floored at 1e-300 before averaging. Optionally
/// fills the analytic gradient (β, σ, ξ, γ all handled). Same fixed-block
/// deterministic reduction as loglik_fixed.
double simulated_loglik(const PreparedSample& sample, const ModelSpec& spec,
                        const ParameterPacking& packing, const Eigen::VectorXd& theta,
                        const RealizedDraws& draws, Eigen::VectorXd* grad = nullptr,
                        int threads = 1);

}  // namespace voltsev
