#pragma once

// shared fixtures for the test binaries
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voltsev/model.hpp"
#include "voltsev/rng.hpp"
#include "voltsev/synth.hpp"

namespace testutil {

inline voltsev::Term fixed_term(std::string variable, voltsev::Severity outcome) {
  voltsev::Term t;
  t.variable = std::move(variable);
  t.outcome = outcome;
  return t;
}

inline voltsev::Term random_term(std::string variable, voltsev::Severity outcome,
                                 voltsev::MixingKind distribution = voltsev::MixingKind::normal,
                                 std::vector<std::string> het_mean = {},
                                 std::vector<std::string> het_var = {}) {
  voltsev::Term t;
  t.variable = std::move(variable);
  t.outcome = outcome;
  t.random = true;
  t.distribution = distribution;
  t.het_mean = std::move(het_mean);
  t.het_var = std::move(het_var);
  return t;
}

inline voltsev::ModelSpec make_spec(std::string name, std::vector<voltsev::Term> terms,
                                    std::size_t draws = 50, std::uint64_t seed = 1) {
  voltsev::ModelSpec spec;
  spec.name = std::move(name);
  spec.terms = std::move(terms);
  spec.options.draws = draws;
  spec.options.seed = seed;
  return spec;
}

// central finite differences of a scalar function
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& theta, double h_scale = 1e-6) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = h_scale * std::max(std::abs(theta[i]), 1.0);
    Eigen::VectorXd tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    g[i] = (f(tp) - f(tm)) / (2.0 * h);
  }
  return g;
}

inline double max_rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    worst = std::max(worst,
                     std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
  }
  return worst;
}

// events drawn from a compact data-generating process; good enough for
// gradient and recovery fixtures
inline voltsev::EventDataset sample_events(const voltsev::ModelSpec& spec,
                                           const std::vector<double>& theta, std::size_t n,
                                           std::uint64_t seed) {
  voltsev::GroundTruth truth;
  truth.spec = spec;
  truth.theta = theta;
  for (const std::string& v : spec.referenced_variables()) {
    voltsev::CovariateGenerator g;
    if (v.size() > 1 && v.front() == 'd') {  // names starting with 'd' become dummies
      g.kind = voltsev::CovariateGenerator::Kind::bernoulli;
      g.a = 0.5;
    } else {
      g.kind = voltsev::CovariateGenerator::Kind::normal;
      g.a = 0.0;
      g.b = 1.0;
    }
    truth.covariates.emplace_back(v, g);
  }
  truth.n_events = n;
  truth.seed = seed;
  return simulate_events(truth);
}

}  // namespace testutil
