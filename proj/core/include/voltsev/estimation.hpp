#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voltsev/likelihood.hpp"
#include "voltsev/model.hpp"

namespace voltsev {

enum class StartMode {
  zeros,     ///< all zero, random-term scales at 0.1
  warm,      ///< fixed-model solution first, then scales at 0.1 (default)
  supplied,  ///< explicit start vector
};

struct FitOptions {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-5;  ///< sup-norm convergence criterion
  double step_tolerance = 1e-9;      ///< stop (non-converged) below this step
  StartMode start = StartMode::warm;
  std::vector<double> start_values;  ///< used when start == supplied
  int threads = 1;
  bool compute_covariance = true;

  static FitOptions from_spec(const ModelSpec& spec);
};

struct IterationRecord {
  std::size_t iteration = 0;
  double loglik = 0.0;
  double grad_sup_norm = 0.0;
  double step_sup_norm = 0.0;
};

struct EstimationResult {
  ModelSpec spec;
  ParameterPacking packing;
  Eigen::VectorXd theta;     ///< internal vector; sigma components signed
  Eigen::VectorXd estimate;  ///< reported vector; sigma as |sigma|
  Eigen::VectorXd se;        ///< NaN where unavailable
  Eigen::VectorXd tstat;     ///< estimate/se
  Eigen::MatrixXd covariance;
  bool covariance_ok = false;  ///< false: singular Hessian, pseudo-inverse used
  double loglik = 0.0;
  double loglik_constants = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_dropped = 0;
  std::size_t n_params = 0;
  bool converged = false;  ///< true only on the gradient criterion
  std::string message;
  std::vector<IterationRecord> iterations;
};

/// Closed-form constants-only log-likelihood, sum_k W_k ln(W_k/W) over
/// outcome weight totals (zero-count outcomes contribute nothing).
double constants_only_loglik(const PreparedSample& sample);

/// Maximizes the (simulated) log-likelihood by BFGS with Armijo backtracking
/// and analytic gradients. Draws are built once from the spec options and
/// frozen. Non-convergence is reported in the result, not thrown.
EstimationResult fit(const PreparedSample& sample, const ModelSpec& spec,
                     const FitOptions& options);
EstimationResult fit(const EventDataset& data, const ModelSpec& spec, const FitOptions& options);

struct StandardErrors {
  Eigen::MatrixXd covariance;
  Eigen::VectorXd se;
  Eigen::VectorXd tstat;
  bool ok = false;
};

/// Covariance = inverse of the negative Hessian (Hessian of LL at the
/// optimum); falls back to an eigenvalue pseudo-inverse with ok=false.
/// tstat uses the reported estimate (|sigma| for scale rows).
StandardErrors standard_errors(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& reported);

struct FitStatistics {
  double aic = 0.0;
  double bic = 0.0;
  double mcfadden_r2 = 0.0;
  std::optional<double> lr_statistic;
  std::optional<std::size_t> lr_df;
};

/// AIC = 2p - 2LL, BIC = p ln N - 2LL, R2 = 1 - LL/LL0. With `nested`, adds
/// LR = 2(LL_u - LL_r) after checking the parameter sets really nest and the
/// samples match; throws validation_error otherwise.
FitStatistics fit_statistics(const EstimationResult& result,
                             const EstimationResult* nested = nullptr);

std::string result_to_json(const EstimationResult& result);
EstimationResult result_from_json(const std::string& json_text);
EstimationResult load_result(const std::string& path);

/// Aligned text table of coefficients and t-stats grouped like the severity
/// model write-ups (random parameters, heterogeneity blocks, fixed, constants)
/// plus the fit-statistics footer.
std::string coefficient_table(const EstimationResult& result);

/// Side-by-side goodness-of-fit table (N, p, LL0, LL, R2, AIC, BIC) with LR
/// rows for every nested pair on matching samples; mismatched-N pairs are
/// listed as not applicable.
std::string comparison_table(const std::vector<EstimationResult>& results);

}  // namespace voltsev
