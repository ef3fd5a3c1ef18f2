#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "voltsev/errors.hpp"
#include "voltsev/estimation.hpp"

#include "helpers.hpp"

using namespace voltsev;
using testutil::fixed_term;
using testutil::make_spec;
using testutil::random_term;
using testutil::sample_events;

namespace {

EventDataset constants_fixture() {
  // fixed outcome counts: 40 TS, 25 MC, 20 PRC, 15 SC
  EventDataset data;
  data.covariates.columns = {};
  const int counts[4] = {40, 25, 20, 15};
  int id = 0;
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < counts[k]; ++i) {
      data.covariates.event_ids.push_back("e" + std::to_string(++id));
      data.covariates.cells.emplace_back();
      data.outcomes.push_back(static_cast<Severity>(k));
    }
  }
  return data;
}

}  // namespace

TEST_CASE("constants-only MLE matches log share ratios and closed-form SEs") {
  EventDataset data = constants_fixture();
  ModelSpec spec = make_spec("null", {});
  FitOptions opts = FitOptions::from_spec(spec);
  EstimationResult res = fit(data, spec, opts);

  CHECK(res.converged);
  CHECK(res.n_obs == 100);
  CHECK(res.n_params == 3);
  const double n0 = 40.0;
  const double want[3] = {std::log(25.0 / n0), std::log(20.0 / n0), std::log(15.0 / n0)};
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(res.estimate[k] - want[k]) < 1e-8);
  }

  // multinomial closed form: Var(c_k) = 1/n_k + 1/n_0
  const double n_k[3] = {25.0, 20.0, 15.0};
  for (int k = 0; k < 3; ++k) {
    const double se_want = std::sqrt(1.0 / n_k[k] + 1.0 / n0);
    CHECK(std::abs(res.se[k] - se_want) / se_want < 1e-3);
  }
  CHECK(res.covariance_ok);

  // loglik agrees with the closed form shared by fit statistics
  PreparedSample s = prepare_sample(data, spec);
  CHECK(res.loglik == doctest::Approx(constants_only_loglik(s)).epsilon(1e-10));
  CHECK(res.loglik_constants == doctest::Approx(res.loglik).epsilon(1e-10));
}

TEST_CASE("constants_only_loglik uses weight totals") {
  EventDataset data;
  data.covariates.columns = {"w"};
  data.covariates.event_ids = {"a", "b", "c"};
  data.covariates.cells = {{2.0}, {1.0}, {1.0}};
  data.outcomes = {Severity::tire_strike, Severity::tire_strike, Severity::minor_crash};
  ModelSpec spec = make_spec("null", {});
  spec.weight_column = "w";
  PreparedSample s = prepare_sample(data, spec);
  const double want = 3.0 * std::log(3.0 / 4.0) + 1.0 * std::log(1.0 / 4.0);
  CHECK(constants_only_loglik(s) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("fixed-spec fit recovers parameters and reports sane errors") {
  ModelSpec spec = make_spec("fx", {fixed_term("x1", Severity::most_severe),
                                    fixed_term("x2", Severity::minor_crash)});
  const std::vector<double> truth = {0.2, -0.1, 0.3, 0.9, -0.6};
  EventDataset data = sample_events(spec, truth, 4000, 77);
  FitOptions opts = FitOptions::from_spec(spec);
  EstimationResult res = fit(data, spec, opts);

  REQUIRE(res.converged);
  CHECK(res.covariance_ok);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(res.estimate[i] - truth[static_cast<std::size_t>(i)]) <
          3.0 * res.se[i] + 0.05);
    CHECK(res.se[i] > 0.0);
    CHECK(std::isfinite(res.tstat[i]));
  }
  CHECK(res.loglik > res.loglik_constants);
  CHECK(res.iterations.size() >= 2);
  CHECK(res.iterations.back().grad_sup_norm < opts.gradient_tolerance);
}

TEST_CASE("max_iterations=1 reports non-convergence without throwing") {
  ModelSpec spec = make_spec("fx", {fixed_term("x1", Severity::most_severe)});
  EventDataset data = sample_events(spec, {0.2, -0.1, 0.3, 0.9}, 500, 3);
  FitOptions opts = FitOptions::from_spec(spec);
  opts.max_iterations = 1;
  opts.start = StartMode::zeros;
  EstimationResult res = fit(data, spec, opts);
  CHECK_FALSE(res.converged);
  CHECK_FALSE(res.message.empty());
}

TEST_CASE("a supplied start at the optimum converges immediately") {
  EventDataset data = constants_fixture();
  ModelSpec spec = make_spec("null", {});
  FitOptions opts = FitOptions::from_spec(spec);
  opts.start = StartMode::supplied;
  opts.start_values = {std::log(25.0 / 40.0), std::log(20.0 / 40.0), std::log(15.0 / 40.0)};
  EstimationResult res = fit(data, spec, opts);
  CHECK(res.converged);
  CHECK(res.iterations.size() <= 2);
}

TEST_CASE("mixed fit reports the scale as a positive magnitude") {
  ModelSpec spec = make_spec("mx", {random_term("x", Severity::most_severe)}, 64, 12);
  const std::vector<double> truth = {0.1, -0.2, 0.3, 0.8, 0.6};
  EventDataset data = sample_events(spec, truth, 1500, 41);
  FitOptions opts = FitOptions::from_spec(spec);
  opts.threads = 4;
  EstimationResult res = fit(data, spec, opts);
  REQUIRE(res.converged);
  const auto s_idx = static_cast<Eigen::Index>(res.packing.sigma_index(0));
  CHECK(res.estimate[s_idx] >= 0.0);
  CHECK(res.estimate[s_idx] == std::abs(res.theta[s_idx]));
  // reported scale in a sane neighborhood of the truth
  CHECK(res.estimate[s_idx] > 0.2);
  CHECK(res.estimate[s_idx] < 1.4);
}

TEST_CASE("fit statistics reproduce the standard formulas") {
  ModelSpec spec = make_spec("fx", {fixed_term("x1", Severity::most_severe)});
  EventDataset data = sample_events(spec, {0.2, -0.1, 0.3, 0.9}, 800, 8);
  EstimationResult res = fit(data, spec, FitOptions::from_spec(spec));
  REQUIRE(res.converged);
  FitStatistics st = fit_statistics(res);
  CHECK(st.aic == doctest::Approx(2.0 * 4 - 2.0 * res.loglik).epsilon(1e-12));
  CHECK(st.bic ==
        doctest::Approx(4 * std::log(800.0) - 2.0 * res.loglik).epsilon(1e-12));
  CHECK(st.mcfadden_r2 ==
        doctest::Approx(1.0 - res.loglik / res.loglik_constants).epsilon(1e-12));
  CHECK_FALSE(st.lr_statistic.has_value());
}

TEST_CASE("likelihood ratio requires genuine nesting on the same sample") {
  ModelSpec small = make_spec("s", {fixed_term("x1", Severity::most_severe)});
  ModelSpec big = make_spec("b", {fixed_term("x1", Severity::most_severe),
                                  fixed_term("x2", Severity::minor_crash)});
  const std::vector<double> truth = {0.2, -0.1, 0.3, 0.9, -0.6};
  EventDataset data = sample_events(big, truth, 600, 21);
  EstimationResult rs = fit(data, small, FitOptions::from_spec(small));
  EstimationResult rb = fit(data, big, FitOptions::from_spec(big));
  REQUIRE(rs.converged);
  REQUIRE(rb.converged);

  FitStatistics st = fit_statistics(rb, &rs);
  REQUIRE(st.lr_statistic.has_value());
  CHECK(*st.lr_statistic ==
        doctest::Approx(2.0 * (rb.loglik - rs.loglik)).epsilon(1e-12));
  CHECK(*st.lr_df == 1);

  // reversed direction: the bigger model is not nested in the smaller
  CHECK_THROWS_AS(fit_statistics(rs, &rb), validation_error);

  // different sample size: refuse
  EventDataset shorter = sample_events(big, truth, 500, 21);
  EstimationResult rshort = fit(shorter, small, FitOptions::from_spec(small));
  CHECK_THROWS_AS(fit_statistics(rb, &rshort), validation_error);
}

TEST_CASE("result JSON round trip preserves every reported field") {
  ModelSpec spec = make_spec("rt", {random_term("x", Severity::most_severe)}, 32, 6);
  EventDataset data = sample_events(spec, {0.1, -0.2, 0.3, 0.7, 0.5}, 400, 14);
  FitOptions opts = FitOptions::from_spec(spec);
  EstimationResult res = fit(data, spec, opts);

  EstimationResult back = result_from_json(result_to_json(res));
  CHECK(back.spec.name == res.spec.name);
  CHECK(back.spec.terms.size() == res.spec.terms.size());
  CHECK(back.spec.options.draws == res.spec.options.draws);
  CHECK(back.spec.options.seed == res.spec.options.seed);
  CHECK(back.packing.n_params == res.packing.n_params);
  CHECK(back.packing.names == res.packing.names);
  REQUIRE(back.theta.size() == res.theta.size());
  for (Eigen::Index i = 0; i < res.theta.size(); ++i) {
    CHECK(back.theta[i] == res.theta[i]);
    CHECK(back.estimate[i] == res.estimate[i]);
    CHECK(back.se[i] == res.se[i]);
    CHECK(back.tstat[i] == res.tstat[i]);
    for (Eigen::Index j = 0; j < res.theta.size(); ++j) {
      CHECK(back.covariance(i, j) == res.covariance(i, j));
    }
  }
  CHECK(back.covariance_ok == res.covariance_ok);
  CHECK(back.loglik == res.loglik);
  CHECK(back.loglik_constants == res.loglik_constants);
  CHECK(back.n_obs == res.n_obs);
  CHECK(back.n_dropped == res.n_dropped);
  CHECK(back.converged == res.converged);
}

TEST_CASE("coefficient table lists names, estimates and the footer") {
  ModelSpec spec = make_spec("tbl", {fixed_term("x1", Severity::most_severe)});
  EventDataset data = sample_events(spec, {0.2, -0.1, 0.3, 0.9}, 300, 5);
  EstimationResult res = fit(data, spec, FitOptions::from_spec(spec));
  std::string table = coefficient_table(res);
  CHECK(table.find("x1 [SC]") != std::string::npos);
  CHECK(table.find("constant [MC]") != std::string::npos);
  CHECK(table.find("LL (convergence)") != std::string::npos);
  CHECK(table.find("AIC") != std::string::npos);
  CHECK(table.find("Converged") != std::string::npos);
}

TEST_CASE("comparison table prints textbook AIC values") {
  // two synthetic results carrying published goodness-of-fit numbers
  auto stub = [](const std::string& name, std::size_t n_params, double ll,
                 std::size_t n) {
    ModelSpec spec = make_spec(name, {});
    EventDataset data = constants_fixture();
    EstimationResult res = fit(data, spec, FitOptions::from_spec(spec));
    res.spec.name = name;
    res.n_params = n_params;
    res.loglik = ll;
    res.n_obs = n;
    return res;
  };
  EstimationResult a = stub("fixed", 31, -596.6, 1179);
  EstimationResult b = stub("random", 33, -592.064, 1179);
  std::string table = comparison_table({a, b});
  CHECK(table.find("1255.2") != std::string::npos);
  CHECK(table.find("1250.128") != std::string::npos);
  CHECK(table.find("fixed") != std::string::npos);
  CHECK(table.find("random") != std::string::npos);
}

TEST_CASE("standard_errors falls back to a pseudo-inverse on singular Hessians") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
  h(0, 0) = -4.0;  // second direction flat -> singular
  Eigen::VectorXd reported(2);
  reported << 1.0, 2.0;
  StandardErrors se = standard_errors(h, reported);
  CHECK_FALSE(se.ok);
  CHECK(se.se[0] == doctest::Approx(0.5).epsilon(1e-9));

  Eigen::MatrixXd good = -Eigen::MatrixXd::Identity(2, 2) * 16.0;
  StandardErrors se2 = standard_errors(good, reported);
  CHECK(se2.ok);
  CHECK(se2.se[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(se2.tstat[1] == doctest::Approx(2.0 / 0.25).epsilon(1e-12));
}
