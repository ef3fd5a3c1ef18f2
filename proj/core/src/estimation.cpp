#include "voltsev/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"

namespace voltsev {

namespace {

using nlohmann::json;

constexpr double kArmijoC1 = 1e-4;
constexpr double kLineShrink = 0.5;
constexpr double kMinStep = 1e-14;
constexpr double kCurvatureGuard = 1e-10;
constexpr double kSigmaStart = 0.1;
constexpr double kFdScale = 1e-4;  // Hessian step: kFdScale * max(|theta_i|, 1)

const char* param_kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::constant: return "constant";
    case ParamKind::beta: return "beta";
    case ParamKind::sigma: return "sigma";
    case ParamKind::xi: return "xi";
    case ParamKind::gamma: return "gamma";
  }
  return "beta";
}

}  // namespace

FitOptions FitOptions::from_spec(const ModelSpec& spec) {
  FitOptions o;
  o.max_iterations = spec.options.max_iterations;
  o.gradient_tolerance = spec.options.gradient_tolerance;
  o.step_tolerance = spec.options.step_tolerance;
  return o;
}

double constants_only_loglik(const PreparedSample& sample) {
  std::array<double, kOutcomeCount> w{};
  double total = 0.0;
  for (std::size_t i = 0; i < sample.n_events(); ++i) {
    w[static_cast<std::size_t>(sample.chosen[i])] += sample.weight[i];
    total += sample.weight[i];
  }
  double ll = 0.0;
  for (double wk : w) {
    if (wk > 0.0) ll += wk * std::log(wk / total);
  }
  return ll;
}

namespace {

struct Objective {
  // minimizes f = -LL
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> eval;
};

struct BfgsOutcome {
  Eigen::VectorXd theta;
  double loglik = 0.0;
  Eigen::VectorXd grad;  // of LL
  bool converged = false;
  std::string message;
  std::vector<IterationRecord> iterations;
};

BfgsOutcome bfgs_maximize(const Objective& obj, Eigen::VectorXd theta, const FitOptions& options) {
  BfgsOutcome out;
  const auto p = theta.size();
  Eigen::VectorXd grad(p);
  double ll = obj.eval(theta, &grad);
  out.iterations.push_back({0, ll, grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0, 0.0});

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd g = -grad;  // gradient of the minimized objective

  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    const double gsup = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (gsup < options.gradient_tolerance) {
      out.converged = true;
      out.message = "converged: gradient sup-norm below tolerance";
      break;
    }
    Eigen::VectorXd d = -(h_inv * g);
    double descent = d.dot(g);
    if (!(descent < 0.0)) {  // lost positive-definiteness; restart from steepest descent
      h_inv.setIdentity();
      d = -g;
      descent = d.dot(g);
    }

    double alpha = 1.0;
    double ll_new = ll;
    Eigen::VectorXd grad_new(p);
    Eigen::VectorXd theta_new = theta;
    bool accepted = false;
    while (alpha >= kMinStep) {
      theta_new = theta + alpha * d;
      ll_new = obj.eval(theta_new, &grad_new);
      const double f_new = -ll_new;
      if (std::isfinite(f_new) && f_new <= -ll + kArmijoC1 * alpha * descent) {
        accepted = true;
        break;
      }
      alpha *= kLineShrink;
    }
    if (!accepted) {
      out.message = "stopped: line search could not improve the log-likelihood";
      break;
    }

    const Eigen::VectorXd s = alpha * d;
    const Eigen::VectorXd g_new = -grad_new;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > kCurvatureGuard * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
      h_inv = (identity - rho * s * y.transpose()) * h_inv *
                  (identity - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }

    theta = theta_new;
    ll = ll_new;
    grad = grad_new;
    g = g_new;
    const double step_sup = s.size() ? s.cwiseAbs().maxCoeff() : 0.0;
    out.iterations.push_back(
        {iter, ll, g.size() ? g.cwiseAbs().maxCoeff() : 0.0, step_sup});
    if (step_sup < options.step_tolerance) {
      out.message = "stopped: step size below tolerance before gradient criterion";
      break;
    }
  }
  if (!out.converged && out.message.empty()) {
    const double gsup = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (gsup < options.gradient_tolerance) {
      out.converged = true;
      out.message = "converged: gradient sup-norm below tolerance";
    } else {
      out.message = "stopped: iteration limit reached";
    }
  }
  out.theta = std::move(theta);
  out.loglik = ll;
  out.grad = std::move(grad);
  return out;
}

Eigen::MatrixXd fd_hessian(const Objective& obj, const Eigen::VectorXd& theta) {
  const auto p = theta.size();
  Eigen::MatrixXd hess(p, p);
  Eigen::VectorXd gp(p), gm(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double h = kFdScale * std::max(std::abs(theta[j]), 1.0);
    Eigen::VectorXd t = theta;
    t[j] = theta[j] + h;
    obj.eval(t, &gp);
    t[j] = theta[j] - h;
    obj.eval(t, &gm);
    hess.col(j) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace

StandardErrors standard_errors(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& reported) {
  const auto p = hessian.rows();
  StandardErrors out;
  out.se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  out.tstat = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (p == 0) {
    out.covariance.resize(0, 0);
    out.ok = true;
    return out;
  }
  const Eigen::MatrixXd neg_h = -hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok) {
    out.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!(out.covariance(i, i) > 0.0) || !std::isfinite(out.covariance(i, i))) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    // eigenvalue pseudo-inverse, flagged
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neg_h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = ev.cwiseAbs().maxCoeff() * 1e-12;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (std::abs(ev[i]) > cutoff) inv[i] = 1.0 / ev[i];
    }
    out.covariance = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  for (Eigen::Index i = 0; i < p; ++i) {
    const double var = out.covariance(i, i);
    if (var > 0.0 && std::isfinite(var)) {
      out.se[i] = std::sqrt(var);
      out.tstat[i] = reported[i] / out.se[i];
    }
  }
  out.ok = ok;
  return out;
}

EstimationResult fit(const PreparedSample& sample, const ModelSpec& spec,
                     const FitOptions& options) {
  validate_spec(spec);
  EstimationResult result;
  result.spec = spec;
  result.packing = make_packing(spec);
  const std::size_t p = result.packing.n_params;
  result.n_obs = sample.n_events();
  result.n_dropped = sample.dropped;
  result.n_params = p;
  result.loglik_constants = constants_only_loglik(sample);
  if (sample.n_events() == 0) throw validation_error("fit: empty estimation sample");
  if (sample.n_events() < p) {
    throw validation_error("fit: fewer events (" + std::to_string(sample.n_events()) +
                           ") than parameters (" + std::to_string(p) + ")");
  }

  const bool random = spec.has_random();
  DrawTensor tensor;
  RealizedDraws draws;
  if (random) {
    tensor = draws_for(spec, sample.n_events());
    draws = realize_draws(tensor, spec);
  }

  Objective obj;
  if (random) {
    obj.eval = [&](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
      return simulated_loglik(sample, spec, result.packing, t, draws, g, options.threads);
    };
  } else {
    obj.eval = [&](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
      return loglik_fixed(sample, spec, result.packing, t, g, options.threads);
    };
  }

  Eigen::VectorXd start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  switch (options.start) {
    case StartMode::supplied: {
      if (options.start_values.size() != p) {
        throw validation_error("fit: start vector has " +
                               std::to_string(options.start_values.size()) + " entries, expected " +
                               std::to_string(p));
      }
      for (std::size_t i = 0; i < p; ++i) start[static_cast<Eigen::Index>(i)] = options.start_values[i];
      break;
    }
    case StartMode::warm: {
      if (random) {
        ModelSpec fixed_spec = fixed_counterpart(spec);
        FitOptions warm_options = options;
        warm_options.start = StartMode::zeros;
        warm_options.compute_covariance = false;
        EstimationResult fixed_fit = fit(sample, fixed_spec, warm_options);
        const std::size_t shared = result.packing.n_constants + result.packing.n_terms;
        start.head(static_cast<Eigen::Index>(shared)) =
            fixed_fit.theta.head(static_cast<Eigen::Index>(shared));
      }
      [[fallthrough]];
    }
    case StartMode::zeros: {
      for (std::size_t q = 0; q < result.packing.random_terms.size(); ++q) {
        start[static_cast<Eigen::Index>(result.packing.sigma_index(q))] = kSigmaStart;
      }
      break;
    }
  }

  BfgsOutcome bfgs = bfgs_maximize(obj, std::move(start), options);
  result.theta = bfgs.theta;
  result.loglik = bfgs.loglik;
  result.converged = bfgs.converged;
  result.message = bfgs.message;
  result.iterations = std::move(bfgs.iterations);

  result.estimate = result.theta;
  for (std::size_t q = 0; q < result.packing.random_terms.size(); ++q) {
    const auto i = static_cast<Eigen::Index>(result.packing.sigma_index(q));
    result.estimate[i] = std::abs(result.theta[i]);
  }

  if (options.compute_covariance) {
    const Eigen::MatrixXd hess = fd_hessian(obj, result.theta);
    StandardErrors ses = standard_errors(hess, result.estimate);
    result.covariance = std::move(ses.covariance);
    result.se = std::move(ses.se);
    result.tstat = std::move(ses.tstat);
    result.covariance_ok = ses.ok;
  } else {
    result.covariance.resize(0, 0);
    result.se = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p),
                                          std::numeric_limits<double>::quiet_NaN());
    result.tstat = result.se;
    result.covariance_ok = false;
  }
  return result;
}

EstimationResult fit(const EventDataset& data, const ModelSpec& spec, const FitOptions& options) {
  PreparedSample sample = prepare_sample(data, spec);
  return fit(sample, spec, options);
}

FitStatistics fit_statistics(const EstimationResult& result, const EstimationResult* nested) {
  FitStatistics stats;
  const double p = static_cast<double>(result.n_params);
  stats.aic = 2.0 * p - 2.0 * result.loglik;
  stats.bic = p * std::log(static_cast<double>(result.n_obs)) - 2.0 * result.loglik;
  stats.mcfadden_r2 =
      result.loglik_constants != 0.0 ? 1.0 - result.loglik / result.loglik_constants : 0.0;
  if (nested) {
    const std::set<std::string> sub(nested->packing.names.begin(), nested->packing.names.end());
    const std::set<std::string> super(result.packing.names.begin(), result.packing.names.end());
    if (!std::includes(super.begin(), super.end(), sub.begin(), sub.end())) {
      throw validation_error("fit_statistics: models not nested");
    }
    if (nested->n_obs != result.n_obs) {
      throw validation_error("fit_statistics: LR requires identical estimation samples");
    }
    stats.lr_statistic = 2.0 * (result.loglik - nested->loglik);
    stats.lr_df = result.n_params - nested->n_params;
  }
  return stats;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      arr.push_back(v[i]);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        arr[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : arr[i].get<double>();
  }
  return v;
}

}  // namespace

std::string result_to_json(const EstimationResult& result) {
  json j;
  j["model"] = result.spec.name;
  j["spec"] = json::parse(model_spec_to_json(result.spec));
  j["n_obs"] = result.n_obs;
  j["n_dropped"] = result.n_dropped;
  j["n_params"] = result.n_params;
  j["converged"] = result.converged;
  j["message"] = result.message;
  j["loglik"] = result.loglik;
  j["loglik_constants"] = result.loglik_constants;
  const FitStatistics stats = fit_statistics(result);
  j["statistics"] = {
      {"aic", stats.aic}, {"bic", stats.bic}, {"mcfadden_r2", stats.mcfadden_r2}};
  json params = json::array();
  for (std::size_t i = 0; i < result.n_params; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    json pj;
    pj["name"] = result.packing.names[i];
    pj["kind"] = param_kind_name(result.packing.kind(i));
    pj["estimate"] = result.estimate[idx];
    pj["internal"] = result.theta[idx];
    pj["se"] = std::isfinite(result.se[idx]) ? json(result.se[idx]) : json(nullptr);
    pj["t"] = std::isfinite(result.tstat[idx]) ? json(result.tstat[idx]) : json(nullptr);
    params.push_back(pj);
  }
  j["parameters"] = params;
  j["covariance_ok"] = result.covariance_ok;
  json cov = json::array();
  for (Eigen::Index r = 0; r < result.covariance.rows(); ++r) {
    cov.push_back(vector_to_json(result.covariance.row(r)));
  }
  j["covariance"] = cov;
  json iters = json::array();
  for (const IterationRecord& it : result.iterations) {
    iters.push_back({{"iteration", it.iteration},
                     {"loglik", it.loglik},
                     {"grad_sup_norm", it.grad_sup_norm},
                     {"step_sup_norm", it.step_sup_norm}});
  }
  j["iterations"] = iters;
  return j.dump(2);
}

EstimationResult result_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("result JSON: ") + e.what());
  }
  EstimationResult result;
  result.spec = parse_model_spec(j.at("spec").dump());
  result.packing = make_packing(result.spec);
  result.n_obs = j.at("n_obs").get<std::size_t>();
  result.n_dropped = j.value("n_dropped", std::size_t{0});
  result.n_params = j.at("n_params").get<std::size_t>();
  if (result.n_params != result.packing.n_params) {
    throw validation_error("result JSON: parameter count does not match the spec");
  }
  result.converged = j.value("converged", false);
  result.message = j.value("message", std::string());
  result.loglik = j.at("loglik").get<double>();
  result.loglik_constants = j.value("loglik_constants", 0.0);
  const json& params = j.at("parameters");
  if (params.size() != result.n_params) {
    throw validation_error("result JSON: parameters array size mismatch");
  }
  const auto p = static_cast<Eigen::Index>(result.n_params);
  result.theta.resize(p);
  result.estimate.resize(p);
  result.se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  result.tstat = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < p; ++i) {
    const json& pj = params[static_cast<std::size_t>(i)];
    if (pj.at("name").get<std::string>() != result.packing.names[static_cast<std::size_t>(i)]) {
      throw validation_error("result JSON: parameter order does not match the spec packing");
    }
    result.estimate[i] = pj.at("estimate").get<double>();
    result.theta[i] = pj.value("internal", result.estimate[i]);
    if (pj.contains("se") && !pj.at("se").is_null()) result.se[i] = pj.at("se").get<double>();
    if (pj.contains("t") && !pj.at("t").is_null()) result.tstat[i] = pj.at("t").get<double>();
  }
  result.covariance_ok = j.value("covariance_ok", false);
  if (j.contains("covariance")) {
    const json& cov = j.at("covariance");
    result.covariance.resize(static_cast<Eigen::Index>(cov.size()),
                             static_cast<Eigen::Index>(cov.size()));
    for (std::size_t r = 0; r < cov.size(); ++r) {
      result.covariance.row(static_cast<Eigen::Index>(r)) = vector_from_json(cov[r]);
    }
  }
  for (const json& it : j.value("iterations", json::array())) {
    result.iterations.push_back({it.value("iteration", std::size_t{0}),
                                 it.value("loglik", 0.0), it.value("grad_sup_norm", 0.0),
                                 it.value("step_sup_norm", 0.0)});
  }
  return result;
}

EstimationResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open result file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return result_from_json(buf.str());
}

namespace {

std::string format_fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

std::string format_stat(double v) {
  return std::isfinite(v) ? csv::format_double(v) : std::string("--");
}

}  // namespace

std::string coefficient_table(const EstimationResult& result) {
  struct Row {
    std::string label;
    std::string coef;
    std::string t;
  };
  std::vector<std::pair<std::string, std::vector<Row>>> sections;
  auto row_for = [&](std::size_t i, const std::string& label) {
    const auto idx = static_cast<Eigen::Index>(i);
    Row r;
    r.label = label;
    r.coef = format_fixed(result.estimate[idx], 4);
    r.t = std::isfinite(result.tstat[idx]) ? format_fixed(result.tstat[idx], 2)
                                           : std::string("--");
    return r;
  };

  const ModelSpec& spec = result.spec;
  const ParameterPacking& pk = result.packing;
  auto term_label = [&](const Term& t) {
    return t.variable + " [" + std::string(severity_code(t.outcome)) + "]";
  };

  std::vector<Row> random_rows, hetmean_rows, hetvar_rows, fixed_rows, const_rows;
  for (std::size_t q = 0; q < pk.random_terms.size(); ++q) {
    const Term& t = spec.terms[pk.random_terms[q]];
    random_rows.push_back(row_for(pk.beta_index(pk.random_terms[q]), term_label(t)));
    random_rows.push_back(row_for(pk.sigma_index(q), "  sd " + term_label(t)));
    for (std::size_t m = 0; m < t.het_mean.size(); ++m) {
      hetmean_rows.push_back(row_for(pk.xi_index(q, m), term_label(t) + " : " + t.het_mean[m]));
    }
    for (std::size_t m = 0; m < t.het_var.size(); ++m) {
      hetvar_rows.push_back(row_for(pk.gamma_index(q, m), term_label(t) + " : " + t.het_var[m]));
    }
  }
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    if (!spec.terms[j].random) fixed_rows.push_back(row_for(pk.beta_index(j), term_label(spec.terms[j])));
  }
  if (pk.n_constants > 0) {
    for (int k = 1; k < kOutcomeCount; ++k) {
      const Severity s = static_cast<Severity>(k);
      const_rows.push_back(
          row_for(pk.const_index(s), "constant [" + std::string(severity_code(s)) + "]"));
    }
  }
  if (!random_rows.empty()) sections.emplace_back("Random parameters", random_rows);
  if (!hetmean_rows.empty()) sections.emplace_back("Heterogeneity in means", hetmean_rows);
  if (!hetvar_rows.empty()) sections.emplace_back("Heterogeneity in variances", hetvar_rows);
  if (!fixed_rows.empty()) sections.emplace_back("Fixed parameters", fixed_rows);
  if (!const_rows.empty()) sections.emplace_back("Constants", const_rows);

  std::size_t label_w = 24;
  for (const auto& [name, rows] : sections) {
    for (const Row& r : rows) label_w = std::max(label_w, r.label.size() + 2);
  }
  const std::size_t coef_w = 12, t_w = 10;
  const std::size_t total_w = label_w + coef_w + t_w;

  std::ostringstream os;
  os << "Model: " << (spec.name.empty() ? std::string("(unnamed)") : spec.name) << '\n';
  os << std::string(total_w, '=') << '\n';
  os << std::left << std::setw(static_cast<int>(label_w)) << "Parameter" << std::right
     << std::setw(static_cast<int>(coef_w)) << "Coef." << std::setw(static_cast<int>(t_w))
     << "t-stat" << '\n';
  os << std::string(total_w, '-') << '\n';
  for (const auto& [name, rows] : sections) {
    os << name << '\n';
    for (const Row& r : rows) {
      os << std::left << std::setw(static_cast<int>(label_w)) << ("  " + r.label) << std::right
         << std::setw(static_cast<int>(coef_w)) << r.coef << std::setw(static_cast<int>(t_w))
         << r.t << '\n';
    }
  }
  os << std::string(total_w, '-') << '\n';
  const FitStatistics stats = fit_statistics(result);
  auto stat_line = [&](const std::string& label, const std::string& value) {
    os << std::left << std::setw(static_cast<int>(label_w)) << label << std::right
       << std::setw(static_cast<int>(coef_w + t_w)) << value << '\n';
  };
  stat_line("Events", std::to_string(result.n_obs));
  stat_line("Dropped (incomplete)", std::to_string(result.n_dropped));
  stat_line("Parameters", std::to_string(result.n_params));
  stat_line("LL (constants)", format_stat(result.loglik_constants));
  stat_line("LL (convergence)", format_stat(result.loglik));
  stat_line("McFadden pseudo R2", format_fixed(stats.mcfadden_r2, 4));
  stat_line("AIC", format_stat(stats.aic));
  stat_line("BIC", format_stat(stats.bic));
  stat_line("Converged", result.converged ? "yes" : "NO");
  os << std::string(total_w, '=') << '\n';
  return os.str();
}

std::string comparison_table(const std::vector<EstimationResult>& results) {
  if (results.empty()) throw validation_error("comparison: no results supplied");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < results.size(); ++i) {
    names.push_back(results[i].spec.name.empty() ? "model_" + std::to_string(i + 1)
                                                 : results[i].spec.name);
  }
  std::vector<FitStatistics> stats;
  stats.reserve(results.size());
  for (const EstimationResult& r : results) stats.push_back(fit_statistics(r));

  const std::size_t label_w = 22;
  std::vector<std::size_t> col_w(results.size());
  std::vector<std::vector<std::string>> cells;  // per statistic row
  auto add_row = [&](const std::string& label,
                     const std::function<std::string(std::size_t)>& value) {
    std::vector<std::string> row;
    row.push_back(label);
    for (std::size_t i = 0; i < results.size(); ++i) row.push_back(value(i));
    cells.push_back(std::move(row));
  };
  add_row("Model", [&](std::size_t i) { return names[i]; });
  add_row("Events", [&](std::size_t i) { return std::to_string(results[i].n_obs); });
  add_row("Parameters", [&](std::size_t i) { return std::to_string(results[i].n_params); });
  add_row("LL (constants)", [&](std::size_t i) { return format_stat(results[i].loglik_constants); });
  add_row("LL (convergence)", [&](std::size_t i) { return format_stat(results[i].loglik); });
  add_row("McFadden pseudo R2",
          [&](std::size_t i) { return format_fixed(stats[i].mcfadden_r2, 4); });
  add_row("AIC", [&](std::size_t i) { return format_stat(stats[i].aic); });
  add_row("BIC", [&](std::size_t i) { return format_stat(stats[i].bic); });
  add_row("Converged", [&](std::size_t i) { return results[i].converged ? "yes" : "NO"; });

  for (const auto& row : cells) {
    for (std::size_t i = 1; i < row.size(); ++i) {
      col_w[i - 1] = std::max(col_w[i - 1], row[i].size() + 2);
    }
  }
  std::size_t total_w = label_w;
  for (std::size_t w : col_w) total_w += w;

  std::ostringstream os;
  os << std::string(total_w, '=') << '\n';
  for (const auto& row : cells) {
    os << std::left << std::setw(static_cast<int>(label_w)) << row[0] << std::right;
    for (std::size_t i = 1; i < row.size(); ++i) {
      os << std::setw(static_cast<int>(col_w[i - 1])) << row[i];
    }
    os << '\n';
  }
  os << std::string(total_w, '-') << '\n';
  os << "Likelihood-ratio tests (restricted vs unrestricted)\n";
  bool any = false;
  for (std::size_t a = 0; a < results.size(); ++a) {
    for (std::size_t b = 0; b < results.size(); ++b) {
      if (a == b) continue;
      const std::set<std::string> sub(results[a].packing.names.begin(),
                                      results[a].packing.names.end());
      const std::set<std::string> super(results[b].packing.names.begin(),
                                        results[b].packing.names.end());
      if (!std::includes(super.begin(), super.end(), sub.begin(), sub.end())) continue;
      if (a > b && sub.size() == super.size()) continue;  // identical specs: report once
      any = true;
      os << "  " << names[a] << " in " << names[b] << ": ";
      if (results[a].n_obs != results[b].n_obs) {
        os << "not applicable (samples differ: " << results[a].n_obs << " vs "
           << results[b].n_obs << " events)\n";
        continue;
      }
      const double lr = 2.0 * (results[b].loglik - results[a].loglik);
      const std::size_t df = results[b].n_params - results[a].n_params;
      os << "LR = " << format_stat(lr) << ", df = " << df << '\n';
    }
  }
  if (!any) os << "  (no nested pairs)\n";
  os << std::string(total_w, '=') << '\n';
  return os.str();
}

}  // namespace voltsev
