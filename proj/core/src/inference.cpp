#include "voltsev/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"

namespace voltsev {

namespace {

// Everything a variable touches in the compiled design: term columns plus any
// het-mean/het-var slots, so a dummy flip re-realizes coefficients correctly.
struct VariableRoles {
  std::vector<std::size_t> terms;                          // term indices using it as x
  std::vector<std::pair<std::size_t, std::size_t>> z_slots;  // (random ordinal, column)
  std::vector<std::pair<std::size_t, std::size_t>> b_slots;
};

VariableRoles roles_of(const ModelSpec& spec, const ParameterPacking& pk,
                       const std::string& variable) {
  VariableRoles roles;
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    if (spec.terms[j].variable == variable) roles.terms.push_back(j);
  }
  for (std::size_t q = 0; q < pk.random_terms.size(); ++q) {
    const Term& t = spec.terms[pk.random_terms[q]];
    for (std::size_t m = 0; m < t.het_mean.size(); ++m) {
      if (t.het_mean[m] == variable) roles.z_slots.emplace_back(q, m);
    }
    for (std::size_t m = 0; m < t.het_var.size(); ++m) {
      if (t.het_var[m] == variable) roles.b_slots.emplace_back(q, m);
    }
  }
  return roles;
}

struct EventEvaluator {
  const ModelSpec& spec;
  const ParameterPacking& pk;
  const PreparedSample& sample;
  const Eigen::VectorXd& theta;
  const RealizedDraws* draws;

  std::size_t n_draws() const { return draws && draws->n_random > 0 ? draws->n_draws : 1; }

  // Per-term effective coefficients for one event/draw, with an optional
  // override of one variable's value (affects het dot products here; the x
  // override is applied by the caller in the utility step).
  void effective_betas(std::size_t event, std::size_t r, const VariableRoles* roles,
                       double override_value, std::vector<double>& beta_out) const {
    const auto row = static_cast<Eigen::Index>(event);
    beta_out.resize(spec.terms.size());
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
      beta_out[j] = theta[static_cast<Eigen::Index>(pk.beta_index(j))];
    }
    for (std::size_t q = 0; q < pk.random_terms.size(); ++q) {
      const std::size_t j = pk.random_terms[q];
      double dot_z = 0.0;
      for (Eigen::Index m = 0; m < sample.z[q].cols(); ++m) {
        double zv = sample.z[q](row, m);
        if (roles) {
          for (const auto& [rq, rm] : roles->z_slots) {
            if (rq == q && static_cast<Eigen::Index>(rm) == m) zv = override_value;
          }
        }
        dot_z += theta[static_cast<Eigen::Index>(pk.xi_index(q, static_cast<std::size_t>(m)))] * zv;
      }
      double dot_b = 0.0;
      for (Eigen::Index m = 0; m < sample.b[q].cols(); ++m) {
        double bv = sample.b[q](row, m);
        if (roles) {
          for (const auto& [rq, rm] : roles->b_slots) {
            if (rq == q && static_cast<Eigen::Index>(rm) == m) bv = override_value;
          }
        }
        dot_b += theta[static_cast<Eigen::Index>(pk.gamma_index(q, static_cast<std::size_t>(m)))] *
                 bv;
      }
      const double sigma = theta[static_cast<Eigen::Index>(pk.sigma_index(q))];
      const double v = draws && draws->n_random > 0 ? (*draws)(event, r, q) : 0.0;
      beta_out[j] += dot_z + sigma * std::exp(dot_b) * v;
    }
  }

  Eigen::Vector4d probs(std::size_t event, const std::vector<double>& beta_eff,
                        const VariableRoles* roles, double override_value) const {
    const auto row = static_cast<Eigen::Index>(event);
    Eigen::Vector4d u = Eigen::Vector4d::Zero();
    if (pk.n_constants > 0) {
      for (int k = 1; k < kOutcomeCount; ++k) {
        u[k] = theta[static_cast<Eigen::Index>(pk.const_index(static_cast<Severity>(k)))];
      }
    }
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
      double xv = sample.x(row, static_cast<Eigen::Index>(j));
      if (roles && std::find(roles->terms.begin(), roles->terms.end(), j) != roles->terms.end()) {
        xv = override_value;
      }
      u[static_cast<int>(spec.terms[j].outcome)] += beta_eff[j] * xv;
    }
    return probabilities(u);
  }

  // Draw-averaged probability vector with one variable overridden.
  Eigen::Vector4d averaged_prob(std::size_t event, const VariableRoles& roles,
                                double override_value) const {
    const std::size_t R = n_draws();
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    std::vector<double> beta_eff;
    for (std::size_t r = 0; r < R; ++r) {
      effective_betas(event, r, &roles, override_value, beta_eff);
      acc += probs(event, beta_eff, &roles, override_value);
    }
    return acc / static_cast<double>(R);
  }

  // Draw-averaged analytic derivative of every P[k] w.r.t. the variable.
  Eigen::Vector4d averaged_derivative(std::size_t event, const VariableRoles& roles) const {
    const std::size_t R = n_draws();
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    std::vector<double> beta_eff;
    for (std::size_t r = 0; r < R; ++r) {
      effective_betas(event, r, nullptr, 0.0, beta_eff);
      const Eigen::Vector4d prob = probs(event, beta_eff, nullptr, 0.0);
      Eigen::Vector4d coef = Eigen::Vector4d::Zero();  // total coefficient of the variable per outcome
      for (std::size_t j : roles.terms) {
        coef[static_cast<int>(spec.terms[j].outcome)] += beta_eff[j];
      }
      const double avg = prob.dot(coef);
      for (int k = 0; k < kOutcomeCount; ++k) acc[k] += prob[k] * (coef[k] - avg);
    }
    return acc / static_cast<double>(R);
  }
};

bool is_dummy_column(const PreparedSample& sample, std::size_t term) {
  const auto col = static_cast<Eigen::Index>(term);
  for (Eigen::Index i = 0; i < sample.x.rows(); ++i) {
    const double v = sample.x(i, col);
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

// A variable's sample column is everywhere 0/1 regardless of the role it
// plays (term x, het-mean Z, or het-var B slots all carry the same values).
bool is_dummy_variable(const PreparedSample& sample, const VariableRoles& roles) {
  if (!roles.terms.empty()) return is_dummy_column(sample, roles.terms.front());
  auto all_binary = [](const Eigen::MatrixXd& m, Eigen::Index col) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, col);
      if (v != 0.0 && v != 1.0) return false;
    }
    return true;
  };
  for (const auto& [q, m] : roles.z_slots) {
    return all_binary(sample.z[q], static_cast<Eigen::Index>(m));
  }
  for (const auto& [q, m] : roles.b_slots) {
    return all_binary(sample.b[q], static_cast<Eigen::Index>(m));
  }
  return false;
}

void check_draws(const EstimationResult& result, const PreparedSample& sample,
                 const RealizedDraws* draws, const char* who) {
  if (!result.spec.has_random()) return;
  if (!draws || draws->n_obs < sample.n_events()) {
    throw validation_error(std::string(who) + ": random spec requires the fit's draw tensor");
  }
}

}  // namespace

std::vector<std::array<double, kOutcomeCount>> per_event_effects(
    const EstimationResult& result, const PreparedSample& sample, const RealizedDraws* draws,
    const std::string& variable, bool unit_difference) {
  check_draws(result, sample, draws, "per_event_effects");
  const ModelSpec& spec = result.spec;
  const ParameterPacking& pk = result.packing;
  const VariableRoles roles = roles_of(spec, pk, variable);
  if (roles.terms.empty() && roles.z_slots.empty() && roles.b_slots.empty()) {
    throw validation_error("per_event_effects: variable '" + variable + "' not in the model");
  }
  EventEvaluator ev{spec, pk, sample, result.theta, draws};
  const bool dummy = is_dummy_variable(sample, roles);
  const std::size_t n = sample.n_events();
  std::vector<std::array<double, kOutcomeCount>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector4d effect;
    if (dummy) {
      effect = ev.averaged_prob(i, roles, 1.0) - ev.averaged_prob(i, roles, 0.0);
    } else if (unit_difference) {
      const double x0 = roles.terms.empty()
                            ? 0.0
                            : sample.x(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(roles.terms.front()));
      effect = ev.averaged_prob(i, roles, x0 + 1.0) - ev.averaged_prob(i, roles, x0);
    } else {
      effect = ev.averaged_derivative(i, roles);
    }
    for (int k = 0; k < kOutcomeCount; ++k) out[i][static_cast<std::size_t>(k)] = effect[k];
  }
  return out;
}

MarginalEffectsTable marginal_effects(const EstimationResult& result,
                                      const PreparedSample& sample, const RealizedDraws* draws,
                                      bool unit_difference) {
  check_draws(result, sample, draws, "marginal_effects");
  const ModelSpec& spec = result.spec;
  const ParameterPacking& pk = result.packing;
  EventEvaluator ev{spec, pk, sample, result.theta, draws};
  const std::size_t n = sample.n_events();

  MarginalEffectsTable table;
  table.n_events = n;
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    const Term& term = spec.terms[j];
    const VariableRoles roles = roles_of(spec, pk, term.variable);
    const bool dummy = is_dummy_column(sample, j);
    const int outcome = static_cast<int>(term.outcome);

    std::vector<double> effects(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (dummy) {
        effects[i] =
            (ev.averaged_prob(i, roles, 1.0) - ev.averaged_prob(i, roles, 0.0))[outcome];
      } else if (unit_difference) {
        const double x0 = sample.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        effects[i] =
            (ev.averaged_prob(i, roles, x0 + 1.0) - ev.averaged_prob(i, roles, x0))[outcome];
      } else {
        effects[i] = ev.averaged_derivative(i, roles)[outcome];
      }
    }

    MarginalEffectRow row;
    row.variable = term.variable;
    row.outcome = term.outcome;
    row.kind = dummy ? EffectKind::dummy : EffectKind::continuous;
    double sum = 0.0;
    row.min = effects.empty() ? 0.0 : effects[0];
    row.max = row.min;
    for (double e : effects) {
      sum += e;
      row.min = std::min(row.min, e);
      row.max = std::max(row.max, e);
    }
    row.mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    if (n > 1) {
      double ss = 0.0;
      for (double e : effects) ss += (e - row.mean) * (e - row.mean);
      row.sd = std::sqrt(ss / static_cast<double>(n - 1));
    } else {
      row.sd = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

MarginalEffectsTable marginal_effects(const EstimationResult& result, const EventDataset& data,
                                      bool unit_difference) {
  PreparedSample sample = prepare_sample(data, result.spec);
  if (!result.spec.has_random()) {
    return marginal_effects(result, sample, nullptr, unit_difference);
  }
  DrawTensor tensor = draws_for(result.spec, sample.n_events());
  RealizedDraws draws = realize_draws(tensor, result.spec);
  return marginal_effects(result, sample, &draws, unit_difference);
}

void write_marginal_effects_csv(std::ostream& out, const MarginalEffectsTable& table) {
  csv::write_row(out, {"variable", "outcome", "mean", "sd", "min", "max"});
  for (const MarginalEffectRow& row : table.rows) {
    csv::write_row(out, {row.variable, std::string(severity_name(row.outcome)),
                         csv::format_double(row.mean),
                         std::isfinite(row.sd) ? csv::format_double(row.sd) : std::string(),
                         csv::format_double(row.min), csv::format_double(row.max)});
  }
}

DirectionalShare directional_shares(double beta, double sigma) {
  if (!(sigma > 0.0)) throw validation_error("directional_shares: sigma must be > 0");
  DirectionalShare s;
  s.below = normal_cdf(-beta / sigma);
  s.above = 1.0 - s.below;
  return s;
}

std::vector<DirectionalShare> directional_shares(const EstimationResult& result) {
  std::vector<DirectionalShare> rows;
  const ParameterPacking& pk = result.packing;
  for (std::size_t q = 0; q < pk.random_terms.size(); ++q) {
    const Term& t = result.spec.terms[pk.random_terms[q]];
    if (t.distribution != MixingKind::normal) continue;
    const double beta =
        result.estimate[static_cast<Eigen::Index>(pk.beta_index(pk.random_terms[q]))];
    const double sigma = result.estimate[static_cast<Eigen::Index>(pk.sigma_index(q))];
    DirectionalShare s = directional_shares(beta, sigma);
    s.parameter = pk.names[pk.beta_index(pk.random_terms[q])];
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<DirectionalShare> event_conditioned_shares(const EstimationResult& result,
                                                       const PreparedSample& sample,
                                                       const RealizedDraws& draws) {
  const ModelSpec& spec = result.spec;
  const ParameterPacking& pk = result.packing;
  if (draws.n_obs < sample.n_events() || draws.n_random != pk.random_terms.size()) {
    throw validation_error("event_conditioned_shares: draw tensor does not match the sample");
  }
  EventEvaluator ev{spec, pk, sample, result.theta, &draws};
  std::vector<DirectionalShare> rows;
  const std::size_t n = sample.n_events();
  const std::size_t R = draws.n_draws;
  std::vector<double> beta_eff;
  for (std::size_t q = 0; q < pk.random_terms.size(); ++q) {
    const std::size_t j = pk.random_terms[q];
    double below_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t below = 0;
      for (std::size_t r = 0; r < R; ++r) {
        ev.effective_betas(i, r, nullptr, 0.0, beta_eff);
        if (beta_eff[j] < 0.0) ++below;
      }
      below_acc += static_cast<double>(below) / static_cast<double>(R);
    }
    DirectionalShare s;
    s.parameter = pk.names[pk.beta_index(j)];
    s.below = n > 0 ? below_acc / static_cast<double>(n) : 0.0;
    s.above = 1.0 - s.below;
    rows.push_back(std::move(s));
  }
  return rows;
}

void write_directional_shares_csv(std::ostream& out, const std::string& model,
                                  const std::vector<DirectionalShare>& shares) {
  csv::write_row(out, {"model", "parameter", "below_0", "above_0"});
  for (const DirectionalShare& s : shares) {
    csv::write_row(out, {model, s.parameter, csv::format_double(s.below),
                         csv::format_double(s.above)});
  }
}

double conditional_population_mean(double beta, const std::vector<double>& xi,
                                   const std::vector<double>& delta) {
  if (xi.size() != delta.size()) {
    throw validation_error("conditional_population_mean: xi and delta lengths differ");
  }
  double out = beta;
  for (std::size_t i = 0; i < xi.size(); ++i) out += delta[i] * xi[i];
  return out;
}

std::vector<VifRow> vif(const DataTable& table, const std::vector<std::string>& variables) {
  if (variables.size() < 2) throw validation_error("vif: need at least 2 variables");
  std::vector<std::size_t> cols;
  for (const std::string& v : variables) {
    auto idx = table.column_index(v);
    if (!idx) throw validation_error("vif: variable '" + v + "' not found");
    cols.push_back(*idx);
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    bool complete = true;
    for (std::size_t c : cols) {
      if (!table.cells[r][c]) {
        complete = false;
        break;
      }
    }
    if (complete) rows.push_back(r);
  }
  const std::size_t n = rows.size();
  if (n <= variables.size()) {
    throw validation_error("vif: need more complete rows than variables");
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          *table.cells[rows[i]][cols[c]];
    }
  }

  std::vector<VifRow> out;
  const auto v_count = static_cast<Eigen::Index>(cols.size());
  for (Eigen::Index j = 0; j < v_count; ++j) {
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), v_count);  // intercept + others
    design.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index k = 0; k < v_count; ++k) {
      if (k == j) continue;
      design.col(c++) = x.col(k);
    }
    const Eigen::VectorXd y = x.col(j);
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
    const double ss_res = (y - design * coef).squaredNorm();
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    VifRow row;
    row.variable = variables[static_cast<std::size_t>(j)];
    if (ss_tot <= 0.0) {
      row.infinite = true;
      row.vif = std::numeric_limits<double>::infinity();
    } else {
      const double r2 = 1.0 - ss_res / ss_tot;
      if (r2 >= 1.0 - 1e-12) {
        row.infinite = true;
        row.vif = std::numeric_limits<double>::infinity();
      } else {
        row.vif = 1.0 / (1.0 - r2);
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace voltsev
