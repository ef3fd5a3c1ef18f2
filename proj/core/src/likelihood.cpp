#include "voltsev/likelihood.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "voltsev/errors.hpp"

namespace voltsev {

namespace {

// Per-event contributions are summed inside fixed blocks and the block
// partials reduced in index order, so the result does not depend on how many
// worker threads ran.
constexpr std::size_t kReduceBlock = 256;
constexpr double kProbFloor = 1e-300;

template <typename BlockFn>
void run_blocks(std::size_t n_items, int threads, BlockFn&& fn) {
  const std::size_t n_blocks = (n_items + kReduceBlock - 1) / kReduceBlock;
  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      fn(b, b * kReduceBlock, std::min(n_items, (b + 1) * kReduceBlock));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      fn(b, b * kReduceBlock, std::min(n_items, (b + 1) * kReduceBlock));
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

struct Partial {
  double ll = 0.0;
  Eigen::VectorXd grad;
};

double log_sum_exp(const Eigen::Vector4d& u) {
  const double m = u.maxCoeff();
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += std::exp(u[k] - m);
  return m + std::log(s);
}

}  // namespace

double PreparedSample::total_weight() const {
  double w = 0.0;
  for (double wi : weight) w += wi;
  return w;
}

PreparedSample prepare_sample(const EventDataset& data, const ModelSpec& spec) {
  validate_spec_columns(spec, data.covariates);
  const std::vector<std::size_t> random_terms = spec.random_term_indices();

  std::vector<std::size_t> term_cols(spec.terms.size());
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    term_cols[j] = *data.covariates.column_index(spec.terms[j].variable);
  }
  std::vector<std::vector<std::size_t>> z_cols(random_terms.size()), b_cols(random_terms.size());
  for (std::size_t q = 0; q < random_terms.size(); ++q) {
    const Term& t = spec.terms[random_terms[q]];
    for (const std::string& v : t.het_mean) z_cols[q].push_back(*data.covariates.column_index(v));
    for (const std::string& v : t.het_var) b_cols[q].push_back(*data.covariates.column_index(v));
  }
  std::optional<std::size_t> weight_col;
  if (!spec.weight_column.empty()) {
    weight_col = data.covariates.column_index(spec.weight_column);
  }

  std::vector<std::size_t> needed;  // all columns that must be non-missing
  needed.insert(needed.end(), term_cols.begin(), term_cols.end());
  for (const auto& cols : z_cols) needed.insert(needed.end(), cols.begin(), cols.end());
  for (const auto& cols : b_cols) needed.insert(needed.end(), cols.begin(), cols.end());
  if (weight_col) needed.push_back(*weight_col);
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<std::size_t> keep;
  keep.reserve(data.n_events());
  for (std::size_t r = 0; r < data.n_events(); ++r) {
    bool complete = true;
    for (std::size_t c : needed) {
      if (!data.covariates.cells[r][c]) {
        complete = false;
        break;
      }
    }
    if (complete) keep.push_back(r);
  }

  PreparedSample s;
  const std::size_t n = keep.size();
  s.dropped = data.n_events() - n;
  s.event_ids.reserve(n);
  s.chosen.reserve(n);
  s.weight.reserve(n);
  s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.terms.size()));
  s.z.resize(random_terms.size());
  s.b.resize(random_terms.size());
  for (std::size_t q = 0; q < random_terms.size(); ++q) {
    s.z[q].resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(z_cols[q].size()));
    s.b[q].resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b_cols[q].size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = keep[i];
    s.event_ids.push_back(data.covariates.event_ids[r]);
    s.chosen.push_back(static_cast<int>(data.outcomes[r]));
    ++s.outcome_counts[static_cast<std::size_t>(data.outcomes[r])];
    double w = 1.0;
    if (weight_col) {
      w = *data.covariates.cells[r][*weight_col];
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw validation_error("weight for event '" + data.covariates.event_ids[r] +
                               "' must be a positive finite number");
      }
    }
    s.weight.push_back(w);
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
      s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          *data.covariates.cells[r][term_cols[j]];
    }
    for (std::size_t q = 0; q < random_terms.size(); ++q) {
      for (std::size_t m = 0; m < z_cols[q].size(); ++m) {
        s.z[q](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
            *data.covariates.cells[r][z_cols[q][m]];
      }
      for (std::size_t m = 0; m < b_cols[q].size(); ++m) {
        s.b[q](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
            *data.covariates.cells[r][b_cols[q][m]];
      }
    }
  }
  return s;
}

Eigen::Vector4d probabilities(const Eigen::Vector4d& utilities) {
  const double m = utilities.maxCoeff();
  Eigen::Vector4d e;
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    e[k] = std::exp(utilities[k] - m);
    sum += e[k];
  }
  return e / sum;
}

Eigen::Vector4d utilities_for(const PreparedSample& sample, const ModelSpec& spec,
                              const ParameterPacking& packing, const Eigen::VectorXd& theta,
                              const std::vector<double>& beta_effective, std::size_t event) {
  Eigen::Vector4d u = Eigen::Vector4d::Zero();
  if (packing.n_constants > 0) {
    for (int k = 1; k < kOutcomeCount; ++k) {
      u[k] = theta[static_cast<Eigen::Index>(packing.const_index(static_cast<Severity>(k)))];
    }
  }
  const auto row = static_cast<Eigen::Index>(event);
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    u[static_cast<int>(spec.terms[j].outcome)] +=
        beta_effective[j] * sample.x(row, static_cast<Eigen::Index>(j));
  }
  return u;
}

double loglik_fixed(const PreparedSample& sample, const ModelSpec& spec,
                    const ParameterPacking& packing, const Eigen::VectorXd& theta,
                    Eigen::VectorXd* grad, int threads) {
  if (!theta.allFinite()) throw std::invalid_argument("loglik_fixed: non-finite parameters");
  const std::size_t n = sample.n_events();
  const std::size_t p = packing.n_params;
  const std::size_t n_blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<Partial> partials(n_blocks);

  std::vector<int> term_outcome(spec.terms.size());
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    term_outcome[j] = static_cast<int>(spec.terms[j].outcome);
  }

  run_blocks(n, threads, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Partial& part = partials[block];
    if (grad) part.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    std::vector<double> beta_eff(spec.terms.size());
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        beta_eff[j] = theta[static_cast<Eigen::Index>(packing.beta_index(j))];
      }
      const Eigen::Vector4d u = utilities_for(sample, spec, packing, theta, beta_eff, i);
      const double lse = log_sum_exp(u);
      const int y = sample.chosen[i];
      const double w = sample.weight[i];
      part.ll += w * (u[y] - lse);
      if (!grad) continue;
      const Eigen::Vector4d prob = probabilities(u);
      if (packing.n_constants > 0) {
        for (int k = 1; k < kOutcomeCount; ++k) {
          part.grad[static_cast<Eigen::Index>(k - 1)] += w * ((k == y ? 1.0 : 0.0) - prob[k]);
        }
      }
      for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        const int o = term_outcome[j];
        part.grad[static_cast<Eigen::Index>(packing.beta_index(j))] +=
            w * sample.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
            ((o == y ? 1.0 : 0.0) - prob[o]);
      }
    }
  });

  double ll = 0.0;
  if (grad) *grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (const Partial& part : partials) {
    ll += part.ll;
    if (grad) *grad += part.grad;
  }
  return ll;
}

DrawTensor draws_for(const ModelSpec& spec, std::size_t n_obs) {
  DrawConfig config;
  config.n_obs = n_obs;
  config.n_draws = spec.options.draws;
  config.primes = first_primes(spec.random_term_indices().size());
  config.discard = spec.options.discard;
  config.scramble = spec.options.scramble;
  config.seed = spec.options.seed;
  return build_draws(config);
}

RealizedDraws realize_draws(const DrawTensor& tensor, const ModelSpec& spec) {
  const std::vector<std::size_t> random_terms = spec.random_term_indices();
  if (tensor.n_params() != random_terms.size()) {
    throw std::invalid_argument("realize_draws: tensor width differs from random-term count");
  }
  RealizedDraws out;
  out.n_obs = tensor.n_obs();
  out.n_draws = tensor.n_draws();
  out.n_random = random_terms.size();
  out.v.resize(out.n_obs * out.n_draws * out.n_random);
  for (std::size_t n = 0; n < out.n_obs; ++n) {
    for (std::size_t r = 0; r < out.n_draws; ++r) {
      for (std::size_t q = 0; q < out.n_random; ++q) {
        out.v[(n * out.n_draws + r) * out.n_random + q] =
            transform_draw(tensor(n, r, q), spec.terms[random_terms[q]].distribution);
      }
    }
  }
  return out;
}

double simulated_loglik(const PreparedSample& sample, const ModelSpec& spec,
                        const ParameterPacking& packing, const Eigen::VectorXd& theta,
                        const RealizedDraws& draws, Eigen::VectorXd* grad, int threads) {
  if (!theta.allFinite()) throw std::invalid_argument("simulated_loglik: non-finite parameters");
  if (draws.n_draws == 0) throw std::invalid_argument("simulated_loglik: zero draws");
  const std::size_t n = sample.n_events();
  if (draws.n_obs < n) throw std::invalid_argument("simulated_loglik: draw tensor too small");
  const std::size_t p = packing.n_params;
  const std::size_t R = draws.n_draws;
  const std::vector<std::size_t>& random_terms = packing.random_terms;
  const std::size_t n_random = random_terms.size();
  if (draws.n_random != n_random) {
    throw std::invalid_argument("simulated_loglik: draw width differs from random-term count");
  }

  std::vector<int> term_outcome(spec.terms.size());
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    term_outcome[j] = static_cast<int>(spec.terms[j].outcome);
  }

  const std::size_t n_blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<Partial> partials(n_blocks);

  run_blocks(n, threads, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Partial& part = partials[block];
    if (grad) part.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    std::vector<double> beta_eff(spec.terms.size());
    std::vector<double> xz(n_random), egb(n_random), sigma(n_random);
    Eigen::VectorXd g_event;  // sum_r P_nr(y) * score_nr
    if (grad) g_event.resize(static_cast<Eigen::Index>(p));

    for (std::size_t i = begin; i < end; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const int y = sample.chosen[i];
      const double w = sample.weight[i];
      for (std::size_t q = 0; q < n_random; ++q) {
        double dot_z = 0.0;
        for (Eigen::Index m = 0; m < sample.z[q].cols(); ++m) {
          dot_z += theta[static_cast<Eigen::Index>(
                       packing.xi_index(q, static_cast<std::size_t>(m)))] *
                   sample.z[q](row, m);
        }
        xz[q] = dot_z;
        double dot_b = 0.0;
        for (Eigen::Index m = 0; m < sample.b[q].cols(); ++m) {
          dot_b += theta[static_cast<Eigen::Index>(
                       packing.gamma_index(q, static_cast<std::size_t>(m)))] *
                   sample.b[q](row, m);
        }
        egb[q] = std::exp(dot_b);
        sigma[q] = theta[static_cast<Eigen::Index>(packing.sigma_index(q))];
      }
      for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        beta_eff[j] = theta[static_cast<Eigen::Index>(packing.beta_index(j))];
      }

      double like_sum = 0.0;  // sum_r P_nr(y)
      if (grad) g_event.setZero();
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t q = 0; q < n_random; ++q) {
          const std::size_t j = random_terms[q];
          beta_eff[j] = theta[static_cast<Eigen::Index>(packing.beta_index(j))] + xz[q] +
                        sigma[q] * egb[q] * draws(i, r, q);
        }
        const Eigen::Vector4d u = utilities_for(sample, spec, packing, theta, beta_eff, i);
        const Eigen::Vector4d prob = probabilities(u);
        const double p_y = std::max(prob[y], kProbFloor);
        like_sum += p_y;
        if (!grad) continue;
        if (packing.n_constants > 0) {
          for (int k = 1; k < kOutcomeCount; ++k) {
            g_event[static_cast<Eigen::Index>(k - 1)] +=
                p_y * ((k == y ? 1.0 : 0.0) - prob[k]);
          }
        }
        for (std::size_t j = 0; j < spec.terms.size(); ++j) {
          const int o = term_outcome[j];
          const double score_beta = sample.x(row, static_cast<Eigen::Index>(j)) *
                                    ((o == y ? 1.0 : 0.0) - prob[o]);
          g_event[static_cast<Eigen::Index>(packing.beta_index(j))] += p_y * score_beta;
        }
        for (std::size_t q = 0; q < n_random; ++q) {
          const std::size_t j = random_terms[q];
          const int o = term_outcome[j];
          const double score_beta = sample.x(row, static_cast<Eigen::Index>(j)) *
                                    ((o == y ? 1.0 : 0.0) - prob[o]);
          const double v = draws(i, r, q);
          g_event[static_cast<Eigen::Index>(packing.sigma_index(q))] +=
              p_y * score_beta * egb[q] * v;
          for (Eigen::Index m = 0; m < sample.z[q].cols(); ++m) {
            g_event[static_cast<Eigen::Index>(
                packing.xi_index(q, static_cast<std::size_t>(m)))] +=
                p_y * score_beta * sample.z[q](row, m);
          }
          for (Eigen::Index m = 0; m < sample.b[q].cols(); ++m) {
            g_event[static_cast<Eigen::Index>(
                packing.gamma_index(q, static_cast<std::size_t>(m)))] +=
                p_y * score_beta * sigma[q] * sample.b[q](row, m) * egb[q] * v;
          }
        }
      }
      part.ll += w * std::log(like_sum / static_cast<double>(R));
      if (grad) part.grad += (w / like_sum) * g_event;
    }
  });

  double ll = 0.0;
  if (grad) *grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (const Partial& part : partials) {
    ll += part.ll;
    if (grad) *grad += part.grad;
  }
  return ll;
}

}  // namespace voltsev
