#include "voltsev/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "voltsev/errors.hpp"
#include "voltsev/likelihood.hpp"
#include "voltsev/rng.hpp"

namespace voltsev {

namespace {

using nlohmann::json;

double generate_value(const CovariateGenerator& g, SplitMix64& stream) {
  switch (g.kind) {
    case CovariateGenerator::Kind::bernoulli:
      return stream.next_uniform() < g.a ? 1.0 : 0.0;
    case CovariateGenerator::Kind::uniform:
      return g.a + (g.b - g.a) * stream.next_uniform();
    case CovariateGenerator::Kind::normal:
      return g.a + g.b * inverse_normal_cdf(stream.next_uniform());
    case CovariateGenerator::Kind::fixed:
      return g.a;
  }
  throw std::logic_error("generate_value: unknown generator kind");
}

const char* generator_kind_name(CovariateGenerator::Kind kind) {
  switch (kind) {
    case CovariateGenerator::Kind::bernoulli: return "bernoulli";
    case CovariateGenerator::Kind::uniform: return "uniform";
    case CovariateGenerator::Kind::normal: return "normal";
    case CovariateGenerator::Kind::fixed: return "fixed";
  }
  return "fixed";
}

}  // namespace

void validate_truth(const GroundTruth& truth) {
  validate_spec(truth.spec);
  if (truth.n_events < 1) throw validation_error("truth: n_events must be >= 1");
  const ParameterPacking pk = make_packing(truth.spec);
  if (truth.theta.size() != pk.n_params) {
    throw validation_error("truth: theta has " + std::to_string(truth.theta.size()) +
                           " entries, packing needs " + std::to_string(pk.n_params));
  }
  std::set<std::string> names;
  for (const auto& [name, gen] : truth.covariates) {
    if (name.empty()) throw validation_error("truth: covariate with empty name");
    if (!names.insert(name).second) {
      throw validation_error("truth: duplicate covariate '" + name + "'");
    }
    switch (gen.kind) {
      case CovariateGenerator::Kind::bernoulli:
        if (!(gen.a >= 0.0 && gen.a <= 1.0)) {
          throw validation_error("truth: bernoulli p outside [0,1] for '" + name + "'");
        }
        break;
      case CovariateGenerator::Kind::uniform:
        if (!(gen.a <= gen.b)) {
          throw validation_error("truth: uniform bounds inverted for '" + name + "'");
        }
        break;
      case CovariateGenerator::Kind::normal:
        if (!(gen.b >= 0.0)) {
          throw validation_error("truth: normal sd negative for '" + name + "'");
        }
        break;
      case CovariateGenerator::Kind::fixed:
        break;
    }
  }
  for (const std::string& v : truth.spec.referenced_variables()) {
    if (!names.count(v)) {
      throw validation_error("truth: spec variable '" + v + "' has no covariate generator");
    }
  }
}

EventDataset simulate_events(const GroundTruth& truth) {
  validate_truth(truth);
  const ModelSpec& spec = truth.spec;
  const ParameterPacking pk = make_packing(spec);
  const std::vector<std::size_t> random_terms = pk.random_terms;

  EventDataset data;
  for (const auto& [name, gen] : truth.covariates) data.covariates.columns.push_back(name);
  auto col_of = [&](const std::string& v) {
    for (std::size_t c = 0; c < data.covariates.columns.size(); ++c) {
      if (data.covariates.columns[c] == v) return c;
    }
    throw validation_error("truth: missing covariate '" + v + "'");
  };
  std::vector<std::size_t> term_col(spec.terms.size());
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    term_col[j] = col_of(spec.terms[j].variable);
  }
  std::vector<std::vector<std::size_t>> z_col(random_terms.size()), b_col(random_terms.size());
  for (std::size_t q = 0; q < random_terms.size(); ++q) {
    for (const std::string& v : spec.terms[random_terms[q]].het_mean) z_col[q].push_back(col_of(v));
    for (const std::string& v : spec.terms[random_terms[q]].het_var) b_col[q].push_back(col_of(v));
  }

  std::vector<double> values(data.covariates.columns.size());
  std::vector<double> beta_eff(spec.terms.size());
  for (std::size_t i = 0; i < truth.n_events; ++i) {
    SplitMix64 stream(mix_seed(truth.seed, i));
    // draw order per event: covariates (declared order), one standardized
    // draw per random term, then the outcome uniform
    for (std::size_t c = 0; c < truth.covariates.size(); ++c) {
      values[c] = generate_value(truth.covariates[c].second, stream);
    }
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
      beta_eff[j] = truth.theta[pk.beta_index(j)];
    }
    for (std::size_t q = 0; q < random_terms.size(); ++q) {
      const std::size_t j = random_terms[q];
      const double v = transform_draw(stream.next_uniform(), spec.terms[j].distribution);
      double dot_z = 0.0;
      for (std::size_t m = 0; m < z_col[q].size(); ++m) {
        dot_z += truth.theta[pk.xi_index(q, m)] * values[z_col[q][m]];
      }
      double dot_b = 0.0;
      for (std::size_t m = 0; m < b_col[q].size(); ++m) {
        dot_b += truth.theta[pk.gamma_index(q, m)] * values[b_col[q][m]];
      }
      beta_eff[j] += dot_z + truth.theta[pk.sigma_index(q)] * std::exp(dot_b) * v;
    }
    Eigen::Vector4d u = Eigen::Vector4d::Zero();
    if (pk.n_constants > 0) {
      for (int k = 1; k < kOutcomeCount; ++k) {
        u[k] = truth.theta[pk.const_index(static_cast<Severity>(k))];
      }
    }
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
      u[static_cast<int>(spec.terms[j].outcome)] += beta_eff[j] * values[term_col[j]];
    }
    const Eigen::Vector4d prob = probabilities(u);
    const double pick = stream.next_uniform();
    double cum = 0.0;
    int outcome = kOutcomeCount - 1;
    for (int k = 0; k < kOutcomeCount; ++k) {
      cum += prob[k];
      if (pick < cum) {
        outcome = k;
        break;
      }
    }

    data.outcomes.push_back(static_cast<Severity>(outcome));
    data.covariates.event_ids.push_back("e" + std::to_string(i + 1));
    std::vector<std::optional<double>> row(values.size());
    for (std::size_t c = 0; c < values.size(); ++c) row[c] = values[c];
    data.covariates.cells.push_back(std::move(row));
  }
  return data;
}

std::string truth_to_json(const GroundTruth& truth) {
  const ParameterPacking pk = make_packing(truth.spec);
  json j;
  j["spec"] = json::parse(model_spec_to_json(truth.spec));
  j["parameter_names"] = pk.names;
  j["theta"] = truth.theta;
  json covs = json::array();
  for (const auto& [name, gen] : truth.covariates) {
    json g;
    g["name"] = name;
    g["kind"] = generator_kind_name(gen.kind);
    switch (gen.kind) {
      case CovariateGenerator::Kind::bernoulli:
        g["p"] = gen.a;
        break;
      case CovariateGenerator::Kind::uniform:
        g["low"] = gen.a;
        g["high"] = gen.b;
        break;
      case CovariateGenerator::Kind::normal:
        g["mean"] = gen.a;
        g["sd"] = gen.b;
        break;
      case CovariateGenerator::Kind::fixed:
        g["value"] = gen.a;
        break;
    }
    covs.push_back(g);
  }
  j["covariates"] = covs;
  j["n_events"] = truth.n_events;
  j["seed"] = truth.seed;
  return j.dump(2);
}

GroundTruth truth_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("truth JSON: ") + e.what());
  }
  GroundTruth truth;
  truth.spec = parse_model_spec(j.at("spec").dump());
  truth.theta = j.at("theta").get<std::vector<double>>();
  for (const json& g : j.value("covariates", json::array())) {
    CovariateGenerator gen;
    const std::string kind = g.at("kind").get<std::string>();
    if (kind == "bernoulli") {
      gen.kind = CovariateGenerator::Kind::bernoulli;
      gen.a = g.at("p").get<double>();
    } else if (kind == "uniform") {
      gen.kind = CovariateGenerator::Kind::uniform;
      gen.a = g.at("low").get<double>();
      gen.b = g.at("high").get<double>();
    } else if (kind == "normal") {
      gen.kind = CovariateGenerator::Kind::normal;
      gen.a = g.at("mean").get<double>();
      gen.b = g.at("sd").get<double>();
    } else if (kind == "fixed") {
      gen.kind = CovariateGenerator::Kind::fixed;
      gen.a = g.at("value").get<double>();
    } else {
      throw validation_error("truth JSON: unknown generator kind '" + kind + "'");
    }
    truth.covariates.emplace_back(g.at("name").get<std::string>(), gen);
  }
  truth.n_events = j.at("n_events").get<std::size_t>();
  truth.seed = j.value("seed", std::uint64_t{0});
  validate_truth(truth);
  return truth;
}

GroundTruth load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open truth file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return truth_from_json(buf.str());
}

std::vector<KinematicsTrace> simulate_traces(const std::vector<TraceProfile>& profiles,
                                             std::uint64_t seed) {
  std::vector<KinematicsTrace> traces;
  traces.reserve(profiles.size());
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    const TraceProfile& profile = profiles[p];
    std::vector<TraceSegment> segments = profile.segments;
    std::sort(segments.begin(), segments.end(),
              [](const TraceSegment& a, const TraceSegment& b) { return a.t_begin < b.t_begin; });
    for (const TraceSegment& s : segments) {
      if (!(s.t_begin < s.t_end)) {
        throw validation_error("trace profile '" + profile.event_id + "': empty segment");
      }
    }
    for (std::size_t i = 1; i < segments.size(); ++i) {
      if (segments[i].t_begin < segments[i - 1].t_end - 1e-9) {
        throw validation_error("trace profile '" + profile.event_id + "': overlapping segments");
      }
    }
    SplitMix64 stream(mix_seed(seed, p));
    KinematicsTrace trace;
    trace.event_id = profile.event_id;
    for (const TraceSegment& s : segments) {
      const auto first = static_cast<long long>(std::llround(s.t_begin * 10.0));
      const auto last = static_cast<long long>(std::llround(s.t_end * 10.0));
      for (long long i = first; i < last; ++i) {
        TraceSample sample;
        sample.t = static_cast<double>(i) / 10.0;
        sample.speed_kmh = s.speed_kmh;
        sample.accel_long = s.accel_long;
        sample.accel_lat = s.accel_lat;
        if (profile.noise_sd > 0.0) {
          sample.accel_long += profile.noise_sd * inverse_normal_cdf(stream.next_uniform());
          sample.accel_lat += profile.noise_sd * inverse_normal_cdf(stream.next_uniform());
        }
        trace.samples.push_back(sample);
      }
    }
    trace.raw_sample_count = trace.samples.size();
    traces.push_back(std::move(trace));
  }
  return traces;
}

std::vector<TraceProfile> profiles_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("profile JSON: ") + e.what());
  }
  if (!j.is_array()) throw validation_error("profile JSON: top level must be an array");
  std::vector<TraceProfile> profiles;
  for (const json& pj : j) {
    TraceProfile p;
    p.event_id = pj.at("event_id").get<std::string>();
    p.noise_sd = pj.value("noise_sd", 0.0);
    for (const json& sj : pj.at("segments")) {
      TraceSegment s;
      s.t_begin = sj.at("t_begin").get<double>();
      s.t_end = sj.at("t_end").get<double>();
      s.speed_kmh = sj.value("speed_kmh", 0.0);
      s.accel_long = sj.value("accel_long", 0.0);
      s.accel_lat = sj.value("accel_lat", 0.0);
      p.segments.push_back(s);
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<TraceProfile> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open profile file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return profiles_from_json(buf.str());
}

}  // namespace voltsev
