#include "voltsev/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "voltsev/csv.hpp"
#include "voltsev/errors.hpp"

namespace voltsev {

namespace {

constexpr std::string_view kSeverityNames[] = {"tire_strike", "minor_crash", "police_reportable",
                                               "most_severe"};
constexpr std::string_view kSeverityCodes[] = {"TS", "MC", "PRC", "SC"};

}  // namespace

std::string_view severity_name(Severity s) { return kSeverityNames[static_cast<int>(s)]; }

std::string_view severity_code(Severity s) { return kSeverityCodes[static_cast<int>(s)]; }

std::optional<Severity> parse_severity(std::string_view text) {
  for (int i = 0; i < kOutcomeCount; ++i) {
    if (text == kSeverityNames[i] || text == kSeverityCodes[i]) {
      return static_cast<Severity>(i);
    }
  }
  if (text.size() == 1 && text[0] >= '0' && text[0] <= '3') {
    return static_cast<Severity>(text[0] - '0');
  }
  return std::nullopt;
}

bool ModelSpec::has_random() const {
  return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.random; });
}

std::vector<std::size_t> ModelSpec::random_term_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].random) idx.push_back(i);
  }
  return idx;
}

std::vector<std::string> ModelSpec::referenced_variables() const {
  std::vector<std::string> vars;
  auto add = [&](const std::string& v) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  };
  for (const Term& t : terms) {
    add(t.variable);
    for (const std::string& z : t.het_mean) add(z);
    for (const std::string& b : t.het_var) add(b);
  }
  return vars;
}

void validate_spec(const ModelSpec& spec) {
  std::set<std::pair<std::string, int>> seen;
  for (const Term& t : spec.terms) {
    if (t.variable.empty()) throw validation_error("spec: term with empty variable name");
    if (t.outcome == kBaseOutcome) {
      throw validation_error("spec: term '" + t.variable +
                             "' targets the base outcome; base utility is fixed at 0");
    }
    if (!seen.insert({t.variable, static_cast<int>(t.outcome)}).second) {
      throw validation_error("spec: duplicate term (" + t.variable + ", " +
                             std::string(severity_name(t.outcome)) + ")");
    }
    if (!t.random && (!t.het_mean.empty() || !t.het_var.empty())) {
      throw validation_error("spec: fixed term '" + t.variable +
                             "' cannot carry het_mean/het_var lists");
    }
    for (const auto* list : {&t.het_mean, &t.het_var}) {
      std::set<std::string> uniq(list->begin(), list->end());
      if (uniq.size() != list->size()) {
        throw validation_error("spec: duplicate heterogeneity variable on term '" + t.variable +
                               "'");
      }
    }
  }
  if (spec.outcome_column.empty()) throw validation_error("spec: outcome column name is empty");
  if (spec.options.draws < 1) throw validation_error("spec: options.draws must be >= 1");
  if (!(spec.options.gradient_tolerance > 0.0) || !(spec.options.step_tolerance > 0.0)) {
    throw validation_error("spec: tolerances must be > 0");
  }
  if (spec.options.max_iterations < 1) {
    throw validation_error("spec: max_iterations must be >= 1");
  }
}

void validate_spec_columns(const ModelSpec& spec, const DataTable& covariates) {
  validate_spec(spec);
  for (const std::string& v : spec.referenced_variables()) {
    if (!covariates.column_index(v)) {
      throw validation_error("spec: variable '" + v + "' not found in dataset columns");
    }
  }
  if (!spec.weight_column.empty() && !covariates.column_index(spec.weight_column)) {
    throw validation_error("spec: weight column '" + spec.weight_column + "' not found");
  }
}

ModelSpec fixed_counterpart(const ModelSpec& spec) {
  ModelSpec fixed = spec;
  for (Term& t : fixed.terms) {
    t.random = false;
    t.het_mean.clear();
    t.het_var.clear();
  }
  return fixed;
}

std::size_t ParameterPacking::const_index(Severity outcome) const {
  if (n_constants == 0) throw std::logic_error("packing: spec has no constants");
  if (outcome == kBaseOutcome) throw std::logic_error("packing: base outcome has no constant");
  return static_cast<std::size_t>(static_cast<int>(outcome) - 1);
}

ParamKind ParameterPacking::kind(std::size_t index) const {
  if (index < n_constants) return ParamKind::constant;
  if (index < n_constants + n_terms) return ParamKind::beta;
  if (index < sigma_offset + random_terms.size()) return ParamKind::sigma;
  for (std::size_t q = 0; q < random_terms.size(); ++q) {
    if (index >= xi_offsets[q] && index < xi_offsets[q] + xi_counts[q]) return ParamKind::xi;
  }
  return ParamKind::gamma;
}

ParameterPacking make_packing(const ModelSpec& spec) {
  ParameterPacking pk;
  pk.n_constants = spec.constants ? static_cast<std::size_t>(kOutcomeCount - 1) : 0;
  pk.n_terms = spec.terms.size();
  pk.random_terms = spec.random_term_indices();
  pk.sigma_offset = pk.n_constants + pk.n_terms;

  if (spec.constants) {
    for (int k = 1; k < kOutcomeCount; ++k) {
      pk.names.push_back("const[" + std::string(kSeverityCodes[k]) + "]");
    }
  }
  for (const Term& t : spec.terms) {
    pk.names.push_back(t.variable + "[" + std::string(severity_code(t.outcome)) + "]");
  }
  for (std::size_t idx : pk.random_terms) {
    const Term& t = spec.terms[idx];
    pk.names.push_back("sd:" + t.variable + "[" + std::string(severity_code(t.outcome)) + "]");
  }
  std::size_t cursor = pk.sigma_offset + pk.random_terms.size();
  for (std::size_t idx : pk.random_terms) {
    const Term& t = spec.terms[idx];
    pk.xi_offsets.push_back(cursor);
    pk.xi_counts.push_back(t.het_mean.size());
    for (const std::string& z : t.het_mean) {
      pk.names.push_back("hetmean:" + t.variable + "[" + std::string(severity_code(t.outcome)) +
                         "]:" + z);
    }
    cursor += t.het_mean.size();
  }
  for (std::size_t idx : pk.random_terms) {
    const Term& t = spec.terms[idx];
    pk.gamma_offsets.push_back(cursor);
    pk.gamma_counts.push_back(t.het_var.size());
    for (const std::string& b : t.het_var) {
      pk.names.push_back("hetvar:" + t.variable + "[" + std::string(severity_code(t.outcome)) +
                         "]:" + b);
    }
    cursor += t.het_var.size();
  }
  pk.n_params = cursor;
  return pk;
}

EventDataset read_events_csv(std::istream& in, const std::string& outcome_column) {
  std::string line;
  if (!std::getline(in, line)) throw validation_error("event CSV: empty input, header required");
  std::vector<std::string> header = csv::split_line(line);
  for (auto& h : header) h = std::string(csv::trim(h));
  if (header.empty() || header[0] != "event_id") {
    throw validation_error("event CSV: first header column must be 'event_id'");
  }
  std::size_t outcome_col = 0;
  bool found = false;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] == outcome_column) {
      outcome_col = i;
      found = true;
      break;
    }
  }
  if (!found) {
    throw validation_error("event CSV: outcome column '" + outcome_column + "' not found");
  }

  EventDataset data;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (i == outcome_col) continue;
    if (header[i].empty()) throw validation_error("event CSV: empty column name in header");
    if (data.covariates.column_index(header[i])) {
      throw validation_error("event CSV: duplicate column '" + header[i] + "'");
    }
    data.covariates.columns.push_back(header[i]);
  }

  std::set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    std::vector<std::string> fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw validation_error("event CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    std::string id(csv::trim(fields[0]));
    if (id.empty() || !seen_ids.insert(id).second) {
      throw validation_error("event CSV line " + std::to_string(line_no) +
                             ": empty or duplicate event_id");
    }
    std::optional<Severity> outcome = parse_severity(csv::trim(fields[outcome_col]));
    if (!outcome) {
      throw validation_error("event CSV line " + std::to_string(line_no) +
                             ": unrecognized severity '" +
                             std::string(csv::trim(fields[outcome_col])) + "'");
    }
    std::vector<std::optional<double>> row;
    row.reserve(data.covariates.columns.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (i == outcome_col) continue;
      std::string_view field = csv::trim(fields[i]);
      if (field.empty()) {
        row.emplace_back();
        continue;
      }
      std::optional<double> v = csv::parse_double(field);
      if (!v || !std::isfinite(*v)) {
        throw validation_error("event CSV line " + std::to_string(line_no) +
                               ": not a finite number: '" + std::string(field) + "'");
      }
      row.emplace_back(*v);
    }
    data.outcomes.push_back(*outcome);
    data.covariates.event_ids.push_back(std::move(id));
    data.covariates.cells.push_back(std::move(row));
  }
  return data;
}

EventDataset read_events_csv_file(const std::string& path, const std::string& outcome_column) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open event file: " + path);
  return read_events_csv(in, outcome_column);
}

void write_events_csv(std::ostream& out, const EventDataset& data,
                      const std::string& outcome_column) {
  std::vector<std::string> header{"event_id", outcome_column};
  for (const std::string& c : data.covariates.columns) header.push_back(c);
  csv::write_row(out, header);
  std::vector<std::string> fields(header.size());
  for (std::size_t r = 0; r < data.n_events(); ++r) {
    fields[0] = data.covariates.event_ids[r];
    fields[1] = std::string(severity_name(data.outcomes[r]));
    for (std::size_t c = 0; c < data.covariates.n_cols(); ++c) {
      const auto& cell = data.covariates.cells[r][c];
      fields[c + 2] = cell ? csv::format_double(*cell) : std::string();
    }
    csv::write_row(out, fields);
  }
}

EventDataset join_features(const EventDataset& events, const DataTable& features) {
  DataTable joined = inner_join(events.covariates, features);
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t r = 0; r < events.covariates.n_rows(); ++r) {
    pos.emplace(events.covariates.event_ids[r], r);
  }
  EventDataset out;
  out.covariates = std::move(joined);
  out.outcomes.reserve(out.covariates.n_rows());
  for (const std::string& id : out.covariates.event_ids) {
    out.outcomes.push_back(events.outcomes[pos.at(id)]);
  }
  return out;
}

namespace {

using nlohmann::json;

Severity severity_from_json(const json& j, const char* where) {
  if (j.is_number_integer()) {
    const int v = j.get<int>();
    if (v >= 0 && v < kOutcomeCount) return static_cast<Severity>(v);
  } else if (j.is_string()) {
    if (auto s = parse_severity(j.get<std::string>())) return *s;
  }
  throw validation_error(std::string("spec JSON: bad severity in ") + where);
}

}  // namespace

ModelSpec parse_model_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("spec JSON: ") + e.what());
  }
  if (!j.is_object()) throw validation_error("spec JSON: top level must be an object");

  ModelSpec spec;
  spec.name = j.value("name", std::string());
  spec.constants = j.value("constants", true);

  if (j.contains("outcomes")) {
    const json& outs = j.at("outcomes");
    if (!outs.is_array() || outs.size() != kOutcomeCount) {
      throw validation_error("spec JSON: 'outcomes' must list exactly 4 levels");
    }
    std::set<int> seen;
    int base_count = 0;
    for (const json& o : outs) {
      Severity s;
      bool base = false;
      if (o.is_object()) {
        s = severity_from_json(o.at("name"), "outcomes");
        base = o.value("base", false);
      } else {
        s = severity_from_json(o, "outcomes");
      }
      if (!seen.insert(static_cast<int>(s)).second) {
        throw validation_error("spec JSON: duplicate outcome level");
      }
      if (base) {
        ++base_count;
        if (s != kBaseOutcome) {
          throw validation_error("spec JSON: base outcome must be tire_strike");
        }
      }
    }
    if (base_count > 1) throw validation_error("spec JSON: multiple base outcomes");
  }

  if (j.contains("columns")) {
    const json& cols = j.at("columns");
    spec.outcome_column = cols.value("outcome", spec.outcome_column);
    spec.weight_column = cols.value("weight", spec.weight_column);
  }

  for (const json& t : j.value("terms", json::array())) {
    if (!t.is_object() || !t.contains("variable") || !t.contains("outcome")) {
      throw validation_error("spec JSON: each term needs 'variable' and 'outcome'");
    }
    Term term;
    term.variable = t.at("variable").get<std::string>();
    term.outcome = severity_from_json(t.at("outcome"), "terms");
    term.random = t.value("random", false);
    if (t.contains("distribution")) {
      auto kind = parse_mixing_kind(t.at("distribution").get<std::string>());
      if (!kind) {
        throw validation_error("spec JSON: unknown distribution '" +
                               t.at("distribution").get<std::string>() + "'");
      }
      term.distribution = *kind;
    }
    term.het_mean = t.value("het_mean", std::vector<std::string>());
    term.het_var = t.value("het_var", std::vector<std::string>());
    spec.terms.push_back(std::move(term));
  }

  if (j.contains("options")) {
    const json& o = j.at("options");
    spec.options.draws = o.value("draws", spec.options.draws);
    spec.options.seed = o.value("seed", spec.options.seed);
    spec.options.discard = o.value("discard", spec.options.discard);
    spec.options.scramble = o.value("scramble", spec.options.scramble);
    spec.options.max_iterations = o.value("max_iterations", spec.options.max_iterations);
    if (o.contains("tolerances")) {
      const json& tol = o.at("tolerances");
      spec.options.gradient_tolerance = tol.value("gradient", spec.options.gradient_tolerance);
      spec.options.step_tolerance = tol.value("step", spec.options.step_tolerance);
    }
  }

  validate_spec(spec);
  return spec;
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_spec(buf.str());
}

std::string model_spec_to_json(const ModelSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["constants"] = spec.constants;
  json outs = json::array();
  for (int k = 0; k < kOutcomeCount; ++k) {
    json o;
    o["name"] = std::string(kSeverityNames[k]);
    if (static_cast<Severity>(k) == kBaseOutcome) o["base"] = true;
    outs.push_back(o);
  }
  j["outcomes"] = outs;
  json cols;
  cols["outcome"] = spec.outcome_column;
  if (!spec.weight_column.empty()) cols["weight"] = spec.weight_column;
  j["columns"] = cols;
  json terms = json::array();
  for (const Term& t : spec.terms) {
    json tj;
    tj["variable"] = t.variable;
    tj["outcome"] = std::string(severity_name(t.outcome));
    tj["random"] = t.random;
    if (t.random) {
      tj["distribution"] = std::string(mixing_kind_name(t.distribution));
      tj["het_mean"] = t.het_mean;
      tj["het_var"] = t.het_var;
    }
    terms.push_back(tj);
  }
  j["terms"] = terms;
  json opts;
  opts["draws"] = spec.options.draws;
  opts["seed"] = spec.options.seed;
  opts["discard"] = spec.options.discard;
  opts["scramble"] = spec.options.scramble;
  opts["max_iterations"] = spec.options.max_iterations;
  opts["tolerances"] = {{"gradient", spec.options.gradient_tolerance},
                        {"step", spec.options.step_tolerance}};
  j["options"] = opts;
  return j.dump(2);
}

}  // namespace voltsev
