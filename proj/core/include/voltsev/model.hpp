#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voltsev/dataset.hpp"
#include "voltsev/quasirandom.hpp"

namespace voltsev {

/// Crash severity outcome. tire_strike is the base whose utility is fixed at
/// zero; the other three carry estimable constants and coefficients.
enum class Severity : int {
  tire_strike = 0,
  minor_crash = 1,
  police_reportable = 2,
  most_severe = 3,
};

inline constexpr int kOutcomeCount = 4;
inline constexpr Severity kBaseOutcome = Severity::tire_strike;

std::string_view severity_name(Severity s);  ///< "tire_strike", ...
std::string_view severity_code(Severity s);  ///< "TS", "MC", "PRC", "SC"
/// Accepts full names, short codes, or integer levels 0-3.
std::optional<Severity> parse_severity(std::string_view text);

/// One utility term: `variable` enters the utility of `outcome`. Random terms
/// get a mixing distribution plus optional heterogeneity-in-mean (Z) and
/// heterogeneity-in-variance (B) variable lists.
struct Term {
  std::string variable;
  Severity outcome = Severity::minor_crash;
  bool random = false;
  MixingKind distribution = MixingKind::normal;
  std::vector<std::string> het_mean;  ///< Z variables shifting the location
  std::vector<std::string> het_var;   ///< B variables scaling via exp(gamma*B)
};

struct SpecOptions {
  std::size_t draws = 200;
  std::uint64_t seed = 0;
  std::size_t discard = 50;
  bool scramble = false;
  double gradient_tolerance = 1e-5;
  double step_tolerance = 1e-9;
  std::size_t max_iterations = 500;
};

struct ModelSpec {
  std::string name;            ///< label used in reports
  bool constants = true;       ///< alternative-specific constants, non-base outcomes
  std::string outcome_column = "severity";
  std::string weight_column;   ///< empty -> unit weights
  std::vector<Term> terms;
  SpecOptions options;

  bool has_random() const;
  std::vector<std::size_t> random_term_indices() const;
  /// Term variables plus all Z and B variables, first-use order, deduplicated.
  std::vector<std::string> referenced_variables() const;
};

/// Structural checks: duplicate (variable, outcome), terms on the base
/// outcome, het lists on fixed terms, bad options. Throws validation_error.
void validate_spec(const ModelSpec& spec);
/// Additionally checks every referenced variable against the table columns.
void validate_spec_columns(const ModelSpec& spec, const DataTable& covariates);

/// Same terms with randomness stripped (used for warm starts and nesting).
ModelSpec fixed_counterpart(const ModelSpec& spec);

enum class ParamKind { constant, beta, sigma, xi, gamma };

/// Canonical flat layout of the parameter vector:
///   [constants MC, PRC, SC] [beta per term, declaration order]
///   [sigma per random term] [xi flattened] [gamma flattened]
struct ParameterPacking {
  std::size_t n_constants = 0;  ///< 0 or 3
  std::size_t n_terms = 0;
  std::vector<std::size_t> random_terms;  ///< term indices, declaration order
  std::size_t sigma_offset = 0;
  std::vector<std::size_t> xi_offsets;    ///< absolute index of first xi, per random ordinal
  std::vector<std::size_t> xi_counts;
  std::vector<std::size_t> gamma_offsets;
  std::vector<std::size_t> gamma_counts;
  std::size_t n_params = 0;
  std::vector<std::string> names;  ///< stable machine names, one per parameter

  std::size_t const_index(Severity outcome) const;
  std::size_t beta_index(std::size_t term) const { return n_constants + term; }
  std::size_t sigma_index(std::size_t random_ordinal) const {
    return sigma_offset + random_ordinal;
  }
  std::size_t xi_index(std::size_t random_ordinal, std::size_t j) const {
    return xi_offsets[random_ordinal] + j;
  }
  std::size_t gamma_index(std::size_t random_ordinal, std::size_t j) const {
    return gamma_offsets[random_ordinal] + j;
  }
  ParamKind kind(std::size_t index) const;
};

ParameterPacking make_packing(const ModelSpec& spec);

/// Events with observed severities and a numeric covariate table; rows of
/// `covariates` are index-aligned with `outcomes`.
struct EventDataset {
  std::vector<Severity> outcomes;
  DataTable covariates;

  std::size_t n_events() const { return outcomes.size(); }
  const std::vector<std::string>& event_ids() const { return covariates.event_ids; }
};

/// Event CSV: `event_id`, the outcome column (severity names, codes, or
/// integer levels), and numeric covariates in any order.
EventDataset read_events_csv(std::istream& in, const std::string& outcome_column = "severity");
EventDataset read_events_csv_file(const std::string& path,
                                  const std::string& outcome_column = "severity");
void write_events_csv(std::ostream& out, const EventDataset& data,
                      const std::string& outcome_column = "severity");

/// Inner-joins feature columns onto the events; unmatched events drop out.
EventDataset join_features(const EventDataset& events, const DataTable& features);

/// Model spec JSON: {"name", "outcomes" (base marked), "columns", "constants",
/// "terms": [{variable, outcome, random, distribution, het_mean, het_var}],
/// "options": {draws, seed, discard, scramble, tolerances, max_iterations}}.
ModelSpec parse_model_spec(const std::string& json_text);
ModelSpec load_model_spec(const std::string& path);
std::string model_spec_to_json(const ModelSpec& spec);

}  // namespace voltsev
