#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "voltsev/estimation.hpp"

namespace voltsev {

enum class EffectKind { continuous, dummy };

struct MarginalEffectRow {
  std::string variable;
  Severity outcome = Severity::minor_crash;
  EffectKind kind = EffectKind::continuous;
  double mean = 0.0;
  double sd = 0.0;  ///< NaN when fewer than 2 events
  double min = 0.0;
  double max = 0.0;
};

struct MarginalEffectsTable {
  std::vector<MarginalEffectRow> rows;  ///< one per spec term, declaration order
  std::size_t n_events = 0;
};

/// Per-event effect of `variable` on every outcome's draw-averaged
/// probability: the 0->1 difference for a dummy, otherwise the analytic
/// derivative (or x -> x+1 difference with unit_difference). Rows sum to 0
/// across outcomes up to rounding.
std::vector<std::array<double, kOutcomeCount>> per_event_effects(
    const EstimationResult& result, const PreparedSample& sample, const RealizedDraws* draws,
    const std::string& variable, bool unit_difference = false);

/// Direct marginal effects, one row per fitted term. A variable whose sample
/// values are all 0/1 is treated as a dummy and brute-forced as
/// P(x=1) - P(x=0), including any het_mean/het_var roles it plays; continuous
/// variables get the analytic softmax derivative (or a +1 re-evaluation when
/// unit_difference is set). Random coefficients are averaged over the frozen
/// draw tensor per event before aggregating mean/sd/min/max across events.
MarginalEffectsTable marginal_effects(const EstimationResult& result,
                                      const PreparedSample& sample, const RealizedDraws* draws,
                                      bool unit_difference = false);
/// Convenience: prepares the sample and rebuilds the fit's frozen draws.
MarginalEffectsTable marginal_effects(const EstimationResult& result, const EventDataset& data,
                                      bool unit_difference = false);

void write_marginal_effects_csv(std::ostream& out, const MarginalEffectsTable& table);

struct DirectionalShare {
  std::string parameter;
  double below = 0.0;
  double above = 0.0;  ///< below + above == 1
};

/// Population share of a normal random coefficient below zero, Phi(-beta/sigma),
/// from the base location and scale only. Throws on sigma <= 0.
DirectionalShare directional_shares(double beta, double sigma);

/// One row per normally-mixed random term of the fit (base location/scale
/// convention; non-normal terms are omitted).
std::vector<DirectionalShare> directional_shares(const EstimationResult& result);

/// Event-conditioned variant: per event, the fraction of realized draws
/// (location shifted by xi.Z, scale by exp(gamma.B)) below zero, averaged
/// across events. Works for any mixing distribution.
std::vector<DirectionalShare> event_conditioned_shares(const EstimationResult& result,
                                                       const PreparedSample& sample,
                                                       const RealizedDraws& draws);

void write_directional_shares_csv(std::ostream& out, const std::string& model,
                                  const std::vector<DirectionalShare>& shares);

/// beta + sum_j delta_j * xi_j; delta are sample means of the het-mean
/// variables. Lengths must match.
double conditional_population_mean(double beta, const std::vector<double>& xi,
                                   const std::vector<double>& delta);

struct VifRow {
  std::string variable;
  double vif = 1.0;
  bool infinite = false;  ///< perfectly collinear
};

/// Variance inflation factors from OLS of each variable on the others plus an
/// intercept; listwise-complete rows only.
std::vector<VifRow> vif(const DataTable& table, const std::vector<std::string>& variables);

}  // namespace voltsev
