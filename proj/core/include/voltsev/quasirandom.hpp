#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace voltsev {

// Mixing distributions supported for random coefficients. Draws are kept in
// standardized form (zero-location, unit-scale family member); location and
// scale enter through the coefficient realization.
enum class MixingKind { normal, lognormal, uniform, triangular };

std::string_view mixing_kind_name(MixingKind kind);
std::optional<MixingKind> parse_mixing_kind(std::string_view name);

// Radical inverse of `index` in the given base; index >= 1, base >= 2.
// halton_element(2, 1..4) = 0.5, 0.25, 0.75, 0.125.
double halton_element(std::uint32_t base, std::uint64_t index);

// First `count` primes (2, 3, 5, ...), extended procedurally as needed.
std::vector<std::uint32_t> first_primes(std::size_t count);

struct DrawConfig {
  std::size_t n_obs = 0;                // N
  std::size_t n_draws = 200;            // R
  std::vector<std::uint32_t> primes;    // one base per random parameter, declaration order
  std::size_t discard = 50;             // initial sequence elements skipped per base
  bool scramble = false;                // seeded digit permutation per base
  std::uint64_t seed = 0;               // only used when scramble is on
};

// Immutable N x R x J block of uniform (0,1) quasi-random numbers.
class DrawTensor {
 public:
  DrawTensor() = default;
  DrawTensor(std::size_t n_obs, std::size_t n_draws, std::size_t n_params);

  double operator()(std::size_t n, std::size_t r, std::size_t j) const {
    return values_[(n * n_draws_ + r) * n_params_ + j];
  }
  double& at(std::size_t n, std::size_t r, std::size_t j) {
    return values_[(n * n_draws_ + r) * n_params_ + j];
  }

  std::size_t n_obs() const { return n_obs_; }
  std::size_t n_draws() const { return n_draws_; }
  std::size_t n_params() const { return n_params_; }

 private:
  std::size_t n_obs_ = 0;
  std::size_t n_draws_ = 0;
  std::size_t n_params_ = 0;
  std::vector<double> values_;
};

// Observation n (0-based), draw r (0-based), parameter j receives element
// discard + n*R + r + 1 of the Halton sequence in primes[j].
DrawTensor build_draws(const DrawConfig& config);

// Phi^{-1}: rational approximation polished with one Newton step; absolute
// error well below 1e-9 across (0,1). Throws outside (0,1).
double inverse_normal_cdf(double u);

// Standard normal CDF via erfc.
double normal_cdf(double x);

// Maps a uniform (0,1) value to the standardized member of `kind`:
// normal -> Phi^{-1}(u); lognormal -> exp(Phi^{-1}(u)); uniform -> 2u-1;
// triangular -> symmetric triangular on [-1,1].
double transform_draw(double u, MixingKind kind);

}  // namespace voltsev
