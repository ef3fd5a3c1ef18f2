#include "voltsev/quasirandom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "voltsev/rng.hpp"

namespace voltsev {

std::string_view mixing_kind_name(MixingKind kind) {
  switch (kind) {
    case MixingKind::normal: return "normal";
    case MixingKind::lognormal: return "lognormal";
    case MixingKind::uniform: return "uniform";
    case MixingKind::triangular: return "triangular";
  }
  return "normal";
}

std::optional<MixingKind> parse_mixing_kind(std::string_view name) {
  if (name == "normal") return MixingKind::normal;
  if (name == "lognormal") return MixingKind::lognormal;
  if (name == "uniform") return MixingKind::uniform;
  if (name == "triangular") return MixingKind::triangular;
  return std::nullopt;
}

double halton_element(std::uint32_t base, std::uint64_t index) {
  if (base < 2) throw std::invalid_argument("halton_element: base must be >= 2");
  if (index < 1) throw std::invalid_argument("halton_element: index must be >= 1");
  // digit-reversed numerator over base^digits: one division, so the result is
  // the correctly rounded value of the exact fraction
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  std::uint64_t rest = index;
  while (rest > 0) {
    num = num * base + rest % base;
    den *= base;
    rest /= base;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

namespace {

bool is_prime(std::uint32_t n) {
  if (n < 2) return false;
  for (std::uint32_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

// Radical inverse with a digit permutation; sigma fixes 0 so the implicit
// trailing zeros contribute nothing. Same single-division scheme as
// halton_element.
double scrambled_element(std::uint32_t base, std::uint64_t index,
                         const std::vector<std::uint32_t>& sigma) {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  std::uint64_t rest = index;
  while (rest > 0) {
    num = num * base + sigma[rest % base];
    den *= base;
    rest /= base;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::uint32_t> digit_permutation(std::uint32_t base, std::uint64_t seed) {
  std::vector<std::uint32_t> sigma(base);
  for (std::uint32_t d = 0; d < base; ++d) sigma[d] = d;
  // Fisher-Yates over 1..base-1, keeping sigma[0] == 0.
  SplitMix64 gen(mix_seed(seed, base));
  for (std::uint32_t i = base - 1; i >= 2; --i) {
    std::uint32_t j = 1 + static_cast<std::uint32_t>(gen.next_u64() % i);
    std::swap(sigma[i], sigma[j]);
  }
  return sigma;
}

}  // namespace

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  primes.reserve(count);
  for (std::uint32_t n = 2; primes.size() < count; ++n) {
    if (is_prime(n)) primes.push_back(n);
  }
  return primes;
}

DrawTensor::DrawTensor(std::size_t n_obs, std::size_t n_draws, std::size_t n_params)
    : n_obs_(n_obs), n_draws_(n_draws), n_params_(n_params),
      values_(n_obs * n_draws * n_params, 0.0) {}

DrawTensor build_draws(const DrawConfig& config) {
  if (config.n_draws < 1) throw std::invalid_argument("build_draws: n_draws must be >= 1");
  std::vector<std::uint32_t> primes = config.primes;
  for (std::size_t i = 0; i + 1 < primes.size(); ++i) {
    for (std::size_t j = i + 1; j < primes.size(); ++j) {
      if (primes[i] == primes[j]) throw std::invalid_argument("build_draws: primes must be distinct");
    }
  }
  const std::size_t j_count = primes.size();
  DrawTensor tensor(config.n_obs, config.n_draws, j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    const std::uint32_t base = primes[j];
    if (base < 2 || !is_prime(base)) throw std::invalid_argument("build_draws: bases must be prime");
    std::vector<std::uint32_t> sigma;
    if (config.scramble) sigma = digit_permutation(base, config.seed);
    for (std::size_t n = 0; n < config.n_obs; ++n) {
      for (std::size_t r = 0; r < config.n_draws; ++r) {
        const std::uint64_t index = config.discard + n * config.n_draws + r + 1;
        tensor.at(n, r, j) = config.scramble ? scrambled_element(base, index, sigma)
                                             : halton_element(base, index);
      }
    }
  }
  return tensor;
}

namespace {

// Acklam's rational approximation to the normal quantile (|err| ~ 1.15e-9),
// then one Halley step against erfc-based Phi for near machine precision.
double inverse_normal_cdf_approx(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("inverse_normal_cdf: u must lie in (0,1)");
  double x = inverse_normal_cdf_approx(u);
  const double e = normal_cdf(x) - u;
  const double v = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= v / (1.0 + 0.5 * x * v);
  return x;
}

double transform_draw(double u, MixingKind kind) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("transform_draw: u must lie in (0,1)");
  switch (kind) {
    case MixingKind::normal:
      return inverse_normal_cdf(u);
    case MixingKind::lognormal:
      return std::exp(inverse_normal_cdf(u));
    case MixingKind::uniform:
      return 2.0 * u - 1.0;
    case MixingKind::triangular:
      return u < 0.5 ? std::sqrt(2.0 * u) - 1.0 : 1.0 - std::sqrt(2.0 * (1.0 - u));
  }
  throw std::logic_error("transform_draw: unknown mixing kind");
}

}  // namespace voltsev
