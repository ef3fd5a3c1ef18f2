#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "voltsev/quasirandom.hpp"
#include "voltsev/rng.hpp"

using namespace voltsev;

namespace {

// independent radical inverse: collect the digits first, then assemble the
// reversed numerator over base^k and divide once (exact fraction semantics)
double radical_inverse_oracle(unsigned base, std::uint64_t index) {
  std::vector<std::uint64_t> digits;  // least significant first
  while (index > 0) {
    digits.push_back(index % base);
    index /= base;
  }
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  for (std::uint64_t d : digits) {
    num = num * base + d;
    den *= base;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

TEST_CASE("halton base 2 and 3 exact leading elements") {
  const double b2[] = {1.0 / 2, 1.0 / 4, 3.0 / 4, 1.0 / 8, 5.0 / 8, 3.0 / 8, 7.0 / 8, 1.0 / 16};
  const double b3[] = {1.0 / 3, 2.0 / 3, 1.0 / 9, 4.0 / 9, 7.0 / 9, 2.0 / 9, 5.0 / 9, 8.0 / 9};
  for (std::uint64_t i = 0; i < 8; ++i) {
    CHECK(halton_element(2, i + 1) == b2[i]);
    CHECK(halton_element(3, i + 1) == b3[i]);
  }
}

TEST_CASE("halton matches an independent radical inverse") {
  for (unsigned base : {2u, 3u, 5u, 7u, 11u}) {
    for (std::uint64_t i = 1; i <= 200; ++i) {
      CHECK(halton_element(base, i) == radical_inverse_oracle(base, i));
    }
  }
}

TEST_CASE("halton rejects bad arguments") {
  CHECK_THROWS_AS(halton_element(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(halton_element(2, 0), std::invalid_argument);
}

TEST_CASE("first_primes") {
  CHECK(first_primes(0).empty());
  CHECK(first_primes(5) == std::vector<std::uint32_t>{2, 3, 5, 7, 11});
  CHECK(first_primes(10).back() == 29);
}

TEST_CASE("draw tensor layout: discard, then row-major event blocks") {
  DrawConfig cfg;
  cfg.n_obs = 3;
  cfg.n_draws = 4;
  cfg.primes = {2, 3};
  cfg.discard = 7;
  DrawTensor t = build_draws(cfg);
  for (std::size_t n = 0; n < cfg.n_obs; ++n) {
    for (std::size_t r = 0; r < cfg.n_draws; ++r) {
      for (std::size_t j = 0; j < cfg.primes.size(); ++j) {
        const std::uint64_t index = cfg.discard + n * cfg.n_draws + r + 1;
        CHECK(t(n, r, j) == halton_element(cfg.primes[j], index));
        CHECK(t(n, r, j) > 0.0);
        CHECK(t(n, r, j) < 1.0);
      }
    }
  }
}

TEST_CASE("build_draws rejects duplicate primes") {
  DrawConfig cfg;
  cfg.n_obs = 1;
  cfg.n_draws = 2;
  cfg.primes = {3, 3};
  CHECK_THROWS(build_draws(cfg));
}

TEST_CASE("scrambling permutes digits deterministically") {
  // one event, 26 draws, base 5 (permutation of {1..4} can move digits),
  // no discard: indices 1..26
  DrawConfig cfg;
  cfg.n_obs = 1;
  cfg.n_draws = 26;
  cfg.primes = {5};
  cfg.discard = 0;
  cfg.scramble = true;
  cfg.seed = 123;
  const DrawTensor a = build_draws(cfg);
  const DrawTensor b = build_draws(cfg);
  bool any_diff = false;
  for (std::size_t r = 0; r < cfg.n_draws; ++r) {
    CHECK(a(0, r, 0) == b(0, r, 0));  // same seed reproduces
    CHECK(a(0, r, 0) > 0.0);
    CHECK(a(0, r, 0) < 1.0);
    if (a(0, r, 0) != halton_element(5, r + 1)) any_diff = true;
  }
  CHECK(any_diff);
  // one-digit indices 1..4 are a rearrangement of {1/5..4/5}
  std::multiset<double> lead_plain, lead_scrambled;
  for (std::size_t r = 0; r < 4; ++r) {
    lead_plain.insert(halton_element(5, r + 1));
    lead_scrambled.insert(a(0, r, 0));
  }
  CHECK(lead_plain == lead_scrambled);
}

TEST_CASE("inverse normal cdf against AS241 reference values") {
  struct Case {
    double p, x;
  };
  // reference quantiles from an independent AS241 implementation
  const Case cases[] = {
      {0.001, -3.090232306167813},   {0.025, -1.9599639845400538},
      {0.1, -1.2815515655446008},    {0.3, -0.5244005127080407},
      {0.7, 0.5244005127080407},     {0.9, 1.2815515655446008},
      {0.975, 1.9599639845400536},   {0.99, 2.3263478740408408},
      {0.999, 3.090232306167813},    {1e-10, -6.361340902404056},
  };
  for (const Case& c : cases) {
    CHECK(inverse_normal_cdf(c.p) == doctest::Approx(c.x).epsilon(1e-14));
  }
  CHECK(inverse_normal_cdf(0.5) == 0.0);
}

TEST_CASE("inverse normal cdf symmetry and round trip") {
  for (double p = 0.01; p < 0.5; p += 0.007) {
    CHECK(std::abs(inverse_normal_cdf(p) + inverse_normal_cdf(1.0 - p)) <= 1e-12);
    const double x = inverse_normal_cdf(p);
    CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK_THROWS(inverse_normal_cdf(0.0));
  CHECK_THROWS(inverse_normal_cdf(1.0));
}

TEST_CASE("transform_draw by mixing kind") {
  const double u = 0.37;
  CHECK(transform_draw(u, MixingKind::normal) == inverse_normal_cdf(u));
  CHECK(transform_draw(u, MixingKind::lognormal) == std::exp(inverse_normal_cdf(u)));
  CHECK(transform_draw(u, MixingKind::uniform) == 2.0 * u - 1.0);
  // triangular on [-1,1], mode 0: invert F(x) = (x+1)^2/2 on the left half
  CHECK(transform_draw(0.18, MixingKind::triangular) ==
        doctest::Approx(std::sqrt(2.0 * 0.18) - 1.0).epsilon(1e-15));
  CHECK(transform_draw(0.9, MixingKind::triangular) ==
        doctest::Approx(1.0 - std::sqrt(2.0 * 0.1)).epsilon(1e-15));
  CHECK(transform_draw(0.5, MixingKind::triangular) == doctest::Approx(0.0));
  CHECK_THROWS(transform_draw(0.0, MixingKind::normal));
}

TEST_CASE("mixing kind names round-trip") {
  for (MixingKind k : {MixingKind::normal, MixingKind::lognormal, MixingKind::uniform,
                       MixingKind::triangular}) {
    CHECK(parse_mixing_kind(mixing_kind_name(k)) == k);
  }
  CHECK_FALSE(parse_mixing_kind("cauchy").has_value());
}

TEST_CASE("splitmix64 matches the canonical sequence") {
  SplitMix64 g0(0);
  CHECK(g0.next_u64() == 0xE220A8397B1DCDAFull);
  CHECK(g0.next_u64() == 0x6E789E6AA1B965F4ull);
  CHECK(g0.next_u64() == 0x06C45D188009454Full);
  SplitMix64 g42(42);
  CHECK(g42.next_u64() == 0xBDD732262FEB6E95ull);
  CHECK(g42.next_u64() == 0x28EFE333B266F103ull);
}

TEST_CASE("next_uniform stays in the open interval") {
  SplitMix64 g(99);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("mix_seed produces distinct deterministic streams") {
  CHECK(mix_seed(5, 0) == mix_seed(5, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mix_seed(7, i));
  CHECK(seen.size() == 1000);
}
