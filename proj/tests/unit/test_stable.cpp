#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "blp/extremes.hpp"
#include "blp/stable.hpp"

using namespace blp;

TEST_CASE("c_* and tail weights round-trip") {
  for (double alpha : {0.5, 0.9, 1.2, 1.5, 1.9}) {
    for (auto [q1, q2] : {std::pair{0.3, 0.3}, std::pair{1.0, 0.2}, std::pair{0.4, 0.0}}) {
      const auto c = c_star_from_tails(alpha, q1, q2);
      const auto back = tails_from_c_star(alpha, c);
      CHECK(std::abs(back.q1 - q1) < 1e-12);
      CHECK(std::abs(back.q2 - q2) < 1e-12);
      CHECK(c.real() > 0.0);
      CHECK(std::abs(std::tan(std::numbers::pi * alpha / 2)) * c.real() >= std::abs(c.imag()) - 1e-12);
    }
  }
  const auto cauchy = StableMotionParams::from_tails(1.0, 0.5, 0.5);
  CHECK(cauchy.c_star().real() == doctest::Approx(0.5 * std::numbers::pi));
}

TEST_CASE("reference parameters") {
  const auto p = StableMotionParams::from_c_star(1.5, 1.0);
  CHECK(p.q1() == doctest::Approx(p.q2()).epsilon(1e-12));
  CHECK(p.scale() == doctest::Approx(1.0));
  CHECK(p.drift_convention() == DriftConvention::compensated);
  CHECK(StableMotionParams::from_tails(0.7, 1.0, 0.0).drift_convention() == DriftConvention::uncompensated);
  CHECK(StableMotionParams::from_tails(1.0, 1.0, 1.0).drift_convention() == DriftConvention::symmetric_cauchy);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(StableMotionParams::from_tails(1.5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StableMotionParams::from_tails(1.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(StableMotionParams::from_tails(2.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StableMotionParams::from_tails(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StableMotionParams::from_c_star(1.5, {1.0, 5.0}), std::invalid_argument);
  CHECK_THROWS_AS(StableMotionParams::from_c_star(1.5, {-1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("Levy tail") {
  const auto p = StableMotionParams::from_tails(1.5, 1.5, 0.3);
  CHECK(levy_tail(p, 1.0, TailSide::upper) == doctest::Approx(1.0));
  const auto q = StableMotionParams::from_tails(1.5, 0.3, 0.3);
  CHECK(levy_tail(q, 2.0, TailSide::upper) == doctest::Approx(0.2 * std::pow(2.0, -1.5)));
  CHECK(levy_tail(q, 4.0, TailSide::upper) < levy_tail(q, 2.0, TailSide::upper));
  CHECK(levy_tail(p, 1.0, TailSide::lower) == doctest::Approx(0.2));
}

namespace {
std::vector<double> draws(const StableMotionParams& p, double s, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = sample_increment(p, s, rng);
  return out;
}
}  // namespace

TEST_CASE("sampler matches the Cauchy law") {
  const double q = 0.5;
  const auto p = StableMotionParams::from_tails(1.0, q, q);
  const double gamma = std::numbers::pi * q;
  const auto sample = draws(p, 1.0, 40000, 1);
  const double ks = ks_statistic(sample, [&](double x) { return 0.5 + std::atan(x / gamma) / std::numbers::pi; });
  CHECK(kolmogorov_pvalue(ks, sample.size()) > 0.001);
}

TEST_CASE("sampler matches the Levy(1/2) law") {
  const double q1 = 0.4;
  const auto p = StableMotionParams::from_tails(0.5, q1, 0.0);
  const double c = 2.0 * std::numbers::pi * q1 * q1;
  const auto sample = draws(p, 1.0, 40000, 2);
  CHECK(*std::min_element(sample.begin(), sample.end()) > 0.0);
  const double ks = ks_statistic(sample, [&](double x) { return x <= 0 ? 0.0 : std::erfc(std::sqrt(c / (2 * x))); });
  CHECK(kolmogorov_pvalue(ks, sample.size()) > 0.001);
}

TEST_CASE("self-similarity xi_{2s} = 2^{1/alpha} xi_s") {
  for (double alpha : {0.7, 1.5}) {
    const auto p = StableMotionParams::from_tails(alpha, 0.6, 0.2);
    auto a = draws(p, 2.0, 20000, 3);
    auto b = draws(p, 1.0, 20000, 4);
    for (auto& x : b) x *= std::pow(2.0, 1.0 / alpha);
    const double d = ks_two_sample(a, b);
    CHECK(kolmogorov_pvalue(d, 10000.0) > 0.001);
  }
}

TEST_CASE("tail asymptote with the supremum and the marginal") {
  const double alpha = 1.5;
  const auto p = StableMotionParams::from_c_star(alpha, 1.0);
  const double t = 1.0;
  const double x = 40.0;
  const int n = 200000;
  Rng rng(9);
  int sup_hits = 0;
  int end_hits = 0;
  for (int i = 0; i < n; ++i) {
    sup_hits += sample_path_supremum(p, t, 64, rng) > x;
    end_hits += sample_increment(p, t, rng) > x;
  }
  const double expected = tail_asymptote(p, t, x, TailSide::upper);
  CHECK(expected == doctest::Approx(p.q1() / alpha * t * std::pow(x, -alpha)));
  CHECK(sup_hits / double(n) / expected == doctest::Approx(1.0).epsilon(0.15));
  CHECK(end_hits / double(n) / expected == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("path supremum dominates the endpoint and starts at 0") {
  const auto p = StableMotionParams::from_c_star(1.5, 1.0);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(sample_path_supremum(p, 1.0, 16, rng) >= 0.0);
}
