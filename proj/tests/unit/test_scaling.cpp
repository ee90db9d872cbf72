#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "blp/oracles.hpp"
#include "blp/scaling.hpp"

using namespace blp;

TEST_CASE("slow variation families") {
  const auto one = SlowVariation::constant(2.0);
  CHECK(one(1e9) == 2.0);
  const auto lp = SlowVariation::log_power(1.0);
  CHECK(lp(1e-300) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lp(0.0), std::domain_error);
  CHECK(lp(1e6) == doctest::Approx(std::log(std::exp(1.0) + 1e6)));
  CHECK(lp.log_value(1e300) == doctest::Approx(std::log(std::log(1e300))).epsilon(1e-12));
  CHECK_THROWS_AS(SlowVariation::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SlowVariation::constant(-1.0), std::invalid_argument);
}

TEST_CASE("monotonicity validation") {
  CHECK_NOTHROW(SlowVariation::log_power(1.0).validate_for(1.5));
  CHECK_NOTHROW(SlowVariation::log_power(-4.0).validate_for(0.5));
  // x^{-alpha} (log(e + x))^r is monotone only while r < ~3.146 alpha
  CHECK_THROWS_AS(SlowVariation::log_power(10.0).validate_for(1.5), std::invalid_argument);
}

TEST_CASE("H inversion and closed forms") {
  for (const auto& c : scaling_oracle_suite()) {
    INFO(c.name << " = " << c.value);
    CHECK(c.pass);
  }
}

TEST_CASE("H decreasing and h increasing") {
  for (const auto& slow : {SlowVariation::constant(1.0), SlowVariation::log_power(2.0), SlowVariation::log_power(-1.0)}) {
    double prev = INFINITY;
    for (int i = 0; i <= 60; ++i) {
      const double h = big_h(slow, 1.5, std::pow(10.0, -12.0 + 0.25 * i));
      CHECK(h < prev);
      prev = h;
    }
    double prev_t = 0.0;
    for (double t = 0.0; t <= 30.0; t += 0.5) {
      const double h = h_of_t(slow, 1.5, 1.0, t);
      CHECK(h > prev_t);
      prev_t = h;
    }
  }
  CHECK_THROWS_AS(big_h(SlowVariation::constant(1.0), 1.5, 0.0), std::domain_error);
}

TEST_CASE("H(y) y^{1/alpha} is slowly varying for log-power L") {
  const double alpha = 1.2;
  const auto slow = SlowVariation::log_power(2.0);
  const auto bar = [&](double y) { return big_h(slow, alpha, y) * std::pow(y, 1.0 / alpha); };
  for (double c : {2.0, 10.0}) {
    const double near = std::abs(bar(c * 1e-4) / bar(1e-4) - 1.0);
    const double far = std::abs(bar(c * 1e-200) / bar(1e-200) - 1.0);
    CHECK(far < near);
    CHECK(far < 0.01);
  }
}

TEST_CASE("almost-sure norming") {
  const auto one = SlowVariation::constant(1.0);
  const double alpha = 1.5;
  for (double t : {3.0, 9.0}) {
    CHECK(as_norming(one, alpha, 1.0, t, NormingKind::liminf) ==
          doctest::Approx(std::exp(t / alpha) * std::pow(std::log(t), -1.0 / alpha)).epsilon(1e-10));
    CHECK(as_norming(one, alpha, 1.0, t, NormingKind::logscale) ==
          doctest::Approx(std::exp(t / alpha) * std::pow(t, 1.0 / alpha)).epsilon(1e-10));
  }
  const auto lp = SlowVariation::log_power(-1.0);
  const double rate = std::log(as_norming(lp, alpha, 1.0, 400.0, NormingKind::logscale)) / 400.0;
  CHECK(rate == doctest::Approx(1.0 / alpha).epsilon(0.02));
}

TEST_CASE("threshold checks") {
  const auto one = SlowVariation::constant(1.0);
  std::vector<double> grid;
  for (int t = 1; t <= 30; ++t) grid.push_back(t);

  const auto sub = ThresholdSpec::exponential(0.5, 1.0, 1.5);
  CHECK(sub.regime == Regime::sub);
  const auto ok = check_threshold(sub, one, 1.5, 1.0, grid);
  CHECK(ok.ok());
  CHECK(ok.summable);

  const auto super = ThresholdSpec::exponential(2.0, 1.0, 1.5);
  CHECK(super.regime == Regime::super);
  CHECK(check_threshold(super, one, 1.5, 1.0, grid).ok());

  ThresholdSpec mislabeled = sub;
  mislabeled.regime = Regime::super;
  const auto bad = check_threshold(mislabeled, one, 1.5, 1.0, grid);
  CHECK_FALSE(bad.regime_consistent);
  CHECK_FALSE(bad.warnings.empty());

  ThresholdSpec wiggly{[](double t) { return 10.0 + std::sin(t); }, Regime::sub, true};
  CHECK_FALSE(check_threshold(wiggly, one, 1.5, 1.0, grid).monotone);

  ThresholdSpec negative{[](double t) { return -t; }, Regime::sub, false};
  CHECK_FALSE(check_threshold(negative, one, 1.5, 1.0, grid).positive);

  // slowly growing sub-regime levels fail the summability heuristic
  ThresholdSpec slow_growth{[](double t) { return 1.0 + t; }, Regime::sub, true};
  CHECK_FALSE(check_threshold(slow_growth, one, 1.5, 1.0, grid).summable);
}

TEST_CASE("r(t) inverts h") {
  const auto slow = SlowVariation::log_power(1.0);
  const auto level = ThresholdSpec::exponential(0.5, 1.0, 1.5);
  for (double t : {4.0, 10.0}) {
    const double r = r_of_t(slow, 1.5, 1.0, level, t);
    CHECK(h_of_t(slow, 1.5, 1.0, r) == doctest::Approx(level(t)).epsilon(1e-9));
  }
}
