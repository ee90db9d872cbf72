#include "blp/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace blp {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRoundTrip = 1e-12;

bool is_cauchy(double alpha) { return alpha == 1.0; }

}  // namespace

std::complex<double> c_star_from_tails(double alpha, double q1, double q2) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("c_star_from_tails: alpha must lie in (0, 2)");
  if (!(q1 >= 0.0 && q2 >= 0.0 && q1 + q2 > 0.0)) {
    throw std::invalid_argument("c_star_from_tails: tail weights must be non-negative, not both zero");
  }
  if (is_cauchy(alpha)) {
    if (std::abs(q1 - q2) > kRoundTrip * (q1 + q2)) {
      throw std::invalid_argument("c_star_from_tails: alpha = 1 requires q1 = q2");
    }
    return {kPi * q1, 0.0};
  }
  const double half_angle = kPi * alpha / 2.0;
  const double factor = std::tgamma(1.0 - alpha) / alpha;
  return factor * (q1 * std::polar(1.0, -half_angle) + q2 * std::polar(1.0, half_angle));
}

TailWeights tails_from_c_star(double alpha, std::complex<double> c_star) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("tails_from_c_star: alpha must lie in (0, 2)");
  if (is_cauchy(alpha)) {
    const double q = c_star.real() / kPi;
    return {q, q};
  }
  const double half_angle = kPi * alpha / 2.0;
  const std::complex<double> z = c_star * alpha / std::tgamma(1.0 - alpha);
  // Re z = (q1 + q2) cos, Im z = (q2 - q1) sin
  const double sum = z.real() / std::cos(half_angle);
  const double diff = z.imag() / std::sin(half_angle);
  return {(sum - diff) / 2.0, (sum + diff) / 2.0};
}

StableMotionParams::StableMotionParams(double alpha, double q1, double q2, std::complex<double> c_star)
    : alpha_(alpha), q1_(q1), q2_(q2), c_star_(c_star) {
  validate();
  scale_ = std::pow(c_star_.real(), 1.0 / alpha_);
}

StableMotionParams StableMotionParams::from_tails(double alpha, double q1, double q2) {
  return StableMotionParams(alpha, q1, q2, c_star_from_tails(alpha, q1, q2));
}

StableMotionParams StableMotionParams::from_c_star(double alpha, std::complex<double> c_star) {
  if (is_cauchy(alpha) && c_star.imag() != 0.0) {
    throw std::invalid_argument("stable params: alpha = 1 with drift (Im c_* != 0) is not supported");
  }
  const TailWeights w = tails_from_c_star(alpha, c_star);
  // Tiny negative weights from rounding of a one-sided law.
  const double floor = -kRoundTrip * (std::abs(w.q1) + std::abs(w.q2));
  if (w.q1 < floor || w.q2 < floor) {
    throw std::invalid_argument("stable params: c_* does not correspond to non-negative tail weights");
  }
  return StableMotionParams(alpha, std::max(w.q1, 0.0), std::max(w.q2, 0.0), c_star);
}

void StableMotionParams::validate() const {
  if (!(alpha_ > 0.0 && alpha_ < 2.0)) throw std::invalid_argument("stable params: alpha must lie in (0, 2)");
  if (!(q1_ > 0.0)) throw std::invalid_argument("stable params: q1 must be positive");
  if (!(q2_ >= 0.0)) throw std::invalid_argument("stable params: q2 must be non-negative");
  if (is_cauchy(alpha_) && std::abs(q1_ - q2_) > kRoundTrip * (q1_ + q2_)) {
    throw std::invalid_argument("stable params: alpha = 1 requires q1 = q2");
  }
  if (!(c_star_.real() > 0.0)) throw std::invalid_argument("stable params: Re(c_*) must be positive");
  if (!is_cauchy(alpha_)) {
    const double bound = std::abs(std::tan(kPi * alpha_ / 2.0)) * c_star_.real();
    if (std::abs(c_star_.imag()) > bound * (1.0 + 1e-12)) {
      throw std::invalid_argument("stable params: |Im c_*| exceeds |tan(pi alpha/2)| Re(c_*)");
    }
  }
  const TailWeights back = tails_from_c_star(alpha_, c_star_);
  const double tol = kRoundTrip * 10.0 * (q1_ + q2_);
  if (std::abs(back.q1 - q1_) > tol || std::abs(back.q2 - q2_) > tol) {
    throw std::invalid_argument("stable params: c_* and (q1, q2) are inconsistent");
  }
}

DriftConvention StableMotionParams::drift_convention() const {
  if (is_cauchy(alpha_)) return DriftConvention::symmetric_cauchy;
  return alpha_ < 1.0 ? DriftConvention::uncompensated : DriftConvention::compensated;
}

double sample_increment(const StableMotionParams& params, double duration, Rng& rng) {
  if (!(duration > 0.0)) {
    if (duration == 0.0) return 0.0;
    throw std::domain_error("sample_increment: duration must be positive");
  }
  const double alpha = params.alpha();
  const double spread = params.scale() * std::pow(duration, 1.0 / alpha);
  const double v = kPi * (rng.uniform_open() - 0.5);
  if (is_cauchy(alpha)) return spread * std::tan(v);
  const double w = -std::log(rng.uniform_open());
  const double beta = params.skewness();
  const double tan_half = std::tan(kPi * alpha / 2.0);
  double z;
  if (beta == 0.0) {
    z = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
        std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
  } else {
    const double shift = std::atan(beta * tan_half) / alpha;
    const double stretch = std::pow(1.0 + beta * beta * tan_half * tan_half, 1.0 / (2.0 * alpha));
    const double angle = alpha * (v + shift);
    z = stretch * std::sin(angle) / std::pow(std::cos(v), 1.0 / alpha) *
        std::pow(std::cos(v - angle) / w, (1.0 - alpha) / alpha);
  }
  return spread * z;
}

double tail_asymptote(const StableMotionParams& params, double s, double x, TailSide side,
                      const SlowVariation& slow) {
  if (!(x > 0.0) || !(s > 0.0)) throw std::domain_error("tail_asymptote: s and x must be positive");
  return params.tail_weight(side) / params.alpha() * s * std::pow(x, -params.alpha()) * slow(x);
}

double levy_tail(const StableMotionParams& params, double x, TailSide side) {
  if (!(x > 0.0)) throw std::domain_error("levy_tail: x must be positive");
  return params.tail_weight(side) / params.alpha() * std::pow(x, -params.alpha());
}

double sample_path_supremum(const StableMotionParams& params, double t, int steps, Rng& rng) {
  if (steps < 1) throw std::invalid_argument("sample_path_supremum: steps must be >= 1");
  const double dt = t / steps;
  double position = 0.0;
  double best = 0.0;
  for (int i = 0; i < steps; ++i) {
    position += sample_increment(params, dt, rng);
    best = std::max(best, position);
  }
  return best;
}

}  // namespace blp
