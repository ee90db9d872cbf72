#pragma once

#include <complex>

#include "blp/rng.hpp"
#include "blp/scaling.hpp"

namespace blp {

enum class TailSide { upper, lower };

/// Which form of the Levy-Khintchine integral realizes the exponent.
enum class DriftConvention {
  uncompensated,     ///< alpha in (0, 1): int (e^{i theta y} - 1) n(dy)
  compensated,       ///< alpha in (1, 2): int (e^{i theta y} - 1 - i theta y) n(dy)
  symmetric_cauchy,  ///< alpha = 1, q1 = q2, no drift
};

/// Strictly alpha-stable motion with Levy measure
///   v_alpha(dx) = q1 x^{-1-alpha} dx on (0, inf) + q2 |x|^{-1-alpha} dx on (-inf, 0)
/// and exponent psi(theta) = -c_* theta^alpha for theta > 0.
class StableMotionParams {
 public:
  static StableMotionParams from_tails(double alpha, double q1, double q2);
  static StableMotionParams from_c_star(double alpha, std::complex<double> c_star);

  double alpha() const { return alpha_; }
  double q1() const { return q1_; }
  double q2() const { return q2_; }
  std::complex<double> c_star() const { return c_star_; }
  DriftConvention drift_convention() const;

  /// Scale sigma with sigma^alpha = Re(c_*).
  double scale() const { return scale_; }
  /// Skewness (q1 - q2) / (q1 + q2).
  double skewness() const { return (q1_ - q2_) / (q1_ + q2_); }
  double tail_weight(TailSide side) const { return side == TailSide::upper ? q1_ : q2_; }

 private:
  StableMotionParams(double alpha, double q1, double q2, std::complex<double> c_star);
  void validate() const;

  double alpha_;
  double q1_;
  double q2_;
  std::complex<double> c_star_;
  double scale_;
};

/// c_* = Gamma(1 - alpha) / alpha * (q1 e^{-i pi alpha / 2} + q2 e^{i pi alpha / 2}), alpha != 1.
std::complex<double> c_star_from_tails(double alpha, double q1, double q2);

struct TailWeights {
  double q1;
  double q2;
};

/// Inverse of c_star_from_tails; for alpha = 1, q1 = q2 = Re(c_*) / pi.
TailWeights tails_from_c_star(double alpha, std::complex<double> c_star);

/// One draw of xi_s (Chambers-Mallows-Stuck transform, scaled by s^{1/alpha}).
double sample_increment(const StableMotionParams& params, double duration, Rng& rng);

/// Asymptotic tail (q_side / alpha) s x^{-alpha} L(x).
double tail_asymptote(const StableMotionParams& params, double s, double x, TailSide side,
                      const SlowVariation& slow = SlowVariation::constant(1.0));

/// v_alpha((x, inf)) or v_alpha((-inf, -x)).
double levy_tail(const StableMotionParams& params, double x, TailSide side);

/// Running maximum of xi over [0, t] observed on `steps` equally spaced times
/// (including time 0).
double sample_path_supremum(const StableMotionParams& params, double t, int steps, Rng& rng);

}  // namespace blp
