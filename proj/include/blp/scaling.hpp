#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace blp {

/// Slowly varying factor L of the tail x^{-alpha} L(x).
class SlowVariation {
 public:
  enum class Family { constant, log_power };

  /// L(x) = c.
  static SlowVariation constant(double c);
  /// L(x) = (log(e + x))^r.
  static SlowVariation log_power(double r);

  double operator()(double x) const;
  /// log L(x), accurate for very large x.
  double log_value(double x) const;

  Family family() const { return family_; }
  double parameter() const { return parameter_; }

  /// Throws std::invalid_argument unless x^{-alpha} L(x) is strictly decreasing
  /// on a logarithmic grid spanning (1e-12, 1e12).
  void validate_for(double alpha) const;

 private:
  SlowVariation(Family family, double parameter) : family_(family), parameter_(parameter) {}
  Family family_;
  double parameter_;
};

/// H(y): the inverse of x |-> x^{-alpha} L(x).
double big_h(const SlowVariation& slow, double alpha, double y);

/// h(t) = H(e^{-lambda t}).
double h_of_t(const SlowVariation& slow, double alpha, double lambda, double t);

enum class Regime {
  super,  ///< Lambda(t) / h(t) -> infinity
  sub,    ///< Lambda(t) / h(t) -> 0
};

/// Deviation threshold Lambda(t) with its declared regime.
struct ThresholdSpec {
  std::function<double(double)> level;
  Regime regime = Regime::super;
  bool monotone = true;

  double operator()(double t) const { return level(t); }

  /// Lambda(t) = e^{c lambda t / alpha}; super when c > 1, sub when c < 1.
  static ThresholdSpec exponential(double c, double lambda, double alpha);
  /// Lambda(t) = x h(t) (fixed multiple of the weak-limit scale).
  static ThresholdSpec multiple_of_h(double x, const SlowVariation& slow, double alpha, double lambda);
};

struct ThresholdCheck {
  bool positive = true;
  bool monotone = true;
  bool regime_consistent = true;
  /// Heuristic: terms n Lambda(n)^{-alpha} L(Lambda(n)) (sub) or
  /// e^{lambda n} Lambda(n)^{-alpha} L(Lambda(n)) (super) die out over the grid.
  bool summable = true;
  std::vector<std::string> warnings;
  bool ok() const { return positive && monotone && regime_consistent; }
};

/// Grid sanity checks of a threshold specification.
ThresholdCheck check_threshold(const ThresholdSpec& threshold, const SlowVariation& slow, double alpha,
                               double lambda, std::span<const double> t_grid);

/// r(t) with e^{-lambda r(t)} = Lambda(t)^{-alpha} L(Lambda(t)), i.e. h(r(t)) = Lambda(t).
double r_of_t(const SlowVariation& slow, double alpha, double lambda, const ThresholdSpec& threshold,
              double t);

enum class NormingKind {
  liminf,    ///< H(e^{-lambda t} log t)
  logscale,  ///< H(t^{-1} e^{-lambda t})
};

double as_norming(const SlowVariation& slow, double alpha, double lambda, double t, NormingKind kind);

}  // namespace blp
