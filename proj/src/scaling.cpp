#include "blp/scaling.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace blp {
namespace {

// log(log(e + e^l)) without overflow for large l.
double log_log_e_plus_exp(double l) {
  const double inner = l > 1.0 ? l + std::log1p(std::exp(1.0 - l)) : 1.0 + std::log1p(std::exp(l - 1.0));
  return std::log(inner);
}

// log of x^{-alpha} L(x) at x = e^l.
double log_tail(const SlowVariation& slow, double alpha, double l) {
  if (slow.family() == SlowVariation::Family::constant) return -alpha * l + std::log(slow.parameter());
  return -alpha * l + slow.parameter() * log_log_e_plus_exp(l);
}

}  // namespace

SlowVariation SlowVariation::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("SlowVariation: constant must be positive");
  return SlowVariation(Family::constant, c);
}

SlowVariation SlowVariation::log_power(double r) {
  if (!std::isfinite(r)) throw std::invalid_argument("SlowVariation: log_power exponent must be finite");
  return SlowVariation(Family::log_power, r);
}

double SlowVariation::operator()(double x) const { return std::exp(log_value(x)); }

double SlowVariation::log_value(double x) const {
  if (!(x > 0.0)) throw std::domain_error("SlowVariation: argument must be positive");
  if (family_ == Family::constant) return std::log(parameter_);
  return parameter_ * log_log_e_plus_exp(std::log(x));
}

void SlowVariation::validate_for(double alpha) const {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("SlowVariation: alpha must lie in (0, 2)");
  if (family_ == Family::constant) return;
  const double lo = std::log(1e-12);
  const double hi = std::log(1e12);
  const int n = 4000;
  double prev = log_tail(*this, alpha, lo);
  for (int i = 1; i <= n; ++i) {
    const double l = lo + (hi - lo) * i / n;
    const double cur = log_tail(*this, alpha, l);
    if (!(cur < prev)) {
      std::ostringstream msg;
      msg << "SlowVariation: x^{-alpha} L(x) is not strictly decreasing near x = " << std::exp(l)
          << " (alpha = " << alpha << ", r = " << parameter_ << ")";
      throw std::invalid_argument(msg.str());
    }
    prev = cur;
  }
}

double big_h(const SlowVariation& slow, double alpha, double y) {
  if (!(y > 0.0)) throw std::domain_error("big_h: argument must be positive");
  const double target = std::log(y);
  if (slow.family() == SlowVariation::Family::constant) {
    return std::exp((std::log(slow.parameter()) - target) / alpha);
  }
  // log tail is decreasing in l; bracket then bisect
  double lo = -1.0;
  double hi = 1.0;
  while (log_tail(slow, alpha, lo) < target) {
    lo *= 2.0;
    if (lo < -1e4) throw std::domain_error("big_h: root below bracket");
  }
  while (log_tail(slow, alpha, hi) > target) {
    hi *= 2.0;
    if (hi > 1e4) throw std::domain_error("big_h: root above bracket");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (log_tail(slow, alpha, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

double h_of_t(const SlowVariation& slow, double alpha, double lambda, double t) {
  return big_h(slow, alpha, std::exp(-lambda * t));
}

ThresholdSpec ThresholdSpec::exponential(double c, double lambda, double alpha) {
  if (!(c > 0.0) || c == 1.0) throw std::invalid_argument("ThresholdSpec::exponential: c must be positive, != 1");
  ThresholdSpec out;
  out.level = [c, lambda, alpha](double t) { return std::exp(c * lambda * t / alpha); };
  out.regime = c > 1.0 ? Regime::super : Regime::sub;
  return out;
}

ThresholdSpec ThresholdSpec::multiple_of_h(double x, const SlowVariation& slow, double alpha, double lambda) {
  if (!(x > 0.0)) throw std::invalid_argument("ThresholdSpec::multiple_of_h: x must be positive");
  ThresholdSpec out;
  out.level = [x, slow, alpha, lambda](double t) { return x * h_of_t(slow, alpha, lambda, t); };
  out.regime = x > 1.0 ? Regime::super : Regime::sub;
  return out;
}

ThresholdCheck check_threshold(const ThresholdSpec& threshold, const SlowVariation& slow, double alpha,
                               double lambda, std::span<const double> t_grid) {
  ThresholdCheck out;
  if (t_grid.size() < 2) {
    out.warnings.push_back("threshold grid has fewer than two points");
    return out;
  }
  std::vector<double> level;
  std::vector<double> ratio;
  for (double t : t_grid) {
    const double v = threshold(t);
    if (!(v > 0.0) || !std::isfinite(v)) {
      out.positive = false;
      out.warnings.push_back("threshold is not positive and finite at t = " + std::to_string(t));
      return out;
    }
    level.push_back(v);
    ratio.push_back(v / h_of_t(slow, alpha, lambda, t));
  }
  if (threshold.monotone) {
    for (std::size_t i = 1; i < level.size(); ++i) {
      if (level[i] < level[i - 1]) {
        out.monotone = false;
        out.warnings.push_back("threshold decreases at t = " + std::to_string(t_grid[i]));
        break;
      }
    }
  }
  const double first = ratio.front();
  const double last = ratio.back();
  if (threshold.regime == Regime::super ? !(last > first && last > 1.0) : !(last < first && last < 1.0)) {
    out.regime_consistent = false;
    out.warnings.push_back(threshold.regime == Regime::super
                               ? "Lambda(t)/h(t) does not grow on the grid (declared super)"
                               : "Lambda(t)/h(t) does not shrink on the grid (declared sub)");
  }
  // sub: n Lambda(n)^{-alpha} L(Lambda(n)); super: e^{lambda n} Lambda(n)^{-alpha} L(Lambda(n))
  const double n0 = std::max(1.0, std::ceil(t_grid.front()));
  const double n1 = std::floor(t_grid.back());
  if (n1 - n0 >= 4.0) {
    double partial = 0.0;
    double last_term = 0.0;
    double largest = 0.0;
    for (double n = n0; n <= n1; n += 1.0) {
      const double lv = threshold(n);
      const double weight = threshold.regime == Regime::sub ? std::log(n) : lambda * n;
      last_term = std::exp(weight - alpha * std::log(lv) + slow.log_value(lv));
      partial += last_term;
      largest = std::max(largest, last_term);
    }
    if (!(last_term < 1e-2 * largest) || !std::isfinite(partial)) {
      out.summable = false;
      out.warnings.push_back("deviation probabilities do not look summable over the grid");
    }
  }
  return out;
}

double r_of_t(const SlowVariation& slow, double alpha, double lambda, const ThresholdSpec& threshold,
              double t) {
  const double lv = threshold(t);
  if (!(lv > 0.0)) throw std::domain_error("r_of_t: threshold must be positive");
  return (alpha * std::log(lv) - slow.log_value(lv)) / lambda;
}

double as_norming(const SlowVariation& slow, double alpha, double lambda, double t, NormingKind kind) {
  if (kind == NormingKind::liminf) {
    if (!(t > 1.0)) throw std::domain_error("as_norming: liminf norming needs t > 1");
    return big_h(slow, alpha, std::exp(-lambda * t) * std::log(t));
  }
  if (!(t > 0.0)) throw std::domain_error("as_norming: logscale norming needs t > 0");
  return big_h(slow, alpha, std::exp(-lambda * t) / t);
}

}  // namespace blp
