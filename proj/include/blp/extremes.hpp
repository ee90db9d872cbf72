#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blp/gw.hpp"
#include "blp/point_measure.hpp"
#include "blp/rng.hpp"
#include "blp/scaling.hpp"
#include "blp/stable.hpp"
#include "blp/tree.hpp"

namespace blp {

class RejectionBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Law of K: P(K = k), k >= 1, from the coefficients of
/// A((phi* - q) s + q) / A(phi*), truncated once the cumulative mass reaches 1 - 1e-9.
class KLaw {
 public:
  KLaw(const OffspringLaw& law, double phi_star, double q);
  /// Geometric law (1 - phi*) phi*^{k-1} of the Yule case.
  static KLaw geometric(double phi_star);

  double pmf(std::size_t k) const;
  std::size_t kmax() const { return pmf_.size(); }
  double total_mass() const { return cdf_.empty() ? 0.0 : cdf_.back(); }
  std::uint64_t sample(Rng& rng) const;

 private:
  KLaw() = default;
  void finish();
  std::vector<double> pmf_;  // pmf_[k-1] = P(K = k)
  std::vector<double> cdf_;
};

/// Every deterministic limit object attached to a model.
class LimitLawBundle {
 public:
  LimitLawBundle(OffspringLaw law, StableMotionParams stable, SlowVariation slow = SlowVariation::constant(1.0));

  const OffspringLaw& law() const { return law_; }
  const StableMotionParams& stable() const { return stable_; }
  const SlowVariation& slow() const { return slow_; }

  double alpha() const { return stable_.alpha(); }
  double lambda() const { return derived_.lambda; }
  double rho() const { return derived_.rho; }
  double q() const { return derived_.q; }
  double theta() const { return derived_.theta; }
  double theta_star() const { return theta_star_; }
  /// phi(theta*)
  double phi_star() const { return phi_star_; }

  double phi(double theta) const;
  double a_function(double s) const;
  double h(double t) const;

  /// Limit CDF of R_t / h(t) under P*.
  double limit_cdf(double x) const;
  /// 1 - x^{-alpha} on (1, inf).
  double pareto_cdf(double x) const;
  /// A(phi(theta*)) / (1 - q).
  double lower_target() const;
  /// A(phi(theta*))
  double a_phi_star() const { return a_phi_star_; }

  /// (1 - phi(theta* x^{-alpha})) x^alpha L(h) / L(x h): finite-x value of the
  /// normalized upper deviation at Lambda = x h.
  double upper_finite_target(double x, double h_value) const;

  double c_functional(const TestFunction& phi) const;
  /// E exp(-C(phi) W) = phi(C(phi)).
  double laplace_target(const TestFunction& phi) const;
  /// A(phi(C(phi))) / A(phi(theta*)) for phi vanishing on (1, inf).
  double xi_laplace_target(const TestFunction& phi) const;

  const TLaw& t_law() const;
  const KLaw& k_law() const;

  /// One draw of W: exact Exp(1) for binary splitting, otherwise e^{-lambda b} Z_b
  /// at the burn-in horizon b = log(2e4) / lambda.
  double sample_w(Rng& rng) const;
  double w_burn_in() const;

 private:
  OffspringLaw law_;
  StableMotionParams stable_;
  SlowVariation slow_;
  GwDerived derived_;
  double theta_star_;
  double phi_star_;
  double a_phi_star_;
  mutable std::once_flag t_once_;
  mutable std::unique_ptr<TLaw> t_law_;
  mutable std::once_flag k_once_;
  mutable std::unique_ptr<KLaw> k_law_;
};

struct Estimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::size_t hits = 0;
};

/// R_t per tree (empty when extinct).
using Maxima = std::span<const std::optional<double>>;

/// e^{-lambda t} Lambda^alpha L(Lambda)^{-1} P(R_t > Lambda).
Estimate upper_deviation_ratio(Maxima maxima, double t, double level, const LimitLawBundle& bundle);

struct KsResult {
  double statistic = 0.0;
  std::size_t n = 0;
  bool underpowered = false;  ///< fewer than 100 samples
};

/// KS distance of R_t / Lambda given R_t > Lambda against 1 - x^{-alpha}.
KsResult conditional_pareto_ks(Maxima maxima, double level, double alpha);

struct LowerDeviation {
  Estimate ratio;            ///< e^{rho (t - r)} P*(R_t <= Lambda)
  double extinct_fraction;   ///< estimate of P(Z_t = 0), compare with q
};

LowerDeviation lower_deviation_ratio(Maxima maxima, double t, double level, const LimitLawBundle& bundle);

/// |I(g, X_t / a) - I(g, Y_t / a)| for one tree.
double one_big_jump_term(const TreeSnapshot& snap, const std::function<double(double)>& g, double a);

struct OneBigJump {
  Estimate mean;
  double normalized = 0.0;         ///< e^{-lambda t} a^alpha L(a)^{-1} mean
  double normalized_stderr = 0.0;
};

OneBigJump one_big_jump_discrepancy(std::span<const double> terms, double t, double a,
                                    const LimitLawBundle& bundle);

/// N_infinity restricted to |x| > cutoff given W.
PointMeasure sample_n_infinity(const LimitLawBundle& bundle, double w, double cutoff, Rng& rng);

/// Xi = sum of K conditioned copies of N_infinity, restricted to |x| > cutoff.
PointMeasure sample_xi(const LimitLawBundle& bundle, double cutoff, Rng& rng, std::size_t budget = 1'000'000);

struct ProxyRow {
  double t = 0.0;
  std::string quantity;
  double p = 0.0;  ///< quantile level, or -1 for exceedance rows
  double value = 0.0;
};

/// Quantile tables of R_t / H(e^{-lambda t} log t), R_t / G(t), log R_t^+ / t
/// and the exceedance frequency of G(t), per horizon.
std::vector<ProxyRow> as_proxies(std::span<const double> horizons, std::span<const std::vector<std::optional<double>>> maxima,
                                 const std::function<double(double)>& big_g, const LimitLawBundle& bundle);

struct SupRow {
  double x = 0.0;
  double tree_side = 0.0;    ///< P(sup_{s<=t} R_s >= x)
  double path_side = 0.0;    ///< e^{lambda t} P(sup_{s<=t} xi_s >= x)
  double pooled_stderr = 0.0;
  bool holds = false;
};

/// Compares tree running maxima with e^{lambda t} times standalone path suprema.
std::vector<SupRow> sup_r_inequality_check(std::span<const double> tree_sups, std::span<const double> path_sups,
                                           double lambda, double t, std::span<const double> x_grid);

/// C^1 ramp: 0 for x <= a, 1 for x >= b.
double smooth_ramp(double x, double a, double b);

/// Non-negative function g vanishing on (-0.1, 0.1).
struct PanelFunction {
  std::string name;
  std::function<double(double)> g;
};

std::vector<PanelFunction> laplace_panel();
/// e^{-g}
TestFunction exp_minus(const PanelFunction& f);
/// e^{-g} 1_{(-inf, 1]}
TestFunction truncated_exp_minus(const PanelFunction& f);

double quantile(std::vector<double> values, double p);

/// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic Kolmogorov p-value with the small-sample correction of Stephens.
double kolmogorov_pvalue(double statistic, double effective_n);

}  // namespace blp
