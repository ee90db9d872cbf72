#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "blp/numerics.hpp"
#include "blp/rng.hpp"

namespace blp {

class StableMotionParams;

/// Finite-support offspring law {p_k} together with the branching rate beta.
///
/// Construction validates the law: probabilities are non-negative and sum to
/// one within 1e-12, the mean exceeds one (supercritical) and p_1 < 1.
/// Finite support guarantees the L log L condition and a bounded f''.
class OffspringLaw {
 public:
  OffspringLaw(const std::map<int, double>& pmf, double branching_rate);

  /// Binary splitting at rate beta (Yule process).
  static OffspringLaw yule(double branching_rate = 1.0);

  const std::vector<double>& pmf() const { return pmf_; }
  double probability(int k) const;
  int max_offspring() const { return static_cast<int>(pmf_.size()) - 1; }
  double branching_rate() const { return beta_; }
  double mean() const { return mean_; }
  bool is_yule() const;

  double pgf(double s) const;
  cplx pgf(cplx s) const;
  double pgf_derivative(double s) const;
  double pgf_second_derivative(double s) const;
  /// 1 - f(1 - u), accurate for small u.
  double complement_pgf(double u) const;

  int sample(Rng& rng) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double beta_;
  double mean_;
};

/// Constants of the continuous-time Galton-Watson skeleton.
struct GwDerived {
  double q = 0.0;       ///< extinction probability
  double lambda = 0.0;  ///< Malthusian rate beta (mu - 1)
  double rho = 0.0;     ///< beta (1 - f'(q))
  double theta = 0.0;   ///< int_0^inf e^{-lambda r} P(Z_r > 0) dr
};

struct Rates {
  double lambda;
  double rho;
};

/// Test function phi: R -> [0, 1] with phi == 1 on [-one_radius, one_radius].
/// `zero_tail` (if set) declares phi == 0 on (c, inf); `breakpoints` lists jump
/// locations so that quadrature can split there.
struct TestFunction {
  std::function<double(double)> fn;
  double one_radius = 0.0;
  std::optional<double> zero_tail;
  std::vector<double> breakpoints;

  double operator()(double x) const { return fn(x); }

  /// x |-> phi(x / scale).
  TestFunction scaled(double scale) const;

  /// Checks phi in [0, 1] and phi(x) = 1 for |x| <= one_radius on a grid.
  void validate() const;

  static TestFunction constant_one();
  /// Indicator of (-inf, c], c > 0.
  static TestFunction indicator_below(double c);
  /// exp(-g) for g >= 0 vanishing on [-radius, radius].
  static TestFunction exp_minus(std::function<double(double)> g, double radius,
                                std::vector<double> breakpoints = {});
};

double pgf_eval(const OffspringLaw& law, double s);
double extinction_prob(const OffspringLaw& law);
Rates rates(const OffspringLaw& law);

/// F(s, t) = E s^{Z_t}, solved from dF/dt = beta (f(F) - F), F(s, 0) = s.
double pgf_flow(const OffspringLaw& law, double s, double t);
/// Complex-argument flow for |s| <= 1.
cplx pgf_flow(const OffspringLaw& law, cplx s, double t);

/// 1 - F(s, t), integrated in complement form (accurate when s is near 1).
double complement_flow(const OffspringLaw& law, double u, double t);

double survival_prob(const OffspringLaw& law, double t);

/// V(s) = f(s) - f'(q) s - q (1 - f'(q)), evaluated as (s - q)^2 * kernel to
/// avoid cancellation near q.
double v_function(const OffspringLaw& law, double s);

/// A(s) = lim e^{rho t} (F(s, t) - q) = s - q + int_0^inf beta e^{rho r} V(F(s, r)) dr.
double a_function(const OffspringLaw& law, double s);
cplx a_function(const OffspringLaw& law, cplx s);

/// phi(theta) = E e^{-theta W}.
double w_laplace(const OffspringLaw& law, double theta);

double vartheta(const OffspringLaw& law);
double vartheta_star(const OffspringLaw& law, const StableMotionParams& stable);

GwDerived derive(const OffspringLaw& law);

/// P(Z_r = k), k = 0..kmax, by Cauchy-circle extraction of F(., r).
std::vector<double> z_pmf(const OffspringLaw& law, double r, std::size_t kmax,
                          std::size_t points = 4096, std::optional<double> radius = std::nullopt);

/// Law of the cluster multiplicity T: P(T = k) = vartheta^{-1} int e^{-lambda r} P(Z_r = k) dr.
///
/// The table holds k = 1..kmax. The remaining mass is carried by a tail with
/// P(T > m | T > kmax) = kmax / m, matching the k^{-2} decay of the pmf.
class TLaw {
 public:
  TLaw(const OffspringLaw& law, std::size_t kmax = 512, std::size_t points = 4096);

  /// P(T = k) for 1 <= k <= kmax; 0 for k < 1.
  double pmf(std::size_t k) const;
  std::size_t kmax() const { return pmf_.size(); }
  double table_mass() const { return cdf_.empty() ? 0.0 : cdf_.back(); }
  double tail_mass() const { return 1.0 - table_mass(); }
  /// E min(T, cap) for cap <= kmax.
  double truncated_mean(std::size_t cap) const;

  std::uint64_t sample(Rng& rng) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

double t_law_pmf(const OffspringLaw& law, std::size_t k);

/// C(phi) = int_0^inf e^{-lambda r} int (1 - F(phi(x), r)) v_alpha(dx) dr.
double c_functional(const TestFunction& phi, const OffspringLaw& law,
                    const StableMotionParams& stable);

/// G(s) = int_0^inf e^{-lambda r} (1 - F(s, r)) dr; G(0) = vartheta.
double discounted_complement(const OffspringLaw& law, double s);

/// Z_t of the branching skeleton alone (no motion), simulated event by event.
std::int64_t simulate_population(const OffspringLaw& law, double t, Rng& rng,
                                 std::int64_t initial = 1, std::int64_t cap = 100'000'000);

}  // namespace blp
