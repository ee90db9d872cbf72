#include "blp/gw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "blp/stable.hpp"

namespace blp {
namespace {

constexpr double kPmfTolerance = 1e-12;
const OdeTolerance kFlowTolerance{};

/// Horizon beyond which e^{-lambda r} is below e^{-40}.
double discount_horizon(double lambda) { return 40.0 / lambda; }

/// sum_k p_k [s^k - q^k - k q^{k-1} (s - q)] / (s - q)^2, a polynomial in s.
template <class T>
T v_kernel(const std::vector<double>& pmf, double q, T s) {
  T total = 0.0;
  const int kmax = static_cast<int>(pmf.size()) - 1;
  for (int k = 2; k <= kmax; ++k) {
    if (pmf[k] == 0.0) continue;
    // complete homogeneous sums h_n(s, q) = sum_{j<=n} s^{n-j} q^j
    T h = 1.0;
    double q_pow = 1.0;
    T inner = 0.0;
    for (int m = 1; m <= k - 1; ++m) {
      if (m > 1) {
        q_pow *= q;
        h = s * h + q_pow;
      }
      inner += std::pow(q, k - 1 - m) * h;
    }
    total += pmf[k] * inner;
  }
  return total;
}

void check_unit_interval(double s, const char* what) {
  if (!(s >= 0.0 && s <= 1.0 + 1e-12)) {
    throw std::domain_error(std::string(what) + ": argument " + std::to_string(s) +
                            " outside [0, 1]");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// OffspringLaw

OffspringLaw::OffspringLaw(const std::map<int, double>& pmf, double branching_rate)
    : beta_(branching_rate), mean_(0.0) {
  if (!(branching_rate > 0.0) || !std::isfinite(branching_rate)) {
    throw std::invalid_argument("offspring law: branching rate must be positive");
  }
  if (pmf.empty()) throw std::invalid_argument("offspring law: empty pmf");
  int kmax = 0;
  for (const auto& [k, p] : pmf) {
    if (k < 0) throw std::invalid_argument("offspring law: negative offspring count");
    if (!(p >= 0.0)) throw std::invalid_argument("offspring law: negative probability");
    kmax = std::max(kmax, k);
  }
  pmf_.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (const auto& [k, p] : pmf) pmf_[static_cast<std::size_t>(k)] += p;
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  const double total = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (std::abs(total - 1.0) > kPmfTolerance) {
    throw std::invalid_argument("offspring law: probabilities sum to " + std::to_string(total));
  }
  for (std::size_t k = 0; k < pmf_.size(); ++k) mean_ += static_cast<double>(k) * pmf_[k];
  if (!(mean_ > 1.0)) throw std::invalid_argument("offspring law: mean must exceed 1 (supercritical)");
  if (pmf_.size() > 1 && !(pmf_[1] < 1.0)) throw std::invalid_argument("offspring law: p_1 must be < 1");
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
}

OffspringLaw OffspringLaw::yule(double branching_rate) { return OffspringLaw({{2, 1.0}}, branching_rate); }

double OffspringLaw::probability(int k) const {
  if (k < 0 || k > max_offspring()) return 0.0;
  return pmf_[static_cast<std::size_t>(k)];
}

bool OffspringLaw::is_yule() const { return pmf_.size() == 3 && pmf_[2] == 1.0; }

double OffspringLaw::pgf(double s) const {
  double acc = 0.0;
  for (auto it = pmf_.rbegin(); it != pmf_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

cplx OffspringLaw::pgf(cplx s) const {
  cplx acc = 0.0;
  for (auto it = pmf_.rbegin(); it != pmf_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double OffspringLaw::pgf_derivative(double s) const {
  double acc = 0.0;
  for (std::size_t k = pmf_.size() - 1; k >= 1; --k) acc = acc * s + static_cast<double>(k) * pmf_[k];
  return acc;
}

double OffspringLaw::pgf_second_derivative(double s) const {
  double acc = 0.0;
  for (std::size_t k = pmf_.size() - 1; k >= 2; --k) {
    acc = acc * s + static_cast<double>(k * (k - 1)) * pmf_[k];
  }
  return acc;
}

double OffspringLaw::complement_pgf(double u) const {
  if (u == 0.0) return 0.0;
  const double log_keep = std::log1p(-u);
  double acc = 0.0;
  for (std::size_t k = 1; k < pmf_.size(); ++k) {
    if (pmf_[k] != 0.0) acc -= pmf_[k] * std::expm1(static_cast<double>(k) * log_keep);
  }
  return acc;
}

int OffspringLaw::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return max_offspring();
  return static_cast<int>(it - cdf_.begin());
}

// ---------------------------------------------------------------------------
// TestFunction

TestFunction TestFunction::scaled(double scale) const {
  if (!(scale > 0.0)) throw std::invalid_argument("TestFunction::scaled: scale must be positive");
  TestFunction out;
  out.fn = [f = fn, scale](double x) { return f(x / scale); };
  out.one_radius = one_radius * scale;
  if (zero_tail) out.zero_tail = *zero_tail * scale;
  for (double b : breakpoints) out.breakpoints.push_back(b * scale);
  return out;
}

void TestFunction::validate() const {
  if (!fn) throw std::invalid_argument("TestFunction: empty callable");
  if (!(one_radius > 0.0)) throw std::invalid_argument("TestFunction: one_radius must be positive");
  for (int i = -400; i <= 400; ++i) {
    const double x = std::sinh(static_cast<double>(i) / 40.0) * one_radius;
    const double v = fn(x);
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("TestFunction: value outside [0, 1]");
    if (std::abs(x) <= one_radius && v != 1.0) {
      throw std::invalid_argument("TestFunction: phi must equal 1 on [-one_radius, one_radius]");
    }
  }
  if (zero_tail && fn(*zero_tail * 1.5 + 1.0) != 0.0) {
    throw std::invalid_argument("TestFunction: declared zero tail violated");
  }
}

TestFunction TestFunction::constant_one() {
  return TestFunction{[](double) { return 1.0; }, 1.0, std::nullopt, {}};
}

TestFunction TestFunction::indicator_below(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("indicator_below: threshold must be positive");
  return TestFunction{[c](double x) { return x <= c ? 1.0 : 0.0; }, c, c, {c}};
}

TestFunction TestFunction::exp_minus(std::function<double(double)> g, double radius,
                                     std::vector<double> breakpoints) {
  return TestFunction{[g = std::move(g)](double x) { return std::exp(-g(x)); }, radius, std::nullopt,
                      std::move(breakpoints)};
}

// ---------------------------------------------------------------------------
// Operations

double pgf_eval(const OffspringLaw& law, double s) {
  check_unit_interval(s, "pgf_eval");
  return law.pgf(s);
}

double extinction_prob(const OffspringLaw& law) {
  if (law.probability(0) == 0.0) return 0.0;
  // g(s) = f(s) - s: g(0) = p0 > 0, g < 0 just below 1 for a supercritical law.
  double lo = 0.0;
  double hi = 1.0 - 1e-9;
  if (law.pgf(hi) - hi >= 0.0) throw NumericalError("extinction_prob: no sign change on [0, 1-1e-9]");
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (law.pgf(mid) - mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double q = 0.5 * (lo + hi);
  if (std::abs(law.pgf(q) - q) > 1e-10) throw NumericalError("extinction_prob: bisection did not converge");
  return q;
}

Rates rates(const OffspringLaw& law) {
  const double beta = law.branching_rate();
  const double q = extinction_prob(law);
  return Rates{beta * (law.mean() - 1.0), beta * (1.0 - law.pgf_derivative(q))};
}

double complement_flow(const OffspringLaw& law, double u, double t) {
  if (t < 0.0) throw std::domain_error("complement_flow: negative time");
  if (u <= 0.0) return 0.0;
  const double beta = law.branching_rate();
  // log u keeps relative accuracy when u is tiny
  OdeState<1> y{std::log(u)};
  integrate_ode<1>(
      [&](const OdeState<1>& x, OdeState<1>& dx, double) {
        const double v = std::min(std::exp(x[0]), 1.0);
        dx[0] = beta * (law.complement_pgf(v) / v - 1.0);
      },
      y, 0.0, t, kFlowTolerance);
  return std::exp(y[0]);
}

double pgf_flow(const OffspringLaw& law, double s, double t) {
  check_unit_interval(s, "pgf_flow");
  if (t < 0.0) throw std::domain_error("pgf_flow: negative time");
  s = std::min(s, 1.0);
  return 1.0 - complement_flow(law, 1.0 - s, t);
}

cplx pgf_flow(const OffspringLaw& law, cplx s, double t) {
  if (std::abs(s) > 1.0 + 1e-12) throw std::domain_error("pgf_flow: |s| > 1");
  if (t < 0.0) throw std::domain_error("pgf_flow: negative time");
  const double beta = law.branching_rate();
  OdeState<2> y{s.real(), s.imag()};
  integrate_ode<2>(
      [&](const OdeState<2>& x, OdeState<2>& dx, double) {
        const cplx f{x[0], x[1]};
        const cplx d = beta * (law.pgf(f) - f);
        dx[0] = d.real();
        dx[1] = d.imag();
      },
      y, 0.0, t, kFlowTolerance);
  return {y[0], y[1]};
}

double survival_prob(const OffspringLaw& law, double t) { return complement_flow(law, 1.0, t); }

double v_function(const OffspringLaw& law, double s) {
  check_unit_interval(s, "v_function");
  const double q = extinction_prob(law);
  const double d = s - q;
  return d * d * v_kernel(law.pmf(), q, s);
}

namespace {

template <class T>
T a_function_impl(const OffspringLaw& law, T s) {
  const double q = extinction_prob(law);
  const double beta = law.branching_rate();
  const double rho = rates(law).rho;
  constexpr std::size_t N = std::is_same_v<T, cplx> ? 2 : 1;
  OdeState<N> y{};
  const T d0 = s - q;
  if constexpr (N == 2) {
    y = {d0.real(), d0.imag()};
  } else {
    y = {d0};
  }
  // D(t) = e^{rho t} (F(s, t) - q) obeys D' = beta e^{-rho t} D^2 kernel(q + e^{-rho t} D).
  const auto rhs = [&](const OdeState<N>& x, OdeState<N>& dx, double t) {
    const double decay = std::exp(-rho * t);
    T big_d;
    if constexpr (N == 2) {
      big_d = cplx{x[0], x[1]};
    } else {
      big_d = x[0];
    }
    const T rate = beta * decay * big_d * big_d * v_kernel(law.pmf(), q, T(q + decay * big_d));
    if constexpr (N == 2) {
      dx[0] = rate.real();
      dx[1] = rate.imag();
    } else {
      dx[0] = rate;
    }
  };
  const double cap = 60.0 / rho + 60.0;
  double t = 0.0;
  while (t < cap) {
    const OdeState<N> before = y;
    integrate_ode<N>(rhs, y, t, t + 1.0, kFlowTolerance);
    t += 1.0;
    double change = 0.0;
    for (std::size_t i = 0; i < N; ++i) change += (y[i] - before[i]) * (y[i] - before[i]);
    if (std::sqrt(change) < 1e-10) {
      if constexpr (N == 2) {
        return cplx{y[0], y[1]};
      } else {
        return y[0];
      }
    }
  }
  throw NumericalError("a_function: integrand tail did not fall below tolerance by the cap time");
}

}  // namespace

double a_function(const OffspringLaw& law, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("a_function: argument outside [0, 1)");
  return a_function_impl<double>(law, s);
}

cplx a_function(const OffspringLaw& law, cplx s) {
  if (!(std::abs(s) < 1.0)) throw std::domain_error("a_function: |s| must be < 1");
  return a_function_impl<cplx>(law, s);
}

double w_laplace(const OffspringLaw& law, double theta) {
  if (!(theta >= 0.0)) throw std::domain_error("w_laplace: theta must be non-negative");
  if (theta == 0.0) return 1.0;
  const double lambda = rates(law).lambda;
  // phi_n = F(exp(-theta e^{-lambda n}), n), tracked through 1 - F. Start where
  // theta e^{-lambda n} <= 1 so early iterates are not all stuck near F(0, n).
  const int first = std::max(0, static_cast<int>(std::ceil(std::log(theta) / lambda)));
  double previous = 1.0 - complement_flow(law, -std::expm1(-theta * std::exp(-lambda * first)), first);
  const int cap = first + static_cast<int>(std::ceil(400.0 / lambda)) + 10;
  for (int n = first + 1; n <= cap; ++n) {
    const double u0 = -std::expm1(-theta * std::exp(-lambda * n));
    const double current = 1.0 - complement_flow(law, u0, static_cast<double>(n));
    if (std::abs(current - previous) < 1e-10) return current;
    previous = current;
  }
  throw NumericalError("w_laplace: iteration did not converge");
}

double vartheta(const OffspringLaw& law) {
  const double lambda = rates(law).lambda;
  const double horizon = discount_horizon(lambda);
  // Survival probability is smooth but its scale is set by rho; split the range.
  const std::vector<double> cuts{1.0 / lambda, 4.0 / lambda, 12.0 / lambda};
  return integrate_piecewise(
      [&](double r) { return std::exp(-lambda * r) * survival_prob(law, r); }, 0.0, horizon, cuts,
      1e-13);
}

double vartheta_star(const OffspringLaw& law, const StableMotionParams& stable) {
  return stable.q1() / stable.alpha() * vartheta(law);
}

GwDerived derive(const OffspringLaw& law) {
  GwDerived out;
  out.q = extinction_prob(law);
  const Rates r = rates(law);
  out.lambda = r.lambda;
  out.rho = r.rho;
  out.theta = vartheta(law);
  return out;
}

std::vector<double> z_pmf(const OffspringLaw& law, double r, std::size_t kmax, std::size_t points,
                          std::optional<double> radius) {
  const double rad = radius.value_or(default_cauchy_radius(points));
  return cauchy_coefficients([&](cplx s) { return pgf_flow(law, s, r); }, points, rad, kmax);
}

// ---------------------------------------------------------------------------
// Law of T

TLaw::TLaw(const OffspringLaw& law, std::size_t kmax, std::size_t points) {
  if (kmax < 1) throw std::invalid_argument("TLaw: kmax must be >= 1");
  const double lambda = rates(law).lambda;
  const double beta = law.branching_rate();
  const double horizon = discount_horizon(lambda);
  const double theta = vartheta(law);
  // theta * E s^T = int_0^inf e^{-lambda r} (F(s, r) - F(0, r)) dr
  const auto generating = [&](cplx s) -> cplx {
    OdeState<6> y{s.real(), s.imag(), 0.0, 0.0, 0.0, 0.0};
    integrate_ode<6>(
        [&](const OdeState<6>& x, OdeState<6>& dx, double r) {
          const cplx fs{x[0], x[1]};
          const cplx ds = beta * (law.pgf(fs) - fs);
          dx[0] = ds.real();
          dx[1] = ds.imag();
          dx[2] = beta * (law.pgf(x[2]) - x[2]);
          dx[3] = 0.0;
          const double w = std::exp(-lambda * r);
          dx[4] = w * (x[0] - x[2]);
          dx[5] = w * x[1];
        },
        y, 0.0, horizon, kFlowTolerance);
    return cplx{y[4], y[5]};
  };
  const auto coefficients = cauchy_coefficients(generating, points, default_cauchy_radius(points), kmax);
  pmf_.resize(kmax);
  cdf_.resize(kmax);
  double acc = 0.0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    pmf_[k - 1] = std::max(0.0, coefficients[k] / theta);
    acc += pmf_[k - 1];
    cdf_[k - 1] = acc;
  }
  if (acc > 1.0 + 1e-8) throw NumericalError("TLaw: table mass exceeds one");
  if (acc > 1.0) {
    for (double& c : cdf_) c /= acc;
    for (double& p : pmf_) p /= acc;
  }
}

double TLaw::pmf(std::size_t k) const {
  if (k < 1 || k > pmf_.size()) return 0.0;
  return pmf_[k - 1];
}

double TLaw::truncated_mean(std::size_t cap) const {
  if (cap > pmf_.size()) throw std::invalid_argument("TLaw::truncated_mean: cap beyond table");
  double mean = 0.0;
  for (std::size_t k = 1; k <= cap; ++k) mean += static_cast<double>(k) * pmf_[k - 1];
  const double above = 1.0 - (cap == 0 ? 0.0 : cdf_[cap - 1]);
  return mean + static_cast<double>(cap) * above;
}

std::uint64_t TLaw::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (u < cdf_.back()) {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
  }
  const double k = static_cast<double>(pmf_.size());
  return static_cast<std::uint64_t>(std::floor(k / rng.uniform_open())) + 1;
}

double t_law_pmf(const OffspringLaw& law, std::size_t k) {
  if (k < 1) throw std::domain_error("t_law_pmf: k must be >= 1");
  const std::size_t kmax = std::max<std::size_t>(k, 64);
  std::size_t points = 1024;
  while (points < 8 * kmax) points *= 2;
  return TLaw(law, kmax, points).pmf(k);
}

// ---------------------------------------------------------------------------
// C functional

double discounted_complement(const OffspringLaw& law, double s) {
  check_unit_interval(s, "discounted_complement");
  if (s >= 1.0) return 0.0;
  const double lambda = rates(law).lambda;
  const double beta = law.branching_rate();
  OdeState<2> y{1.0 - s, 0.0};
  integrate_ode<2>(
      [&](const OdeState<2>& x, OdeState<2>& dx, double r) {
        const double u = std::clamp(x[0], 0.0, 1.0);
        dx[0] = beta * (law.complement_pgf(u) - u);
        dx[1] = std::exp(-lambda * r) * x[0];
      },
      y, 0.0, discount_horizon(lambda), kFlowTolerance);
  return y[1];
}

double c_functional(const TestFunction& phi, const OffspringLaw& law, const StableMotionParams& stable) {
  phi.validate();
  const double alpha = stable.alpha();
  const double delta = phi.one_radius;
  const double w_max = std::pow(delta, -alpha);  // w = |x|^{-alpha}

  const auto side = [&](double sign, double weight) {
    if (weight == 0.0) return 0.0;
    double w_min = 0.0;
    double constant_part = 0.0;
    if (sign > 0.0 && phi.zero_tail) {
      // phi == 0 beyond c, where the integrand is G(0) = vartheta.
      w_min = std::pow(*phi.zero_tail, -alpha);
      constant_part = discounted_complement(law, 0.0) * w_min;
    }
    std::vector<double> cuts;
    for (double b : phi.breakpoints) {
      if (b * sign > delta) cuts.push_back(std::pow(std::abs(b), -alpha));
    }
    const double integral = integrate_piecewise(
        [&](double w) {
          const double x = sign * std::pow(w, -1.0 / alpha);
          return discounted_complement(law, std::clamp(phi(x), 0.0, 1.0));
        },
        w_min, w_max, cuts, 1e-10);
    return weight / alpha * (integral + constant_part);
  };
  return side(1.0, stable.q1()) + side(-1.0, stable.q2());
}

// ---------------------------------------------------------------------------

std::int64_t simulate_population(const OffspringLaw& law, double t, Rng& rng, std::int64_t initial,
                                 std::int64_t cap) {
  std::int64_t n = initial;
  double clock = 0.0;
  const double beta = law.branching_rate();
  while (n > 0) {
    clock += rng.exponential(beta * static_cast<double>(n));
    if (clock > t) break;
    n += law.sample(rng) - 1;
    if (n > cap) throw std::runtime_error("simulate_population: population cap exceeded");
  }
  return n;
}

}  // namespace blp
