#include "blp/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace blp {
namespace {

constexpr double kKLawMass = 1e-9;
constexpr std::size_t kKLawPoints = 2048;
constexpr std::size_t kKLawMax = 1000;

Estimate binomial(std::size_t hits, std::size_t n, double factor) {
  Estimate e;
  e.n = n;
  e.hits = hits;
  if (n == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  e.estimate = factor * p;
  e.stderr_ = factor * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return e;
}

// Upper atoms beyond `cutoff` of a Poisson process with intensity rate * q_side / alpha * alpha x^{-1-alpha} dx,
// generated in u = x^{-alpha}, largest first.
void add_side(PointMeasure& out, double rate, double alpha, double cutoff, double sign, const TLaw& t_law,
              Rng& rng, double first_gap = -1.0) {
  if (rate <= 0.0) return;
  const double u_max = std::pow(cutoff, -alpha);
  double u = first_gap >= 0.0 ? first_gap : rng.exponential(rate);
  while (u <= u_max) {
    out.add(sign * std::pow(u, -1.0 / alpha), t_law.sample(rng));
    u += rng.exponential(rate);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// K

KLaw::KLaw(const OffspringLaw& law, double phi_star, double q) {
  const double a_star = a_function(law, phi_star);
  const double slope = phi_star - q;
  // the argument stays inside the disk of radius phi_star < 1 on |s| = 1
  const auto coeffs = cauchy_coefficients(
      [&](cplx s) { return a_function(law, slope * s + q) / a_star; }, kKLawPoints, 1.0, kKLawMax);
  double mass = 0.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    const double p = std::max(coeffs[k], 0.0);
    pmf_.push_back(p);
    mass += p;
    if (mass >= 1.0 - kKLawMass) break;
  }
  if (mass < 1.0 - 1e-6) throw NumericalError("KLaw: coefficient mass " + std::to_string(mass) + " below 1");
  finish();
}

KLaw KLaw::geometric(double phi_star) {
  if (!(phi_star > 0.0 && phi_star < 1.0)) throw std::invalid_argument("KLaw::geometric: phi* must lie in (0, 1)");
  KLaw out;
  double mass = 0.0;
  for (std::size_t k = 1; mass < 1.0 - kKLawMass; ++k) {
    const double p = (1.0 - phi_star) * std::pow(phi_star, static_cast<double>(k - 1));
    out.pmf_.push_back(p);
    mass += p;
  }
  out.finish();
  return out;
}

void KLaw::finish() {
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
}

double KLaw::pmf(std::size_t k) const { return k >= 1 && k <= pmf_.size() ? pmf_[k - 1] : 0.0; }

std::uint64_t KLaw::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1)) + 1;
}

// ---------------------------------------------------------------------------
// bundle

LimitLawBundle::LimitLawBundle(OffspringLaw law, StableMotionParams stable, SlowVariation slow)
    : law_(std::move(law)), stable_(std::move(stable)), slow_(slow) {
  slow_.validate_for(stable_.alpha());
  derived_ = derive(law_);
  theta_star_ = stable_.q1() / stable_.alpha() * derived_.theta;
  phi_star_ = w_laplace(law_, theta_star_);
  a_phi_star_ = blp::a_function(law_, phi_star_);
}

double LimitLawBundle::phi(double theta) const { return w_laplace(law_, theta); }

double LimitLawBundle::a_function(double s) const { return blp::a_function(law_, s); }

double LimitLawBundle::h(double t) const { return h_of_t(slow_, alpha(), lambda(), t); }

double LimitLawBundle::limit_cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return (phi(theta_star_ * std::pow(x, -alpha())) - q()) / (1.0 - q());
}

double LimitLawBundle::pareto_cdf(double x) const { return x <= 1.0 ? 0.0 : 1.0 - std::pow(x, -alpha()); }

double LimitLawBundle::lower_target() const { return a_phi_star_ / (1.0 - q()); }

double LimitLawBundle::upper_finite_target(double x, double h_value) const {
  const double a = alpha();
  return (1.0 - phi(theta_star_ * std::pow(x, -a))) * std::pow(x, a) * slow_(h_value) / slow_(x * h_value);
}

double LimitLawBundle::c_functional(const TestFunction& phi) const { return blp::c_functional(phi, law_, stable_); }

double LimitLawBundle::laplace_target(const TestFunction& test) const { return phi(c_functional(test)); }

double LimitLawBundle::xi_laplace_target(const TestFunction& test) const {
  return a_function(phi(c_functional(test))) / a_phi_star_;
}

const TLaw& LimitLawBundle::t_law() const {
  std::call_once(t_once_, [this] { t_law_ = std::make_unique<TLaw>(law_); });
  return *t_law_;
}

const KLaw& LimitLawBundle::k_law() const {
  std::call_once(k_once_, [this] {
    k_law_ = std::make_unique<KLaw>(law_.is_yule() ? KLaw::geometric(phi_star_) : KLaw(law_, phi_star_, q()));
  });
  return *k_law_;
}

double LimitLawBundle::w_burn_in() const { return std::log(2e4) / lambda(); }

double LimitLawBundle::sample_w(Rng& rng) const {
  if (law_.is_yule()) return rng.exponential(1.0);
  const double b = w_burn_in();
  return std::exp(-lambda() * b) * static_cast<double>(simulate_population(law_, b, rng));
}

// ---------------------------------------------------------------------------
// estimators

Estimate upper_deviation_ratio(Maxima maxima, double t, double level, const LimitLawBundle& bundle) {
  if (!(level > 0.0)) throw std::invalid_argument("upper_deviation_ratio: level must be positive");
  std::size_t hits = 0;
  for (const auto& r : maxima) {
    if (r && *r > level) ++hits;
  }
  if (std::isinf(level)) return binomial(hits, maxima.size(), 0.0);
  const double log_factor = -bundle.lambda() * t + bundle.alpha() * std::log(level) - bundle.slow().log_value(level);
  return binomial(hits, maxima.size(), std::exp(log_factor));
}

KsResult conditional_pareto_ks(Maxima maxima, double level, double alpha) {
  std::vector<double> ratios;
  for (const auto& r : maxima) {
    if (r && *r > level) ratios.push_back(*r / level);
  }
  KsResult out;
  out.n = ratios.size();
  out.underpowered = ratios.size() < 100;
  if (ratios.empty()) {
    out.statistic = 1.0;
    return out;
  }
  out.statistic = ks_statistic(std::move(ratios), [alpha](double x) { return x <= 1.0 ? 0.0 : 1.0 - std::pow(x, -alpha); });
  return out;
}

LowerDeviation lower_deviation_ratio(Maxima maxima, double t, double level, const LimitLawBundle& bundle) {
  std::size_t survivors = 0;
  std::size_t hits = 0;
  for (const auto& r : maxima) {
    if (!r) continue;
    ++survivors;
    if (*r <= level) ++hits;
  }
  const double r_t = (bundle.alpha() * std::log(level) - bundle.slow().log_value(level)) / bundle.lambda();
  LowerDeviation out;
  out.ratio = binomial(hits, survivors, std::exp(bundle.rho() * (t - r_t)));
  out.extinct_fraction =
      maxima.empty() ? 0.0 : static_cast<double>(maxima.size() - survivors) / static_cast<double>(maxima.size());
  return out;
}

double one_big_jump_term(const TreeSnapshot& snap, const std::function<double(double)>& g, double a) {
  if (!snap.survived()) return 0.0;
  const PointMeasures m = point_measures(snap, a);
  return std::abs(i_functional(g, m.x) - i_functional(g, m.y));
}

OneBigJump one_big_jump_discrepancy(std::span<const double> terms, double t, double a, const LimitLawBundle& bundle) {
  OneBigJump out;
  const double n = static_cast<double>(terms.size());
  out.mean.n = terms.size();
  if (terms.empty()) return out;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : terms) {
    sum += v;
    sum_sq += v * v;
    if (v > 0.0) ++out.mean.hits;
  }
  out.mean.estimate = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * out.mean.estimate * out.mean.estimate) / (n - 1)) : 0.0;
  out.mean.stderr_ = std::sqrt(var / n);
  const double factor = std::exp(-bundle.lambda() * t + bundle.alpha() * std::log(a) - bundle.slow().log_value(a));
  out.normalized = factor * out.mean.estimate;
  out.normalized_stderr = factor * out.mean.stderr_;
  return out;
}

// ---------------------------------------------------------------------------
// limit samplers

PointMeasure sample_n_infinity(const LimitLawBundle& bundle, double w, double cutoff, Rng& rng) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("sample_n_infinity: cutoff must be positive");
  if (!(w >= 0.0)) throw std::invalid_argument("sample_n_infinity: W must be non-negative");
  PointMeasure out;
  if (w == 0.0) return out;
  const double a = bundle.alpha();
  const double base = bundle.theta() * w / a;
  add_side(out, base * bundle.stable().q1(), a, cutoff, 1.0, bundle.t_law(), rng);
  add_side(out, base * bundle.stable().q2(), a, cutoff, -1.0, bundle.t_law(), rng);
  return out;
}

PointMeasure sample_xi(const LimitLawBundle& bundle, double cutoff, Rng& rng, std::size_t budget) {
  if (!(cutoff > 0.0) || cutoff >= 1.0) throw std::invalid_argument("sample_xi: cutoff must lie in (0, 1)");
  const double a = bundle.alpha();
  const std::uint64_t k = bundle.k_law().sample(rng);
  PointMeasure out;
  std::size_t attempts = 0;
  for (std::uint64_t i = 0; i < k; ++i) {
    for (;;) {
      if (++attempts > budget) {
        throw RejectionBudgetError("sample_xi: rejection budget of " + std::to_string(budget) + " exhausted");
      }
      // N_infinity(R) > 0 exactly when W > 0
      const double w = bundle.sample_w(rng);
      if (!(w > 0.0)) continue;
      const double base = bundle.theta() * w / a;
      const double rate_up = base * bundle.stable().q1();
      // no atom in (1, inf) <=> first upper point has u = x^{-alpha} >= 1
      const double first = rng.exponential(rate_up);
      if (first < 1.0) continue;
      add_side(out, rate_up, a, cutoff, 1.0, bundle.t_law(), rng, first);
      add_side(out, base * bundle.stable().q2(), a, cutoff, -1.0, bundle.t_law(), rng);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// a.s. proxies and sup-R

std::vector<ProxyRow> as_proxies(std::span<const double> horizons, std::span<const std::vector<std::optional<double>>> maxima,
                                 const std::function<double(double)>& big_g, const LimitLawBundle& bundle) {
  if (horizons.size() != maxima.size()) throw std::invalid_argument("as_proxies: one sample per horizon required");
  static constexpr double kLevels[] = {0.1, 0.25, 0.5, 0.75, 0.9};
  std::vector<ProxyRow> rows;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const double t = horizons[i];
    const double norm = t > 1.0 ? as_norming(bundle.slow(), bundle.alpha(), bundle.lambda(), t, NormingKind::liminf)
                                : std::numeric_limits<double>::quiet_NaN();
    const double g_t = big_g(t);
    std::vector<double> liminf_ratio;
    std::vector<double> g_ratio;
    std::vector<double> log_rate;
    std::size_t above_g = 0;
    for (const auto& r : maxima[i]) {
      if (!r) continue;
      if (t > 1.0) liminf_ratio.push_back(*r / norm);
      g_ratio.push_back(*r / g_t);
      log_rate.push_back(*r > 0.0 ? std::log(*r) / t : -std::numeric_limits<double>::infinity());
      if (*r > g_t) ++above_g;
    }
    if (log_rate.empty()) continue;
    for (double p : kLevels) {
      if (!liminf_ratio.empty()) rows.push_back({t, "R/H(e^{-lt}log t)", p, quantile(liminf_ratio, p)});
      rows.push_back({t, "R/G", p, quantile(g_ratio, p)});
      rows.push_back({t, "log R+/t", p, quantile(log_rate, p)});
    }
    rows.push_back({t, "P(R>G)", -1.0, static_cast<double>(above_g) / static_cast<double>(maxima[i].size())});
  }
  return rows;
}

std::vector<SupRow> sup_r_inequality_check(std::span<const double> tree_sups, std::span<const double> path_sups,
                                           double lambda, double t, std::span<const double> x_grid) {
  if (tree_sups.empty() || path_sups.empty()) throw std::invalid_argument("sup_r_inequality_check: empty sample");
  const double growth = std::exp(lambda * t);
  std::vector<SupRow> rows;
  for (double x : x_grid) {
    const auto count = [x](std::span<const double> v) {
      return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [x](double s) { return s >= x; }));
    };
    const Estimate left = binomial(count(tree_sups), tree_sups.size(), 1.0);
    const Estimate right = binomial(count(path_sups), path_sups.size(), growth);
    SupRow row;
    row.x = x;
    row.tree_side = left.estimate;
    row.path_side = right.estimate;
    row.pooled_stderr = std::hypot(left.stderr_, right.stderr_);
    row.holds = row.tree_side <= row.path_side + 3.0 * row.pooled_stderr;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// test-function panel

double smooth_ramp(double x, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double u = (x - a) / (b - a);
  return u * u * (3.0 - 2.0 * u);
}

std::vector<PanelFunction> laplace_panel() {
  return {
      {"upper_ramp", [](double x) { return 0.5 * smooth_ramp(x, 0.1, 0.6); }},
      {"two_sided", [](double x) { return 0.3 * smooth_ramp(std::abs(x), 0.1, 0.5); }},
      {"skewed", [](double x) { return smooth_ramp(x, 0.2, 1.0) + 0.5 * smooth_ramp(-x, 0.2, 1.0); }},
  };
}

TestFunction exp_minus(const PanelFunction& f) {
  return TestFunction::exp_minus(f.g, 0.1);
}

TestFunction truncated_exp_minus(const PanelFunction& f) {
  TestFunction out;
  out.fn = [g = f.g](double x) { return x > 1.0 ? 0.0 : std::exp(-g(x)); };
  out.one_radius = 0.1;
  out.zero_tail = 1.0;
  out.breakpoints = {1.0};
  return out;
}

// ---------------------------------------------------------------------------
// statistics

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  // linear interpolation between order statistics
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_pvalue(double statistic, double effective_n) {
  const double root = std::sqrt(effective_n);
  const double z = (root + 0.12 + 0.11 / root) * statistic;
  if (z < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * z * z);
    sum += term;
    if (std::abs(term) < 1e-12 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace blp
