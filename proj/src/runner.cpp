#include "blp/runner.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <set>
#include <sstream>

#include "blp/replicate.hpp"

namespace blp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kVersion = "1.0.0";

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::weak_limit_rt, "weak_limit_rt"},
      {ExperimentKind::upper_deviation, "upper_deviation"},
      {ExperimentKind::pareto_conditional, "pareto_conditional"},
      {ExperimentKind::lower_deviation, "lower_deviation"},
      {ExperimentKind::one_big_jump, "one_big_jump"},
      {ExperimentKind::n_infinity_compare, "n_infinity_compare"},
      {ExperimentKind::xi_compare, "xi_compare"},
      {ExperimentKind::as_proxies, "as_proxies"},
      {ExperimentKind::sup_r_check, "sup_r_check"},
      {ExperimentKind::gw_tables, "gw_tables"},
  };
  return names;
}

// ---------------------------------------------------------------------------
// field parsing

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& field, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field + ": expected a finite number, got '" + text + "'");
  }
}

std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(field + ": expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(field + ": integer out of range: '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_real(field, item));
  if (out.empty()) throw ConfigError(field + ": expected a comma-separated list of numbers");
  return out;
}

std::map<int, double> parse_offspring(const std::string& field, const std::string& text) {
  std::map<int, double> out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(field + ": entries must look like k:p, got '" + item + "'");
    const std::string k_text = trim(item.substr(0, colon));
    const auto k = parse_unsigned(field, k_text);
    if (k > 10000) throw ConfigError(field + ": offspring number " + k_text + " too large");
    if (out.count(static_cast<int>(k))) throw ConfigError(field + ": offspring number " + k_text + " repeated");
    out[static_cast<int>(k)] = parse_real(field, trim(item.substr(colon + 1)));
  }
  if (out.empty()) throw ConfigError(field + ": empty offspring law");
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// experiment plumbing

std::uint64_t stream_base(ExperimentKind kind, std::size_t horizon_index, std::uint64_t sub) {
  return ((static_cast<std::uint64_t>(kind) + 1) << 48) | ((static_cast<std::uint64_t>(horizon_index) + 1) << 36) |
         (sub << 34);
}

ResultRow make_row(ExperimentKind kind, std::string quantity, double t, double x, double estimate, double stderr_,
                   double target, std::size_t n, std::size_t failures) {
  ResultRow r;
  r.experiment = to_string(kind);
  r.quantity = std::move(quantity);
  r.t = t;
  r.x = x;
  r.estimate = estimate;
  r.stderr_ = stderr_;
  r.target = target;
  r.ratio = std::isfinite(target) && target != 0.0 ? estimate / target : kNaN;
  r.n = n;
  r.failures = failures;
  return r;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return {kNaN, kNaN};
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.se = v.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return out;
}

template <class R, class F>
Replicated<R> run_trees(const ExperimentConfig& c, ExperimentKind kind, std::size_t hidx, double t, int threads,
                        SimulationOptions opts, F digest) {
  const ModelParams model = c.model.model();
  opts.population_cap = c.population_cap;
  return replicate<R>(c.replications, c.master_seed, stream_base(kind, hidx, 0), threads,
                      [&](Rng& rng, std::size_t) { return digest(simulate(model, t, rng, opts)); });
}

std::vector<std::optional<double>> maxima_of(const Replicated<std::optional<double>>& rep) {
  return rep.successes();
}

// Monotone limit CDF on a log grid; direct evaluation outside [lo, hi].
std::function<double(double)> tabulated_cdf(const LimitLawBundle& bundle) {
  constexpr double lo = 1e-3;
  constexpr double hi = 1e4;
  constexpr int points = 4000;
  auto values = std::make_shared<std::vector<double>>(points + 1);
  const double step = std::log(hi / lo) / points;
  for (int i = 0; i <= points; ++i) (*values)[i] = bundle.limit_cdf(lo * std::exp(step * i));
  return [values, step, &bundle](double x) {
    if (!(x > lo) || !(x < hi)) return bundle.limit_cdf(x);
    const double pos = std::log(x / lo) / step;
    const auto i = std::min(static_cast<int>(pos), points - 1);
    const double frac = pos - i;
    return (*values)[i] + frac * ((*values)[i + 1] - (*values)[i]);
  };
}

// g = 1 minus a smooth bump outside [-1, 1]
double big_jump_test(double x) { return 1.0 - 0.5 * smooth_ramp(std::abs(x), 1.0, 2.0); }

std::vector<ResultRow> weak_limit(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::weak_limit_rt;
  std::vector<ResultRow> rows;
  const auto cdf = tabulated_cdf(b);
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const auto rep = run_trees<std::optional<double>>(c, kind, i, t, threads, {},
                                                      [](const TreeSnapshot& s) { return s.max_position; });
    const double h = b.h(t);
    std::vector<double> scaled;
    for (const auto& r : rep.successes()) {
      if (r) scaled.push_back(*r / h);
    }
    const std::size_t n = scaled.size();
    for (double x : c.x_grid) {
      const auto below = static_cast<double>(std::count_if(scaled.begin(), scaled.end(), [x](double v) { return v <= x; }));
      const double p = n ? below / static_cast<double>(n) : kNaN;
      rows.push_back(make_row(kind, "cdf", t, x, p, n ? std::sqrt(p * (1 - p) / n) : kNaN, b.limit_cdf(x), n,
                              rep.failures));
    }
    const double ks = n ? ks_statistic(scaled, cdf) : kNaN;
    rows.push_back(make_row(kind, "ks", t, kNaN, ks, kNaN, kNaN, n, rep.failures));
  }
  return rows;
}

std::vector<ResultRow> upper_deviation(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::upper_deviation;
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const auto rep = run_trees<std::optional<double>>(c, kind, i, t, threads, {},
                                                      [](const TreeSnapshot& s) { return s.max_position; });
    const auto maxima = maxima_of(rep);
    const double h = b.h(t);
    for (double x : c.x_grid) {
      const Estimate e = upper_deviation_ratio(maxima, t, x * h, b);
      rows.push_back(make_row(kind, "normalized", t, x, e.estimate, e.stderr_, b.upper_finite_target(x, h), e.n,
                              rep.failures));
      rows.push_back(make_row(kind, "vs_theta_star", t, x, e.estimate, e.stderr_, b.theta_star(), e.n, rep.failures));
    }
  }
  return rows;
}

std::vector<ResultRow> pareto_conditional(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::pareto_conditional;
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const auto rep = run_trees<std::optional<double>>(c, kind, i, t, threads, {},
                                                      [](const TreeSnapshot& s) { return s.max_position; });
    const auto maxima = maxima_of(rep);
    for (double x : c.x_grid) {
      const KsResult ks = conditional_pareto_ks(maxima, x * b.h(t), b.alpha());
      rows.push_back(make_row(kind, ks.underpowered ? "ks_underpowered" : "ks", t, x, ks.statistic, kNaN, kNaN, ks.n,
                              rep.failures));
    }
  }
  return rows;
}

std::vector<ResultRow> lower_deviation(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::lower_deviation;
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const auto rep = run_trees<std::optional<double>>(c, kind, i, t, threads, {},
                                                      [](const TreeSnapshot& s) { return s.max_position; });
    const auto maxima = maxima_of(rep);
    const double level = std::exp(c.lambda_c * b.lambda() * t / b.alpha());
    const LowerDeviation d = lower_deviation_ratio(maxima, t, level, b);
    rows.push_back(make_row(kind, "normalized", t, level, d.ratio.estimate, d.ratio.stderr_, b.lower_target(),
                            d.ratio.n, rep.failures));
    const double n = static_cast<double>(maxima.size());
    const double p = d.extinct_fraction;
    rows.push_back(make_row(kind, "extinct_fraction", t, level, p, std::sqrt(p * (1 - p) / n),
                            1.0 - survival_prob(b.law(), t), maxima.size(), rep.failures));
  }
  return rows;
}

std::vector<ResultRow> one_big_jump(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::one_big_jump;
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const double a = std::exp(c.a_exponent * t);
    const auto rep = run_trees<double>(c, kind, i, t, threads, {},
                                       [a](const TreeSnapshot& s) { return one_big_jump_term(s, big_jump_test, a); });
    const auto terms = rep.successes();
    const OneBigJump d = one_big_jump_discrepancy(terms, t, a, b);
    rows.push_back(make_row(kind, "normalized", t, a, d.normalized, d.normalized_stderr, 0.0, terms.size(), rep.failures));
    rows.push_back(make_row(kind, "mean", t, a, d.mean.estimate, d.mean.stderr_, 0.0, terms.size(), rep.failures));
  }
  return rows;
}

std::vector<ResultRow> n_infinity_compare(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::n_infinity_compare;
  const auto panel = laplace_panel();
  std::vector<double> targets;
  for (const auto& f : panel) targets.push_back(b.laplace_target(exp_minus(f)));
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const double h = b.h(t);
    const auto rep = run_trees<std::vector<double>>(c, kind, i, t, threads, {}, [&](const TreeSnapshot& s) {
      const PointMeasures m = point_measures(s, h);
      std::vector<double> v;
      for (const auto& f : panel) v.push_back(std::exp(-m.x.integrate(f.g)));
      return v;
    });
    const auto sampled = replicate<std::vector<double>>(
        c.limit_samples, c.master_seed, stream_base(kind, i, 1), threads, [&](Rng& rng, std::size_t) {
          const PointMeasure nu = sample_n_infinity(b, b.sample_w(rng), c.cutoff, rng);
          std::vector<double> v;
          for (const auto& f : panel) v.push_back(std::exp(-nu.integrate(f.g)));
          return v;
        });
    const auto tree_values = rep.successes();
    const auto limit_values = sampled.successes();
    for (std::size_t j = 0; j < panel.size(); ++j) {
      std::vector<double> a;
      std::vector<double> s;
      for (const auto& v : tree_values) a.push_back(v[j]);
      for (const auto& v : limit_values) s.push_back(v[j]);
      const MeanSe ta = mean_se(a);
      const MeanSe sa = mean_se(s);
      rows.push_back(make_row(kind, "tree_" + panel[j].name, t, kNaN, ta.mean, ta.se, targets[j], a.size(), rep.failures));
      rows.push_back(make_row(kind, "sampled_" + panel[j].name, t, kNaN, sa.mean, sa.se, targets[j], s.size(),
                              sampled.failures));
    }
  }
  return rows;
}

std::vector<ResultRow> xi_compare(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::xi_compare;
  const auto panel = laplace_panel();
  std::vector<double> targets;
  for (const auto& f : panel) targets.push_back(b.xi_laplace_target(truncated_exp_minus(f)));
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    const double level = std::exp(c.lambda_c * b.lambda() * t / b.alpha());
    using Digest = std::optional<std::vector<double>>;
    const auto rep = run_trees<Digest>(c, kind, i, t, threads, {}, [&](const TreeSnapshot& s) -> Digest {
      if (!s.max_position || *s.max_position > level) return std::nullopt;
      const PointMeasures m = point_measures(s, level);
      std::vector<double> v;
      for (const auto& f : panel) v.push_back(std::exp(-m.x.integrate(f.g)));
      return v;
    });
    const auto sampled = replicate<std::vector<double>>(
        c.limit_samples, c.master_seed, stream_base(kind, i, 1), threads, [&](Rng& rng, std::size_t) {
          const PointMeasure nu = sample_xi(b, c.cutoff, rng);
          std::vector<double> v;
          for (const auto& f : panel) v.push_back(std::exp(-nu.integrate(f.g)));
          return v;
        });
    std::vector<std::vector<double>> conditioned;
    for (const auto& d : rep.successes()) {
      if (d) conditioned.push_back(*d);
    }
    const auto limit_values = sampled.successes();
    for (std::size_t j = 0; j < panel.size(); ++j) {
      std::vector<double> a;
      std::vector<double> s;
      for (const auto& v : conditioned) a.push_back(v[j]);
      for (const auto& v : limit_values) s.push_back(v[j]);
      const MeanSe ta = mean_se(a);
      const MeanSe sa = mean_se(s);
      rows.push_back(make_row(kind, "tree_" + panel[j].name, t, level, ta.mean, ta.se, targets[j], a.size(),
                              rep.failures));
      rows.push_back(make_row(kind, "sampled_" + panel[j].name, t, level, sa.mean, sa.se, targets[j], s.size(),
                              sampled.failures));
    }
  }
  return rows;
}

std::vector<ResultRow> as_proxy_rows(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::as_proxies;
  std::vector<std::vector<std::optional<double>>> samples;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const auto rep = run_trees<std::optional<double>>(c, kind, i, c.horizons[i], threads, {},
                                                      [](const TreeSnapshot& s) { return s.max_position; });
    samples.push_back(rep.successes());
    failures += rep.failures;
  }
  const double kappa = c.g_exponent;
  const auto big_g = [&](double t) { return std::exp(kappa * b.lambda() * t / b.alpha()); };
  std::vector<ResultRow> rows;
  for (const ProxyRow& p : as_proxies(c.horizons, samples, big_g, b)) {
    const bool median_rate = p.quantity == "log R+/t" && p.p == 0.5;
    const double target = median_rate ? b.lambda() / b.alpha() : kNaN;
    const double x = p.p < 0.0 ? big_g(p.t) : p.p;
    std::size_t n = 0;
    for (std::size_t i = 0; i < c.horizons.size(); ++i) {
      if (c.horizons[i] == p.t) n = samples[i].size();
    }
    rows.push_back(make_row(kind, p.quantity, p.t, x, p.value, kNaN, target, n, failures));
  }
  return rows;
}

std::vector<ResultRow> sup_r_check(const ExperimentConfig& c, const LimitLawBundle& b, int threads) {
  const auto kind = ExperimentKind::sup_r_check;
  const StableMotionParams stable = b.stable();
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    const double t = c.horizons[i];
    SimulationOptions opts;
    opts.record_sup_path = true;
    opts.sup_subdivisions = c.sup_subdivisions;
    const auto rep = run_trees<double>(c, kind, i, t, threads, opts,
                                       [](const TreeSnapshot& s) { return *s.sup_max_position; });
    // same resolution as an ancestral line with its expected number of edges
    const double edges = std::ceil(b.law().branching_rate() * b.law().mean() * t + 1.0);
    const int steps = static_cast<int>(c.sup_subdivisions * edges);
    const auto paths = replicate<double>(c.paths, c.master_seed, stream_base(kind, i, 1), threads,
                                         [&](Rng& rng, std::size_t) { return sample_path_supremum(stable, t, steps, rng); });
    const auto tree_sups = rep.successes();
    const auto path_sups = paths.successes();
    std::vector<double> grid;
    const double h = b.h(t);
    for (double x : c.x_grid) grid.push_back(x * h);
    for (const SupRow& r : sup_r_inequality_check(tree_sups, path_sups, b.lambda(), t, grid)) {
      rows.push_back(make_row(kind, "tree_vs_paths", t, r.x / h, r.tree_side, r.pooled_stderr, r.path_side,
                              tree_sups.size(), rep.failures));
      rows.push_back(make_row(kind, "holds", t, r.x / h, r.holds ? 1.0 : 0.0, kNaN, 1.0, tree_sups.size(),
                              rep.failures + paths.failures));
    }
  }
  return rows;
}

std::vector<ResultRow> gw_tables(const ExperimentConfig& c, const LimitLawBundle& b) {
  const auto kind = ExperimentKind::gw_tables;
  std::vector<ResultRow> rows;
  const auto constant = [&](const char* name, double v) { rows.push_back(make_row(kind, name, kNaN, kNaN, v, kNaN, kNaN, 0, 0)); };
  constant("lambda", b.lambda());
  constant("rho", b.rho());
  constant("q", b.q());
  constant("theta", b.theta());
  constant("theta_star", b.theta_star());
  constant("phi_theta_star", b.phi_star());
  constant("A_phi_theta_star", b.a_phi_star());
  constant("lower_target", b.lower_target());
  for (std::size_t k = 1; k <= c.table_kmax; ++k) {
    rows.push_back(make_row(kind, "T_pmf", kNaN, static_cast<double>(k), b.t_law().pmf(k), kNaN, kNaN, 0, 0));
  }
  for (std::size_t k = 1; k <= c.table_kmax; ++k) {
    rows.push_back(make_row(kind, "K_pmf", kNaN, static_cast<double>(k), b.k_law().pmf(k), kNaN, kNaN, 0, 0));
  }
  for (double t : c.horizons) {
    rows.push_back(make_row(kind, "survival", t, kNaN, survival_prob(b.law(), t), kNaN, kNaN, 0, 0));
    rows.push_back(make_row(kind, "h", t, kNaN, b.h(t), kNaN, kNaN, 0, 0));
  }
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names()) {
    if (n == name) return k;
  }
  throw ConfigError("run.experiments: unknown experiment '" + name + "'");
}

OffspringLaw ModelConfig::law() const { return OffspringLaw(offspring, beta); }

StableMotionParams ModelConfig::stable() const {
  if (c_star) return StableMotionParams::from_c_star(alpha, *c_star);
  return StableMotionParams::from_tails(alpha, q1.value_or(0.0), q2.value_or(0.0));
}

SlowVariation ModelConfig::slow() const {
  if (slow_family == "constant") return SlowVariation::constant(slow_parameter);
  if (slow_family == "log_power") return SlowVariation::log_power(slow_parameter);
  throw ConfigError("model.slow: unknown family '" + slow_family + "' (constant or log_power)");
}

ModelParams ModelConfig::model() const { return ModelParams{law(), stable(), start_position}; }

void ExperimentConfig::validate() const {
  const auto wrap = [](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(field) + ": " + e.what());
    }
  };
  wrap("model.offspring", [&] { (void)model.law(); });
  if (model.c_star && (model.q1 || model.q2)) throw ConfigError("model: give either c_star or q1/q2, not both");
  if (!model.c_star && !model.q1) throw ConfigError("model.q1: required unless c_star is given");
  wrap("model.alpha/q1/q2/c_star", [&] { (void)model.stable(); });
  wrap("model.slow", [&] { model.slow().validate_for(model.alpha); });
  if (experiments.empty()) throw ConfigError("run.experiments: at least one experiment is required");
  // the samplers are exact strictly stable laws, i.e. L == 1
  const bool simulates = std::any_of(experiments.begin(), experiments.end(),
                                     [](ExperimentKind k) { return k != ExperimentKind::gw_tables; });
  if (simulates && !(model.slow_family == "constant" && model.slow_parameter == 1.0)) {
    throw ConfigError("model.slow: simulation experiments require slow = constant with slow_parameter = 1");
  }
  if (replications < 1) throw ConfigError("run.replications: must be >= 1");
  if (replications > (std::uint64_t{1} << 34)) throw ConfigError("run.replications: too large");
  if (horizons.empty()) throw ConfigError("run.horizons: at least one horizon is required");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw ConfigError("run.horizons: horizons must be positive");
    if (i > 0 && !(horizons[i] > horizons[i - 1])) throw ConfigError("run.horizons: horizons must be increasing");
  }
  if (parallelism < 1) throw ConfigError("run.parallelism: must be >= 1");
  if (population_cap < 1) throw ConfigError("run.population_cap: must be >= 1");
  for (double x : x_grid) {
    if (!(x > 0.0)) throw ConfigError("params.x_grid: entries must be positive");
  }
  if (!(lambda_c > 0.0 && lambda_c < 1.0)) throw ConfigError("params.lambda_c: must lie in (0, 1)");
  if (!(a_exponent > 0.0)) throw ConfigError("params.a_exponent: must be positive");
  if (!(g_exponent > 0.0)) throw ConfigError("params.g_exponent: must be positive");
  if (!(cutoff > 0.0 && cutoff < 0.1)) throw ConfigError("params.cutoff: must lie in (0, 0.1)");
  if (limit_samples < 1) throw ConfigError("params.limit_samples: must be >= 1");
  if (paths < 1) throw ConfigError("params.paths: must be >= 1");
  if (sup_subdivisions < 1) throw ConfigError("params.sup_subdivisions: must be >= 1");
  if (table_kmax < 1) throw ConfigError("params.table_kmax: must be >= 1");
}

ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> known{
      {"model", {"offspring", "beta", "alpha", "q1", "q2", "c_star", "c_star_im", "slow", "slow_parameter",
                 "start_position"}},
      {"run", {"experiments", "horizons", "replications", "master_seed", "parallelism", "output", "population_cap"}},
      {"params", {"x_grid", "lambda_c", "a_exponent", "g_exponent", "cutoff", "limit_samples", "paths",
                  "sup_subdivisions", "table_kmax"}},
  };
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty() && body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key + ": unknown key");
      c.echo[section + "." + key] = trim(value.data());
    }
  }
  const auto get = [&](const std::string& field) -> std::optional<std::string> {
    const auto e = c.echo.find(field);
    if (e == c.echo.end()) return std::nullopt;
    return e->second;
  };
  const auto real = [&](const std::string& field, double& slot) {
    if (auto v = get(field)) slot = parse_real(field, *v);
  };
  if (auto v = get("model.offspring")) c.model.offspring = parse_offspring("model.offspring", *v);
  real("model.beta", c.model.beta);
  real("model.alpha", c.model.alpha);
  if (auto v = get("model.q1")) c.model.q1 = parse_real("model.q1", *v);
  if (auto v = get("model.q2")) c.model.q2 = parse_real("model.q2", *v);
  if (auto v = get("model.c_star")) {
    const double im = get("model.c_star_im") ? parse_real("model.c_star_im", *get("model.c_star_im")) : 0.0;
    c.model.c_star = std::complex<double>(parse_real("model.c_star", *v), im);
  } else if (get("model.c_star_im")) {
    throw ConfigError("model.c_star_im: requires model.c_star");
  }
  if (auto v = get("model.slow")) c.model.slow_family = *v;
  real("model.slow_parameter", c.model.slow_parameter);
  real("model.start_position", c.model.start_position);

  if (auto v = get("run.experiments")) {
    for (const auto& name : split(*v, ',')) c.experiments.push_back(parse_experiment_kind(name));
  }
  if (auto v = get("run.horizons")) c.horizons = parse_list("run.horizons", *v);
  if (auto v = get("run.replications")) c.replications = parse_unsigned("run.replications", *v);
  if (auto v = get("run.master_seed")) c.master_seed = parse_unsigned("run.master_seed", *v);
  if (auto v = get("run.parallelism")) {
    const auto p = parse_unsigned("run.parallelism", *v);
    if (p < 1 || p > 1024) throw ConfigError("run.parallelism: must lie in [1, 1024]");
    c.parallelism = static_cast<int>(p);
  }
  if (auto v = get("run.output")) c.output = *v;
  if (auto v = get("run.population_cap")) c.population_cap = parse_unsigned("run.population_cap", *v);

  if (auto v = get("params.x_grid")) c.x_grid = parse_list("params.x_grid", *v);
  real("params.lambda_c", c.lambda_c);
  real("params.a_exponent", c.a_exponent);
  real("params.g_exponent", c.g_exponent);
  real("params.cutoff", c.cutoff);
  if (auto v = get("params.limit_samples")) c.limit_samples = parse_unsigned("params.limit_samples", *v);
  if (auto v = get("params.paths")) c.paths = parse_unsigned("params.paths", *v);
  if (auto v = get("params.sup_subdivisions")) {
    const auto k = parse_unsigned("params.sup_subdivisions", *v);
    if (k > 4096) throw ConfigError("params.sup_subdivisions: must be <= 4096");
    c.sup_subdivisions = static_cast<int>(k);
  }
  if (auto v = get("params.table_kmax")) c.table_kmax = parse_unsigned("params.table_kmax", *v);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in);
}

std::vector<ResultRow> run_experiment(ExperimentKind kind, const ExperimentConfig& config, const LimitLawBundle& bundle,
                                      int threads) {
  switch (kind) {
    case ExperimentKind::weak_limit_rt: return weak_limit(config, bundle, threads);
    case ExperimentKind::upper_deviation: return upper_deviation(config, bundle, threads);
    case ExperimentKind::pareto_conditional: return pareto_conditional(config, bundle, threads);
    case ExperimentKind::lower_deviation: return lower_deviation(config, bundle, threads);
    case ExperimentKind::one_big_jump: return one_big_jump(config, bundle, threads);
    case ExperimentKind::n_infinity_compare: return n_infinity_compare(config, bundle, threads);
    case ExperimentKind::xi_compare: return xi_compare(config, bundle, threads);
    case ExperimentKind::as_proxies: return as_proxy_rows(config, bundle, threads);
    case ExperimentKind::sup_r_check: return sup_r_check(config, bundle, threads);
    case ExperimentKind::gw_tables: return gw_tables(config, bundle);
  }
  throw std::logic_error("run_experiment: unhandled kind");
}

void write_csv_header(std::ostream& out) {
  out << "experiment,quantity,t,x,estimate,stderr,target,ratio,n,failures\n";
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  write_csv_header(out);
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.quantity << ',' << format_real(r.t) << ',' << format_real(r.x) << ','
        << format_real(r.estimate) << ',' << format_real(r.stderr_) << ',' << format_real(r.target) << ','
        << format_real(r.ratio) << ',' << r.n << ',' << r.failures << '\n';
  }
}

std::string constants_json(const LimitLawBundle& b) {
  nlohmann::json j;
  j["lambda"] = b.lambda();
  j["rho"] = b.rho();
  j["q"] = b.q();
  j["theta"] = b.theta();
  j["theta_star"] = b.theta_star();
  j["alpha"] = b.alpha();
  j["phi_theta_star"] = b.phi_star();
  j["A_phi_theta_star"] = b.a_phi_star();
  j["lower_target"] = b.lower_target();
  j["c_star"] = {b.stable().c_star().real(), b.stable().c_star().imag()};
  j["q1"] = b.stable().q1();
  j["q2"] = b.stable().q2();
  return j.dump(2);
}

std::string manifest_json(const ExperimentConfig& config, const LimitLawBundle& bundle,
                          const std::map<std::string, std::size_t>& row_counts,
                          const std::map<std::string, std::size_t>& failure_counts) {
  nlohmann::json j;
  j["constants"] = nlohmann::json::parse(constants_json(bundle));
  j["config"] = config.echo;
  j["versions"] = {{"blp", kVersion}, {"boost", BOOST_LIB_VERSION}, {"compiler", __VERSION__}};
  j["rows"] = row_counts;
  j["failures"] = failure_counts;
  j["csv_columns"] = {"experiment", "quantity", "t", "x", "estimate", "stderr", "target", "ratio", "n", "failures"};
  return j.dump(2) + "\n";
}

RunSummary run_config(const ExperimentConfig& config, std::ostream& log) {
  namespace fs = std::filesystem;
  const int threads = resolve_threads(config.parallelism);
  const LimitLawBundle bundle(config.model.law(), config.model.stable(), config.model.slow());
  fs::create_directories(config.output);
  RunSummary summary;
  std::map<std::string, std::size_t> row_counts;
  std::map<std::string, std::size_t> failure_counts;
  nlohmann::json timing;
  for (ExperimentKind kind : config.experiments) {
    const std::string name = to_string(kind);
    log << "running " << name << " (" << config.replications << " replications, " << threads << " threads)\n";
    const auto start = std::chrono::steady_clock::now();
    const auto rows = run_experiment(kind, config, bundle, threads);
    timing[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path file = fs::path(config.output) / (name + ".csv");
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    write_csv(rows, out);
    row_counts[name] = rows.size();
    std::size_t failures = 0;
    for (const auto& r : rows) failures = std::max(failures, r.failures);
    failure_counts[name] = failures;
    summary.failures += failures;
    summary.files.push_back(file.string());
  }
  const fs::path manifest = fs::path(config.output) / "manifest.json";
  std::ofstream(manifest) << manifest_json(config, bundle, row_counts, failure_counts);
  summary.files.push_back(manifest.string());
  const fs::path timing_file = fs::path(config.output) / "timing.json";
  std::ofstream(timing_file) << timing.dump(2) << "\n";
  summary.files.push_back(timing_file.string());
  return summary;
}

}  // namespace blp
