#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blp/extremes.hpp"
#include "blp/tree.hpp"

namespace blp {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind {
  weak_limit_rt,
  upper_deviation,
  pareto_conditional,
  lower_deviation,
  one_big_jump,
  n_infinity_compare,
  xi_compare,
  as_proxies,
  sup_r_check,
  gw_tables,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ModelConfig {
  std::map<int, double> offspring{{2, 1.0}};
  double beta = 1.0;
  double alpha = 1.5;
  std::optional<double> q1;
  std::optional<double> q2;
  std::optional<std::complex<double>> c_star;
  std::string slow_family = "constant";
  double slow_parameter = 1.0;
  double start_position = 0.0;

  OffspringLaw law() const;
  StableMotionParams stable() const;
  SlowVariation slow() const;
  ModelParams model() const;
};

struct ExperimentConfig {
  ModelConfig model;
  std::vector<ExperimentKind> experiments;
  std::vector<double> horizons;
  std::size_t replications = 0;
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  std::string output = "results";
  std::size_t population_cap = 1'000'000;

  std::vector<double> x_grid{2.0, 4.0, 8.0};
  double lambda_c = 0.5;         ///< Lambda(t) = e^{c lambda t / alpha} for lower deviations
  double a_exponent = 0.8;       ///< a(t) = e^{kappa t} for the one-big-jump discrepancy
  double g_exponent = 2.0;       ///< G(t) = e^{kappa lambda t / alpha} for the a.s. proxies
  double cutoff = 0.05;          ///< N_infinity / Xi atoms kept beyond this radius
  std::size_t limit_samples = 5000;
  std::size_t paths = 100'000;
  int sup_subdivisions = 16;
  std::size_t table_kmax = 20;

  /// Every key/value as read, for the manifest.
  std::map<std::string, std::string> echo;

  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  std::string experiment;
  std::string quantity;
  double t = 0.0;
  double x = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double target = 0.0;
  double ratio = 0.0;
  std::size_t n = 0;
  std::size_t failures = 0;
};

/// Runs one experiment. Results depend only on the config and seed, never on
/// `threads`.
std::vector<ResultRow> run_experiment(ExperimentKind kind, const ExperimentConfig& config,
                                      const LimitLawBundle& bundle, int threads);

void write_csv_header(std::ostream& out);
void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);

/// Deterministic manifest: resolved constants, config echo and row counts.
std::string manifest_json(const ExperimentConfig& config, const LimitLawBundle& bundle,
                          const std::map<std::string, std::size_t>& row_counts,
                          const std::map<std::string, std::size_t>& failure_counts);

/// Constants of the configured model as JSON.
std::string constants_json(const LimitLawBundle& bundle);

struct RunSummary {
  std::vector<std::string> files;
  std::size_t failures = 0;
};

/// Runs every configured experiment and writes <output>/<experiment>.csv,
/// manifest.json and timing.json.
RunSummary run_config(const ExperimentConfig& config, std::ostream& log);

}  // namespace blp
