#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blp/gw.hpp"
#include "blp/point_measure.hpp"
#include "blp/rng.hpp"
#include "blp/stable.hpp"

namespace blp {

struct ModelParams {
  OffspringLaw law;
  StableMotionParams stable;
  double start_position = 0.0;
};

struct SimulationOptions {
  /// delta > 0 also flags particles whose line survives to t + delta.
  double delayed_survival = 0.0;
  /// Record the running maximum of positions along every edge.
  bool record_sup_path = false;
  int sup_subdivisions = 16;
  std::size_t population_cap = 1'000'000;
};

class PopulationCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One particle u of the tree, observed up to the horizon t.
struct ParticleRecord {
  std::int64_t parent = -1;        ///< index of the parent record, -1 for the root
  std::uint32_t child_index = 0;   ///< 1-based position among siblings (0 for the root)
  std::uint32_t generation = 0;    ///< number of strict ancestors
  double birth = 0.0;              ///< b_u
  double end = 0.0;                ///< sigma_u ^ t
  double displacement = 0.0;       ///< X_{u,t}
  double end_position = 0.0;       ///< xi^u at time end (xi_t^u for leaves)
  double path_max = 0.0;           ///< running maximum along the edge (record_sup_path)
  std::uint64_t descendants_alive = 0;  ///< Z_t^u
  bool alive = false;              ///< u in L_t
  bool delayed_survivor = false;   ///< line survives to t + delta
};

/// One simulated tree at horizon t.
struct TreeSnapshot {
  double t = 0.0;
  double lambda = 0.0;
  std::vector<ParticleRecord> particles;
  std::uint64_t population = 0;         ///< Z_t
  std::optional<double> max_position;   ///< R_t; empty when Z_t = 0
  std::optional<double> max_increment;  ///< M_t; empty when Z_t = 0
  std::optional<double> sup_max_position;  ///< sup_{s <= t} R_s (record_sup_path)
  double delta = 0.0;
  std::optional<double> delayed_max_position;   ///< R_{t,delta}
  std::optional<double> delayed_max_increment;  ///< M_{t,delta}

  double w_hat() const;
  bool survived() const { return population > 0; }
  /// Ulam-Harris label, "o" for the root, then dot-separated child indices.
  std::string label(std::size_t i) const;
  std::size_t depth(std::size_t i) const { return particles.at(i).generation; }
};

/// Exact forward simulation to horizon t.
TreeSnapshot simulate(const ModelParams& model, double t, Rng& rng, const SimulationOptions& opts = {});

struct PointMeasures {
  PointMeasure x;  ///< sum over alive u of delta_{xi_t^u / a}
  PointMeasure y;  ///< sum over surviving lines u of Z_t^u delta_{X_{u,t} / a}
};

PointMeasures point_measures(const TreeSnapshot& snap, double a);

/// M_{s,t} = max |X_{u,t}| over particles born by t - s; empty when none.
std::optional<double> m_window(const TreeSnapshot& snap, double s);

/// Sum over alive particles of g(number of ancestors).
double ancestor_sum(const TreeSnapshot& snap, const std::function<double(std::uint32_t)>& g);

struct ManyToOneEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double exact = 0.0;
};

/// Monte Carlo E sum_{v in L_t} g(n^v) and the exact e^{lambda t} E g(N),
/// N ~ Poisson(beta mu t).
ManyToOneEstimate ancestor_count_stats(const std::vector<TreeSnapshot>& snaps, const OffspringLaw& law,
                                       const std::function<double(std::uint32_t)>& g);

/// One tab-separated row per particle in label order.
void write_snapshot_tsv(const TreeSnapshot& snap, std::ostream& out);

}  // namespace blp
