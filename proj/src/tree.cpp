#include "blp/tree.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace blp {
namespace {

struct Pending {
  std::int64_t parent;
  std::uint32_t child_index;
  std::uint32_t generation;
  double birth;
  double start_position;
};

void update_max(std::optional<double>& slot, double v) {
  if (!slot || v > *slot) slot = v;
}

}  // namespace

double TreeSnapshot::w_hat() const { return std::exp(-lambda * t) * static_cast<double>(population); }

std::string TreeSnapshot::label(std::size_t i) const {
  std::vector<std::uint32_t> path;
  for (std::int64_t j = static_cast<std::int64_t>(i); particles.at(j).parent >= 0; j = particles[j].parent) {
    path.push_back(particles[j].child_index);
  }
  std::string out = "o";
  for (auto it = path.rbegin(); it != path.rend(); ++it) out += "." + std::to_string(*it);
  return out;
}

TreeSnapshot simulate(const ModelParams& model, double t, Rng& rng, const SimulationOptions& opts) {
  if (!(t >= 0.0)) throw std::invalid_argument("simulate: horizon must be non-negative");
  if (opts.delayed_survival < 0.0) throw std::invalid_argument("simulate: delta must be non-negative");
  if (opts.record_sup_path && opts.sup_subdivisions < 1) {
    throw std::invalid_argument("simulate: sup_subdivisions must be >= 1");
  }
  const OffspringLaw& law = model.law;
  const double beta = law.branching_rate();
  TreeSnapshot snap;
  snap.t = t;
  snap.lambda = rates(law).lambda;
  snap.delta = opts.delayed_survival;

  // Depth-first with children pushed in reverse: records come out in label order
  // and every parent precedes its children.
  std::vector<Pending> stack{{-1, 0, 0, 0.0, model.start_position}};
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    if (snap.particles.size() >= opts.population_cap) {
      throw PopulationCapError("simulate: population cap of " + std::to_string(opts.population_cap) +
                               " particles exceeded");
    }
    ParticleRecord rec;
    rec.parent = p.parent;
    rec.child_index = p.child_index;
    rec.generation = p.generation;
    rec.birth = p.birth;
    const double death = p.birth + rng.exponential(beta);
    rec.end = std::min(death, t);
    const double duration = rec.end - rec.birth;
    if (opts.record_sup_path) {
      const int k = opts.sup_subdivisions;
      double pos = 0.0;
      double best = 0.0;
      for (int i = 0; i < k; ++i) {
        pos += sample_increment(model.stable, duration / k, rng);
        best = std::max(best, pos);
      }
      rec.displacement = pos;
      rec.path_max = p.start_position + best;
    } else {
      rec.displacement = sample_increment(model.stable, duration, rng);
    }
    rec.end_position = p.start_position + rec.displacement;
    if (opts.record_sup_path) rec.path_max = std::max(rec.path_max, rec.end_position);
    rec.alive = death >= t;
    const auto index = static_cast<std::int64_t>(snap.particles.size());
    snap.particles.push_back(rec);
    if (!rec.alive) {
      const int children = law.sample(rng);
      for (int c = children; c >= 1; --c) {
        stack.push_back({index, static_cast<std::uint32_t>(c), p.generation + 1, death, rec.end_position});
      }
    }
  }

  auto& parts = snap.particles;
  if (snap.delta > 0.0) {
    for (auto& r : parts) {
      if (r.alive) r.delayed_survivor = simulate_population(law, snap.delta, rng) > 0;
    }
  }
  for (std::size_t i = parts.size(); i-- > 0;) {
    ParticleRecord& r = parts[i];
    if (r.alive) r.descendants_alive += 1;
    if (r.parent >= 0) {
      ParticleRecord& up = parts[static_cast<std::size_t>(r.parent)];
      up.descendants_alive += r.descendants_alive;
      up.delayed_survivor = up.delayed_survivor || r.delayed_survivor;
    }
  }
  snap.population = parts.front().descendants_alive;
  for (const auto& r : parts) {
    if (r.alive) update_max(snap.max_position, r.end_position);
    if (r.descendants_alive > 0) update_max(snap.max_increment, r.displacement);
    if (opts.record_sup_path) update_max(snap.sup_max_position, r.path_max);
    if (r.delayed_survivor) {
      if (r.alive) update_max(snap.delayed_max_position, r.end_position);
      update_max(snap.delayed_max_increment, r.displacement);
    }
  }
  if (opts.record_sup_path) update_max(snap.sup_max_position, model.start_position);
  return snap;
}

PointMeasures point_measures(const TreeSnapshot& snap, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("point_measures: scale must be positive");
  PointMeasures out;
  for (const auto& r : snap.particles) {
    if (r.alive) out.x.add(r.end_position / a);
    if (r.descendants_alive > 0) out.y.add(r.displacement / a, r.descendants_alive);
  }
  return out;
}

std::optional<double> m_window(const TreeSnapshot& snap, double s) {
  if (!(s >= 0.0 && s <= snap.t)) throw std::invalid_argument("m_window: s must lie in [0, t]");
  std::optional<double> out;
  for (const auto& r : snap.particles) {
    if (r.birth <= snap.t - s) update_max(out, std::abs(r.displacement));
  }
  return out;
}

double ancestor_sum(const TreeSnapshot& snap, const std::function<double(std::uint32_t)>& g) {
  double sum = 0.0;
  for (const auto& r : snap.particles) {
    if (r.alive) sum += g(r.generation);
  }
  return sum;
}

ManyToOneEstimate ancestor_count_stats(const std::vector<TreeSnapshot>& snaps, const OffspringLaw& law,
                                       const std::function<double(std::uint32_t)>& g) {
  if (snaps.empty()) throw std::invalid_argument("ancestor_count_stats: no snapshots");
  const double t = snaps.front().t;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& s : snaps) {
    if (s.t != t) throw std::invalid_argument("ancestor_count_stats: snapshots must share the horizon");
    const double v = ancestor_sum(s, g);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(snaps.size());
  ManyToOneEstimate out;
  out.estimate = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1)) : 0.0;
  out.stderr_ = std::sqrt(var / n);

  // spine branches at the size-biased rate beta * mu
  const double m = law.branching_rate() * law.mean() * t;
  const auto last = static_cast<std::uint32_t>(m + 20.0 * std::sqrt(m) + 50.0);
  double expectation = 0.0;
  for (std::uint32_t k = 0; k <= last; ++k) {
    const double log_p = -m + (k == 0 ? 0.0 : k * std::log(m)) - std::lgamma(k + 1.0);
    expectation += std::exp(log_p) * g(k);
  }
  out.exact = std::exp(rates(law).lambda * t) * expectation;
  return out;
}

void write_snapshot_tsv(const TreeSnapshot& snap, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "label\tbirth\tend\tdisplacement\talive\tsurviving\n";
  for (std::size_t i = 0; i < snap.particles.size(); ++i) {
    const auto& r = snap.particles[i];
    out << snap.label(i) << '\t' << r.birth << '\t' << r.end << '\t' << r.displacement << '\t'
        << (r.alive ? 1 : 0) << '\t' << (r.descendants_alive > 0 ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace blp
