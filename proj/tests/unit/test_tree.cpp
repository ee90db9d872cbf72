#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "blp/tree.hpp"

using namespace blp;

namespace {

ModelParams yule_model() { return {OffspringLaw::yule(1.0), StableMotionParams::from_c_star(1.5, 1.0), 0.0}; }
ModelParams extinct_model() {
  return {OffspringLaw({{0, 0.25}, {2, 0.75}}, 1.0), StableMotionParams::from_tails(1.2, 0.4, 0.1), 0.0};
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  double s = 0.0, ss = 0.0;
  for (double x : v) s += x;
  const double m = s / v.size();
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (v.size() - 1) / v.size())};
}

}  // namespace

TEST_CASE("horizon zero") {
  Rng rng(1);
  auto model = yule_model();
  model.start_position = 0.7;
  const auto snap = simulate(model, 0.0, rng);
  CHECK(snap.population == 1);
  CHECK(snap.max_position.value() == 0.7);
  CHECK(snap.max_increment.value() == 0.0);
  CHECK(snap.particles.size() == 1);
  CHECK(snap.label(0) == "o");
}

TEST_CASE("snapshot invariants") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const auto model = seed % 2 ? yule_model() : extinct_model();
    const auto snap = simulate(model, 4.0, rng);
    std::uint64_t alive = 0;
    std::optional<double> best;
    std::optional<double> best_increment;
    for (std::size_t i = 0; i < snap.particles.size(); ++i) {
      const auto& p = snap.particles[i];
      double pos = 0.0;
      double lifetimes = 0.0;
      for (std::int64_t v = static_cast<std::int64_t>(i); v >= 0; v = snap.particles[v].parent) {
        pos += snap.particles[v].displacement;
        if (v != static_cast<std::int64_t>(i)) lifetimes += snap.particles[v].end - snap.particles[v].birth;
      }
      CHECK(std::abs(p.birth - lifetimes) < 1e-9);
      CHECK(std::abs(p.end_position - pos) < 1e-9);
      CHECK(p.end <= 4.0);
      if (p.parent >= 0) CHECK(p.generation == snap.particles[p.parent].generation + 1);
      if (p.alive) {
        ++alive;
        CHECK(p.end == 4.0);
        CHECK(p.descendants_alive == 1);
        best = std::max(best.value_or(-INFINITY), p.end_position);
      }
      if (p.descendants_alive > 0) best_increment = std::max(best_increment.value_or(-INFINITY), p.displacement);
    }
    CHECK(alive == snap.population);
    CHECK(snap.particles[0].descendants_alive == snap.population);
    CHECK(best == snap.max_position);
    CHECK(best_increment == snap.max_increment);
    CHECK(snap.w_hat() == doctest::Approx(std::exp(-snap.lambda * 4.0) * snap.population));
  }
}

TEST_CASE("records are in Ulam-Harris label order") {
  Rng rng(3);
  const auto snap = simulate(yule_model(), 3.0, rng);
  std::ostringstream out;
  write_snapshot_tsv(snap, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("label\t", 0) == 0);
  std::vector<std::vector<int>> labels;
  while (std::getline(in, line)) {
    std::vector<int> path;
    std::stringstream fields(line.substr(0, line.find('\t')));
    std::string part;
    while (std::getline(fields, part, '.')) {
      if (part != "o") path.push_back(std::stoi(part));
    }
    labels.push_back(path);
  }
  CHECK(labels.size() == snap.particles.size());
  CHECK(std::is_sorted(labels.begin(), labels.end()));
}

TEST_CASE("martingale mean of W_hat") {
  for (auto [t, n] : {std::pair{2.0, 4000}, std::pair{5.0, 2000}, std::pair{9.0, 300}}) {
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
      Rng rng = seed_stream(77, i);
      w.push_back(simulate(yule_model(), t, rng).w_hat());
    }
    const auto s = mean_se(w);
    CHECK(std::abs(s.mean - 1.0) < 3 * s.se);
  }
}

TEST_CASE("extinction frequency matches F(0, t)") {
  const auto model = extinct_model();
  const double t = 2.0;
  const int n = 6000;
  int extinct = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng = seed_stream(5, i);
    extinct += !simulate(model, t, rng).survived();
  }
  const double p = pgf_flow(model.law, 0.0, t);
  CHECK(std::abs(extinct / double(n) - p) < 3 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("many-to-one identity") {
  const auto model = yule_model();
  const double t = 2.0;
  std::vector<TreeSnapshot> snaps;
  for (int i = 0; i < 6000; ++i) {
    Rng rng = seed_stream(6, i);
    snaps.push_back(simulate(model, t, rng));
  }
  const auto one = ancestor_count_stats(snaps, model.law, [](std::uint32_t) { return 1.0; });
  CHECK(one.exact == doctest::Approx(std::exp(t)));
  CHECK(std::abs(one.estimate - one.exact) < 3 * one.stderr_);
  const auto zero = ancestor_count_stats(snaps, model.law, [](std::uint32_t n) { return n == 0 ? 1.0 : 0.0; });
  CHECK(std::abs(zero.estimate - zero.exact) < 3 * zero.stderr_ + 1e-12);
  const auto count = ancestor_count_stats(snaps, model.law, [](std::uint32_t n) { return double(n); });
  CHECK(std::abs(count.estimate - count.exact) < 3 * count.stderr_);
}

TEST_CASE("point measures") {
  Rng rng(12);
  const auto snap = simulate(yule_model(), 3.0, rng);
  const auto m = point_measures(snap, 2.0);
  CHECK(m.x.total_mass() == snap.population);
  // every alive leaf contributes one unit per member of its ancestral line
  std::uint64_t line_members = 0;
  for (const auto& p : snap.particles) {
    if (p.alive) line_members += p.generation + 1;
  }
  CHECK(m.y.total_mass() == line_members);
  double max_x = -INFINITY;
  for (const auto& a : m.x.atoms()) max_x = std::max(max_x, a.location);
  CHECK(max_x == doctest::Approx(*snap.max_position / 2.0));

  // extinct trees give empty measures
  const auto model = extinct_model();
  for (int i = 0; i < 200; ++i) {
    Rng r = seed_stream(8, i);
    const auto s = simulate(model, 2.0, r);
    if (s.survived()) continue;
    const auto e = point_measures(s, 1.0);
    CHECK(e.x.empty());
    CHECK(e.y.empty());
    CHECK_FALSE(s.max_position.has_value());
    break;
  }
}

TEST_CASE("Y multiplicities are descendant counts on a hand-built tree") {
  TreeSnapshot snap;
  snap.t = 1.0;
  snap.lambda = 1.0;
  ParticleRecord root;
  root.end = 0.4;
  root.displacement = 0.5;
  root.end_position = 0.5;
  root.descendants_alive = 2;
  ParticleRecord a = root;
  a.parent = 0;
  a.child_index = 1;
  a.generation = 1;
  a.birth = 0.4;
  a.end = 1.0;
  a.displacement = 2.0;
  a.end_position = 2.5;
  a.descendants_alive = 1;
  a.alive = true;
  ParticleRecord b = a;
  b.child_index = 2;
  b.displacement = -1.0;
  b.end_position = -0.5;
  snap.particles = {root, a, b};
  snap.population = 2;
  const auto m = point_measures(snap, 1.0);
  std::vector<std::pair<double, std::uint64_t>> y;
  for (const auto& atom : m.y.atoms()) y.emplace_back(atom.location, atom.multiplicity);
  std::sort(y.begin(), y.end());
  REQUIRE(y.size() == 3);
  CHECK(y[0] == std::pair{-1.0, std::uint64_t{1}});
  CHECK(y[1] == std::pair{0.5, std::uint64_t{2}});
  CHECK(y[2] == std::pair{2.0, std::uint64_t{1}});
  CHECK(snap.label(2) == "o.2");

  CHECK(m_window(snap, 0.9).value() == doctest::Approx(0.5));   // only the root born by 0.1
  CHECK(m_window(snap, 0.0).value() == doctest::Approx(2.0));
}

TEST_CASE("m_window covers M_t when s = 0") {
  Rng rng(4);
  const auto snap = simulate(yule_model(), 3.0, rng);
  CHECK(*m_window(snap, 0.0) >= *snap.max_increment);
  CHECK(*m_window(snap, 0.0) >= *m_window(snap, 1.0));
}

TEST_CASE("single-particle tree: X and Y coincide") {
  // rate so small that branching is essentially impossible before t
  const ModelParams model{OffspringLaw::yule(1e-9), StableMotionParams::from_c_star(1.5, 1.0), 0.0};
  Rng rng(2);
  const auto snap = simulate(model, 1.0, rng);
  REQUIRE(snap.particles.size() == 1);
  const auto m = point_measures(snap, 1.0);
  CHECK(m.x.atoms()[0].location == m.y.atoms()[0].location);
}

TEST_CASE("population cap") {
  SimulationOptions opts;
  opts.population_cap = 50;
  Rng rng(1);
  CHECK_THROWS_AS(simulate(yule_model(), 10.0, rng, opts), PopulationCapError);
}

TEST_CASE("sup path and delayed survival") {
  SimulationOptions opts;
  opts.record_sup_path = true;
  opts.delayed_survival = 1.0;
  for (int i = 0; i < 50; ++i) {
    Rng rng = seed_stream(10, i);
    const auto snap = simulate(extinct_model(), 3.0, rng, opts);
    if (!snap.survived()) continue;
    CHECK(*snap.sup_max_position >= *snap.max_position);
    CHECK(*snap.sup_max_position >= 0.0);
    for (const auto& p : snap.particles) {
      if (p.delayed_survivor) CHECK(p.descendants_alive > 0);
    }
    if (snap.delayed_max_position) CHECK(*snap.delayed_max_position <= *snap.max_position);
  }
}
