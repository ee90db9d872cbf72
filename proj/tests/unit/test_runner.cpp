#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "blp/replicate.hpp"
#include "blp/runner.hpp"

using namespace blp;

namespace {

const char* kBase = R"([model]
offspring = 2:1.0
beta = 1.0
alpha = 1.5
c_star = 1.0

[run]
experiments = gw_tables, weak_limit_rt
horizons = 2, 3
replications = 50
master_seed = 99
parallelism = 1
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("seed streams") {
  Rng a = seed_stream(1, 5);
  Rng b = seed_stream(1, 5);
  Rng c = seed_stream(1, 6);
  Rng d = seed_stream(2, 5);
  bool differ_c = false;
  bool differ_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differ_c = differ_c || x != c();
    differ_d = differ_d || x != d();
  }
  CHECK(differ_c);
  CHECK(differ_d);
  // fixed algorithm: pinned first draw
  CHECK(seed_stream(0, 0)() == seed_stream(0, 0)());
}

TEST_CASE("replicate is schedule independent and isolates runtime failures") {
  auto fn = [](Rng& rng, std::size_t i) {
    if (i % 7 == 3) throw std::runtime_error("boom");
    return rng.uniform();
  };
  const auto one = replicate<double>(100, 5, 1000, 1, fn);
  const auto many = replicate<double>(100, 5, 1000, 8, fn);
  CHECK(one.failures == 14);
  CHECK(many.failures == 14);
  CHECK(one.first_failure == "boom");
  for (std::size_t i = 0; i < 100; ++i) CHECK(one.results[i] == many.results[i]);
  CHECK_THROWS_AS(replicate<double>(10, 1, 0, 2, [](Rng&, std::size_t) -> double { throw std::logic_error("bug"); }),
                  std::logic_error);
}

TEST_CASE("thread override") {
  ::unsetenv(kThreadsEnv);
  CHECK(resolve_threads(3) == 3);
  ::setenv(kThreadsEnv, "5", 1);
  CHECK(resolve_threads(3) == 5);
  ::setenv(kThreadsEnv, "zero", 1);
  CHECK_THROWS_AS(resolve_threads(3), std::invalid_argument);
  ::setenv(kThreadsEnv, "0", 1);
  CHECK_THROWS_AS(resolve_threads(3), std::invalid_argument);
  ::unsetenv(kThreadsEnv);
}

TEST_CASE("config parsing") {
  const auto c = parse(kBase);
  CHECK(c.replications == 50);
  CHECK(c.horizons == std::vector<double>{2.0, 3.0});
  CHECK(c.experiments.size() == 2);
  CHECK(c.model.law().is_yule());
  CHECK(c.echo.at("model.c_star") == "1.0");

  const auto tails = parse(replace(kBase, "c_star = 1.0", "q1 = 0.4\nq2 = 0.1"));
  CHECK(tails.model.stable().q1() == doctest::Approx(0.4));

  const auto mixed = parse(replace(kBase, "2:1.0", "0:0.25, 2:0.75"));
  CHECK(mixed.model.law().probability(0) == 0.25);
}

TEST_CASE("config validation names the field") {
  CHECK(error_of(replace(kBase, "replications = 50", "replications = 0")).find("run.replications") == 0);
  CHECK(error_of(replace(kBase, "replications = 50", "replications = -3")).find("run.replications") == 0);
  CHECK(error_of(replace(kBase, "horizons = 2, 3", "horizons = 3, 2")).find("run.horizons") == 0);
  CHECK(error_of(replace(kBase, "horizons = 2, 3", "horizons = 0, 2")).find("run.horizons") == 0);
  CHECK(error_of(replace(kBase, "alpha = 1.5", "alpha = 1.5x")).find("model.alpha") == 0);
  CHECK(error_of(replace(kBase, "alpha = 1.5", "alpha = 2.5")).find("model.") == 0);
  CHECK(error_of(replace(kBase, "2:1.0", "0:0.6, 2:0.4")).find("model.offspring") == 0);
  CHECK(error_of(replace(kBase, "2:1.0", "2=1")).find("model.offspring") == 0);
  CHECK(error_of(replace(kBase, "beta = 1.0", "beta = 1.0\ncolour = red")).find("model.colour") == 0);
  CHECK(error_of(replace(kBase, "gw_tables", "gw_table")).find("run.experiments") == 0);
  CHECK(error_of(replace(kBase, "c_star = 1.0", "c_star = 1.0\nq1 = 0.3")).find("model") == 0);
  CHECK(error_of(std::string(kBase) + "\n[extra]\nkey = 1\n").find("config") == 0);
  CHECK(error_of(std::string(kBase) + "\n[params]\ncutoff = 0.5\n").find("params.cutoff") == 0);
  CHECK(error_of(std::string(kBase) + "\n[params]\nlambda_c = 1.5\n").find("params.lambda_c") == 0);
  CHECK(error_of(replace(kBase, "c_star = 1.0", "c_star = 1.0\nslow = log_power")).find("model.slow") == 0);
  CHECK_NOTHROW(parse(replace(replace(kBase, "c_star = 1.0", "c_star = 1.0\nslow = log_power"), "gw_tables, weak_limit_rt",
                              "gw_tables")));
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("gw_tables constants for Yule") {
  const auto c = parse(kBase);
  const LimitLawBundle b(c.model.law(), c.model.stable(), c.model.slow());
  const auto j = nlohmann::json::parse(constants_json(b));
  CHECK(j["lambda"].get<double>() == doctest::Approx(1.0));
  CHECK(j["rho"].get<double>() == doctest::Approx(1.0));
  CHECK(std::abs(j["q"].get<double>()) < 1e-12);
  CHECK(j["theta"].get<double>() == doctest::Approx(1.0));
  const auto rows = run_experiment(ExperimentKind::gw_tables, c, b, 1);
  bool saw_t = false;
  for (const auto& r : rows) {
    if (r.quantity == "T_pmf" && r.x == 3.0) {
      saw_t = true;
      CHECK(r.estimate == doctest::Approx(1.0 / 12.0).epsilon(1e-8));
    }
  }
  CHECK(saw_t);
}

TEST_CASE("CSV format") {
  ResultRow r;
  r.experiment = "e";
  r.quantity = "q";
  r.t = 0.1;
  r.x = std::nan("");
  r.estimate = 1.0 / 3.0;
  r.n = 4;
  std::ostringstream out;
  write_csv({r}, out);
  CHECK(out.str() ==
        "experiment,quantity,t,x,estimate,stderr,target,ratio,n,failures\n"
        "e,q,0.10000000000000001,nan,0.33333333333333331,0,0,0,4,0\n");
}

TEST_CASE("runs are byte-identical across thread counts") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "blp_runner_test";
  fs::remove_all(root);
  auto c = parse(replace(kBase, "gw_tables, weak_limit_rt",
                         "weak_limit_rt, upper_deviation, one_big_jump, n_infinity_compare, xi_compare, sup_r_check"));
  c.limit_samples = 100;
  c.paths = 500;
  c.sup_subdivisions = 2;
  std::ostringstream log;
  c.output = (root / "one").string();
  c.parallelism = 1;
  const auto first = run_config(c, log);
  c.output = (root / "many").string();
  c.parallelism = 8;
  run_config(c, log);
  for (const auto& f : first.files) {
    const fs::path p(f);
    if (p.filename() == "timing.json") continue;
    INFO(p.filename());
    CHECK(slurp(p) == slurp(root / "many" / p.filename()));
  }
  const auto manifest = nlohmann::json::parse(slurp(root / "one" / "manifest.json"));
  CHECK(manifest["rows"]["weak_limit_rt"].get<int>() > 0);
  CHECK(manifest["constants"]["theta_star"].get<double>() == doctest::Approx(0.19947114020071635));
  fs::remove_all(root);
}
