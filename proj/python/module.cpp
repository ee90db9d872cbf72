#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "blp/extremes.hpp"
#include "blp/oracles.hpp"
#include "blp/replicate.hpp"
#include "blp/runner.hpp"

namespace py = pybind11;
using namespace blp;

namespace {

py::list atoms_of(const PointMeasure& nu) {
  py::list out;
  for (const Atom& a : nu.atoms()) out.append(py::make_tuple(a.location, a.multiplicity));
  return out;
}

py::dict snapshot_summary(const TreeSnapshot& s) {
  py::dict d;
  d["t"] = s.t;
  d["population"] = s.population;
  d["particles"] = s.particles.size();
  d["max_position"] = s.max_position;
  d["max_increment"] = s.max_increment;
  d["sup_max_position"] = s.sup_max_position;
  d["w_hat"] = s.w_hat();
  return d;
}

py::list oracle_rows(const std::vector<OracleCheck>& checks) {
  py::list out;
  for (const auto& c : checks) out.append(py::make_tuple(c.name, c.value, c.threshold, c.pass));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Branching Levy process extremes";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<PopulationCapError>(m, "PopulationCapError", PyExc_RuntimeError);
  py::register_exception<RejectionBudgetError>(m, "RejectionBudgetError", PyExc_RuntimeError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
      .def("uniform", &Rng::uniform)
      .def("exponential", &Rng::exponential, py::arg("rate"));
  m.def("seed_stream", &seed_stream, py::arg("master_seed"), py::arg("index"));

  py::class_<OffspringLaw>(m, "OffspringLaw")
      .def(py::init<const std::map<int, double>&, double>(), py::arg("pmf"), py::arg("branching_rate") = 1.0)
      .def_static("yule", &OffspringLaw::yule, py::arg("branching_rate") = 1.0)
      .def_property_readonly("pmf", &OffspringLaw::pmf)
      .def_property_readonly("branching_rate", &OffspringLaw::branching_rate)
      .def_property_readonly("mean", &OffspringLaw::mean)
      .def("pgf", py::overload_cast<double>(&OffspringLaw::pgf, py::const_), py::arg("s"));

  py::class_<StableMotionParams>(m, "StableMotionParams")
      .def_static("from_tails", &StableMotionParams::from_tails, py::arg("alpha"), py::arg("q1"), py::arg("q2"))
      .def_static("from_c_star", &StableMotionParams::from_c_star, py::arg("alpha"), py::arg("c_star"))
      .def_property_readonly("alpha", &StableMotionParams::alpha)
      .def_property_readonly("q1", &StableMotionParams::q1)
      .def_property_readonly("q2", &StableMotionParams::q2)
      .def_property_readonly("c_star", &StableMotionParams::c_star)
      .def_property_readonly("scale", &StableMotionParams::scale);

  py::class_<SlowVariation>(m, "SlowVariation")
      .def_static("constant", &SlowVariation::constant, py::arg("c") = 1.0)
      .def_static("log_power", &SlowVariation::log_power, py::arg("r"))
      .def("__call__", &SlowVariation::operator(), py::arg("x"))
      .def("validate_for", &SlowVariation::validate_for, py::arg("alpha"));

  m.def("extinction_prob", &extinction_prob, py::arg("law"));
  m.def("pgf_flow", py::overload_cast<const OffspringLaw&, double, double>(&pgf_flow), py::arg("law"), py::arg("s"),
        py::arg("t"));
  m.def("survival_prob", &survival_prob, py::arg("law"), py::arg("t"));
  m.def("a_function", py::overload_cast<const OffspringLaw&, double>(&a_function), py::arg("law"), py::arg("s"));
  m.def("w_laplace", &w_laplace, py::arg("law"), py::arg("theta"));
  m.def("vartheta", &vartheta, py::arg("law"));
  m.def("vartheta_star", &vartheta_star, py::arg("law"), py::arg("stable"));
  m.def("t_law_pmf", &t_law_pmf, py::arg("law"), py::arg("k"));
  m.def("rates", [](const OffspringLaw& law) {
    const GwDerived d = derive(law);
    return py::dict(py::arg("lambda") = d.lambda, py::arg("rho") = d.rho, py::arg("q") = d.q, py::arg("theta") = d.theta);
  }, py::arg("law"));

  m.def("big_h", &big_h, py::arg("slow"), py::arg("alpha"), py::arg("y"));
  m.def("h_of_t", &h_of_t, py::arg("slow"), py::arg("alpha"), py::arg("lam"), py::arg("t"));

  m.def("sample_increments", [](const StableMotionParams& p, double duration, std::size_t n, Rng& rng) {
    std::vector<double> out(n);
    for (auto& x : out) x = sample_increment(p, duration, rng);
    return out;
  }, py::arg("stable"), py::arg("duration"), py::arg("n"), py::arg("rng"));

  py::class_<LimitLawBundle>(m, "LimitLawBundle")
      .def(py::init<OffspringLaw, StableMotionParams, SlowVariation>(), py::arg("law"), py::arg("stable"),
           py::arg("slow") = SlowVariation::constant(1.0))
      .def_property_readonly("alpha", &LimitLawBundle::alpha)
      .def_property_readonly("lam", &LimitLawBundle::lambda)
      .def_property_readonly("rho", &LimitLawBundle::rho)
      .def_property_readonly("q", &LimitLawBundle::q)
      .def_property_readonly("theta", &LimitLawBundle::theta)
      .def_property_readonly("theta_star", &LimitLawBundle::theta_star)
      .def_property_readonly("phi_star", &LimitLawBundle::phi_star)
      .def_property_readonly("a_phi_star", &LimitLawBundle::a_phi_star)
      .def("h", &LimitLawBundle::h, py::arg("t"))
      .def("limit_cdf", &LimitLawBundle::limit_cdf, py::arg("x"))
      .def("lower_target", &LimitLawBundle::lower_target)
      .def("upper_finite_target", &LimitLawBundle::upper_finite_target, py::arg("x"), py::arg("h_value"))
      .def("k_pmf", [](const LimitLawBundle& b, std::size_t k) { return b.k_law().pmf(k); }, py::arg("k"))
      .def("sample_w", &LimitLawBundle::sample_w, py::arg("rng"))
      .def("sample_n_infinity", [](const LimitLawBundle& b, double w, double cutoff, Rng& rng) {
        return atoms_of(sample_n_infinity(b, w, cutoff, rng));
      }, py::arg("w"), py::arg("cutoff"), py::arg("rng"))
      .def("sample_xi", [](const LimitLawBundle& b, double cutoff, Rng& rng) {
        return atoms_of(sample_xi(b, cutoff, rng));
      }, py::arg("cutoff"), py::arg("rng"))
      .def("constants", [](const LimitLawBundle& b) { return constants_json(b); });

  m.def("simulate", [](const OffspringLaw& law, const StableMotionParams& stable, double t, Rng& rng,
                       bool record_sup_path, std::size_t population_cap) {
    SimulationOptions opts;
    opts.record_sup_path = record_sup_path;
    opts.population_cap = population_cap;
    TreeSnapshot s;
    {
      py::gil_scoped_release release;
      s = simulate(ModelParams{law, stable, 0.0}, t, rng, opts);
    }
    return snapshot_summary(s);
  }, py::arg("law"), py::arg("stable"), py::arg("t"), py::arg("rng"), py::arg("record_sup_path") = false,
     py::arg("population_cap") = 1'000'000);

  m.def("quantile", &quantile, py::arg("values"), py::arg("p"));
  m.def("ks_statistic", &ks_statistic, py::arg("sample"), py::arg("cdf"));

  m.def("gw_oracle_suite", [] { return oracle_rows(gw_oracle_suite()); });
  m.def("scaling_oracle_suite", [] { return oracle_rows(scaling_oracle_suite()); });

  m.def("print_constants", [](const std::string& path) {
    const ExperimentConfig c = load_config(path);
    return constants_json(LimitLawBundle(c.model.law(), c.model.stable(), c.model.slow()));
  }, py::arg("config"));
  m.def("run", [](const std::string& path) {
    const ExperimentConfig c = load_config(path);
    std::ostringstream log;
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_config(c, log);
    }
    return py::make_tuple(s.files, s.failures);
  }, py::arg("config"));
}
