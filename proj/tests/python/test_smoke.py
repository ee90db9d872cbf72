import json
import math
import pathlib

import pytest

import blp


def test_yule_closed_forms():
    law = blp.OffspringLaw.yule(1.0)
    assert blp.extinction_prob(law) == pytest.approx(0.0, abs=1e-12)
    assert blp.w_laplace(law, 2.0) == pytest.approx(1.0 / 3.0, rel=1e-9)
    assert blp.a_function(law, 0.4) == pytest.approx(0.4 / 0.6, rel=1e-8)
    e = math.exp(-1.0)
    assert blp.pgf_flow(law, 0.5, 1.0) == pytest.approx(0.5 * e / (1 - (1 - e) * 0.5), rel=1e-9)
    assert blp.t_law_pmf(law, 3) == pytest.approx(1.0 / 12.0, rel=1e-8)
    rates = blp.rates(law)
    assert rates["lambda"] == pytest.approx(1.0)
    assert rates["theta"] == pytest.approx(1.0)


def test_invalid_inputs_raise_value_error():
    with pytest.raises(ValueError):
        blp.OffspringLaw({0: 0.6, 2: 0.4}, 1.0)
    with pytest.raises(ValueError):
        blp.StableMotionParams.from_tails(1.5, 0.0, 1.0)


def test_bundle_constants():
    b = blp.reference_bundle()
    assert b.theta_star == pytest.approx(0.19947114, rel=1e-7)
    assert b.lower_target() == pytest.approx(1.0 / b.theta_star, rel=1e-8)
    assert b.limit_cdf(1.0) == pytest.approx(1.0 / (1.0 + b.theta_star), rel=1e-9)
    assert b.k_pmf(1) == pytest.approx(1.0 - b.phi_star, rel=1e-10)
    constants = json.loads(b.constants())
    assert constants["theta_star"] == pytest.approx(b.theta_star)


def test_scaling():
    one = blp.SlowVariation.constant(1.0)
    assert blp.h_of_t(one, 1.5, 1.0, 3.0) == pytest.approx(math.exp(2.0), rel=1e-12)
    lp = blp.SlowVariation.log_power(1.0)
    x = blp.big_h(lp, 1.5, 1e-6)
    assert x ** -1.5 * lp(x) == pytest.approx(1e-6, rel=1e-10)


def test_sampling_is_reproducible():
    stable = blp.StableMotionParams.from_c_star(1.5, 1.0)
    a = blp.sample_increments(stable, 1.0, 100, blp.seed_stream(1, 2))
    b = blp.sample_increments(stable, 1.0, 100, blp.seed_stream(1, 2))
    c = blp.sample_increments(stable, 1.0, 100, blp.seed_stream(1, 3))
    assert a == b
    assert a != c


def test_cauchy_sampler_against_closed_form():
    stable = blp.StableMotionParams.from_tails(1.0, 0.5, 0.5)
    sample = blp.sample_increments(stable, 1.0, 20000, blp.Rng(3))
    gamma = math.pi * 0.5
    ks = blp.ks_statistic(sample, lambda x: 0.5 + math.atan(x / gamma) / math.pi)
    assert ks < 1.63 / math.sqrt(len(sample))


def test_simulate_tree():
    law = blp.OffspringLaw.yule(1.0)
    stable = blp.StableMotionParams.from_c_star(1.5, 1.0)
    snap = blp.simulate(law, stable, 0.0, blp.Rng(1))
    assert snap["population"] == 1 and snap["max_position"] == 0.0
    snap = blp.simulate(law, stable, 3.0, blp.Rng(2), record_sup_path=True)
    assert snap["population"] >= 1
    assert snap["sup_max_position"] >= snap["max_position"]
    assert snap["w_hat"] == pytest.approx(math.exp(-3.0) * snap["population"])
    with pytest.raises(blp.PopulationCapError):
        blp.simulate(law, stable, 12.0, blp.Rng(2), population_cap=10)


def test_limit_samplers():
    b = blp.reference_bundle()
    rng = blp.Rng(4)
    assert b.sample_n_infinity(0.0, 0.1, rng) == []
    atoms = b.sample_n_infinity(2.0, 0.1, rng)
    assert all(abs(x) > 0.1 and m >= 1 for x, m in atoms)
    xi = b.sample_xi(0.1, rng)
    assert all(x <= 1.0 for x, _ in xi)


def test_oracle_suites_pass():
    for name, value, threshold, ok in blp.gw_oracle_suite() + blp.scaling_oracle_suite():
        assert ok, (name, value, threshold)


def test_run_config(tmp_path: pathlib.Path):
    config = tmp_path / "run.ini"
    out = tmp_path / "out"
    config.write_text(
        "[model]\noffspring = 2:1.0\nbeta = 1.0\nalpha = 1.5\nc_star = 1.0\n"
        f"[run]\nexperiments = gw_tables, weak_limit_rt\nhorizons = 2\nreplications = 50\nmaster_seed = 1\noutput = {out}\n"
    )
    files, failures = blp.run(str(config))
    assert failures == 0
    assert (out / "weak_limit_rt.csv").read_text().startswith("experiment,quantity,t,x,estimate")
    assert json.loads(blp.print_constants(str(config)))["lambda"] == pytest.approx(1.0)
    config.write_text("[run]\nreplications = 0\n")
    with pytest.raises(blp.ConfigError):
        blp.run(str(config))
