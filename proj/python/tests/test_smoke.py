import json
import math

import numpy as np
import pytest

import liqimpact as li

NK = dict(ell=1.3e-5, p=-0.0034, q=8.15e-5)


def test_inflection_matches_minus_p_over_q():
    assert li.inflection_point(NK["p"], NK["q"]) == pytest.approx(0.0034 / 8.15e-5, rel=1e-15)


def test_f_sshape_vectorized_and_zero_at_origin():
    x = np.linspace(-400, 400, 9)
    f = li.f_sshape(x, **NK)
    assert f.shape == x.shape
    assert f[4] == 0.0
    assert np.all(np.diff(f) > 0)


def test_infeasible_rejected():
    params = li.SShapeParams(1.0, 20.0, 1.0)
    assert li.feasibility_margin(params) < 0
    assert not li.is_feasible(params)
    with pytest.raises(li.DomainError):
        li.impact_f([1.0], "sshape", ell=1.0, p=20.0, q=1.0)


def test_linear_root():
    alpha, beta = li.linear_alpha_from_ps(0.3, 2e-3)
    assert 0.3 * alpha + alpha * alpha == pytest.approx(2e-3, rel=1e-14)


def test_noise_free_panel_recovers_truth():
    truth = dict(ell=1e-5, p=-3e-3, q=8e-5)
    panel = li.synth_panel(1e-6, "sshape", truth, c=1.0, m=0.0, eta=160 * math.sqrt(2),
                           n_days=2, bars_per_day=360, noise_sd=0.0, seed=11)
    res = li.fit_panel(panel, "sshape", jobs=1)
    assert res["converged"]
    got = {p["name"]: p["value"] for p in res["params"]}
    for k, v in truth.items():
        assert got[k] == pytest.approx(v, rel=1e-4)


def test_self_comparison_is_degenerate_zero():
    v = [0.1, 0.4, 0.3, 0.2]
    t = li.paired_t_test(v, v)
    assert t["mean_difference"] == 0.0
    assert t["degenerate"]
    d = li.descriptives(v)
    assert d["n"] == 4


def test_cli_simulate_is_deterministic(tmp_path):
    for name in ("a", "b"):
        rc = li.run_cli(["simulate", "--kind", "path", "--seed", "5", "--out-dir", str(tmp_path / name)])
        assert rc == 0
    assert (tmp_path / "a" / "path.csv").read_bytes() == (tmp_path / "b" / "path.csv").read_bytes()
    meta = json.loads((tmp_path / "a" / "simulate.json").read_text())
    assert meta["schema_version"] == 1 and meta["seed"] == 5


def test_cli_usage_error_exit_code():
    assert li.run_cli(["fit"]) == 2
