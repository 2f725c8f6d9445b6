import json
import math

import numpy as np
import pytest

import qnd_photon as qp


def test_catalog():
    assert set(qp.shapes()) == {"gaussian", "decaying_exp", "rising_exp"}
    p = qp.chain_parameters("gaussian", 3)
    assert len(p["gamma_c"]) == 3
    assert p["t_i"] < p["t_f"]
    assert len(qp.figure_ids()) == 13


def test_single_transmon_snr():
    r = qp.snr("gaussian", 1, dt=2e-3)
    assert abs(r["snr"] - 0.70) < 0.05
    # Fock and cavity sources agree
    f = qp.snr("gaussian", 1, source="fock", dt=2e-3)
    assert math.isclose(r["snr"], f["snr"], rel_tol=1e-3)


def test_matched_filter_not_worse():
    box = qp.snr("rising_exp", 2, dt=2e-3)["snr"]
    matched = qp.snr("rising_exp", 2, filter="matched", t_i=0.0, t_f=qp.chain_parameters("rising_exp", 2)["t_end"], dt=2e-3)["snr"]
    assert matched >= box


def test_master_equation_records():
    r = qp.master_equation("gaussian", 2, source="fock", dt=2e-3, t_end=20.0)
    assert r["t"].shape == r["y"].shape
    assert len(r["p_exc"]) == 2
    assert abs(r["integrated_flux"][-1] - 1.0) < 0.02
    assert r["max_trace_drift"] < 1e-9
    assert r["min_eigenvalue"] > -1e-9


def test_monte_carlo_is_seeded():
    a = qp.monte_carlo("gaussian", 1, n_traj=8, seed=5, dt=5e-3)
    b = qp.monte_carlo("gaussian", 1, n_traj=8, seed=5, dt=5e-3)
    assert isinstance(a, np.ndarray)
    np.testing.assert_array_equal(a, b)
    v = qp.monte_carlo("gaussian", 1, n_traj=8, photon=False, seed=5, dt=5e-3)
    e = qp.empirical_snr(v, a, 4.0)
    assert math.isfinite(e["snr"])


def test_detection_helpers():
    f = qp.fidelity([0.0, 1.0, 2.0], [3.0, 4.0, 5.0])
    assert f["p"] == 1.0 and f["rejection"] == 0.0
    assert math.isclose(qp.inferred_fidelity(0.0), 0.5)
    assert math.isclose(qp.fit_sqrt_n([1, 4, 9], [0.5, 1.0, 1.5]), 0.5)


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        qp.snr("square", 1)
    with pytest.raises(qp.ConfigError, match="chain.eta"):
        qp.canonical_config('{"chain": {"eta": 2}}')
    with pytest.raises(qp.IntegrationFailure):
        qp.master_equation("gaussian", 2, dt=1.5)


def test_config_run(tmp_path):
    cfg = {"chain": {"n_transmons": 1}, "grid": {"dt": 0.005}, "analysis": {"me": False}}
    canon = qp.canonical_config(json.dumps(cfg))
    assert json.loads(canon)["chain"]["n_transmons"] == 1
    r = qp.run_config(json.dumps(cfg), str(tmp_path / "run"))
    assert r["complete"], r["error"]
    assert "results.csv" in r["files"]
    assert (tmp_path / "run" / "manifest.json").exists()
