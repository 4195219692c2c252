import json
import math
from pathlib import Path

import numpy as np
import pytest

import shockflow as sf

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_legendre_pair():
    model = sf.HamiltonianModel.power_law(1, 4.0)
    assert sf.lagrangian(model, [8.0]) == pytest.approx(12.0, rel=1e-12)
    assert sf.momentum_of_velocity(model, [8.0])[0] == pytest.approx(2.0, rel=1e-12)
    assert sf.young_gap(model, [1.0], [0.0]) == pytest.approx(0.25, rel=1e-12)


def test_preshock_value_and_limit_data():
    ic = sf.InitialCondition.neg_power(1)
    model = sf.HamiltonianModel.quadratic(1)
    r = sf.solve_value(ic, model, 0.1, [0.0])
    assert r["value"] == pytest.approx(-8.0 / 3.0 * 1e-3, abs=1e-8)
    lms = sf.limit_data(ic, model, 0.1, [0.0])
    assert lms.k == 2 and lms.is_shock()
    momenta = sorted(e["momentum"][0] for e in lms.entries)
    assert momenta == pytest.approx([-0.4, 0.4], abs=1e-3)


def test_admissible_velocity_and_certificate():
    model = sf.HamiltonianModel.quadratic(2)
    lms = sf.limit_set_from_momenta(model, [np.array([1.0, 0.0]), np.array([-1.0, 0.0]), np.array([0.0, 2.0])])
    sol = sf.admissible_velocity(lms, model)
    assert np.allclose(sol.v_star, [0.0, 0.75], atol=1e-12)
    assert sol.anomaly == pytest.approx(0.78125, rel=1e-12)
    verdict = sf.check_admissibility(lms, model, sol.v_star)
    assert verdict["accepted"]
    assert not sf.check_admissibility(lms, model, sol.v_star + 0.1)["accepted"]
    assert sf.classify_shock(lms, model, sol) == "restraining"


def test_self_consistent_velocity_differs_for_quartic_sheet():
    model = sf.HamiltonianModel.power_law(2, 4.0)
    lms = sf.limit_set_from_momenta(model, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    (sol,) = sf.self_consistent_velocities(lms, model)
    assert np.allclose(sol["v_dagger"], [0.5, 0.5], atol=1e-12)
    assert not np.allclose(sf.admissible_velocity(lms, model).v_star, sol["v_dagger"], atol=1e-3)


def test_flow_coalesces():
    ic = sf.InitialCondition.neg_abs(1)
    model = sf.HamiltonianModel.quadratic(1)
    trajs = sf.integrate_flow(ic, model, [np.array([0.5]), np.array([-0.3])], T=1.0, dt=2e-3)
    assert trajs[1]["merged_into"] == 0
    assert trajs[0]["shock_entry"] == pytest.approx(0.5, abs=6e-3)
    assert abs(trajs[0]["positions"][-1][0]) < 1e-9


def test_errors_map_to_python_exceptions():
    with pytest.raises(sf.ConfigError):
        sf.HamiltonianModel.power_law(1, 1.0)
    with pytest.raises(sf.NumericalFailure):
        sf.solve_value(sf.InitialCondition.neg_power(1), sf.HamiltonianModel.quadratic(1), 50.0, [0.3])


def test_run_experiment(tmp_path):
    summary = sf.run(CONFIGS / "particles.cfg", tmp_path)
    assert summary["shock_reversions"] == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["experiment"] == "particles"
    header = (tmp_path / "trajectories.csv").read_text().splitlines()[0]
    assert header == "traj_id,t,x1,on_shock,merged_into"
    with pytest.raises(sf.ConfigError, match="viscous.mu"):
        sf.run(CONFIGS / "bad_mu.cfg", tmp_path / "bad")


def test_fixture_catalog():
    assert {"neg_abs", "neg_power", "cosine", "min_affine"} <= set(sf.fixture_names())
    assert sf.__version__
    assert math.isfinite(sf.evaluate_phi(sf.InitialCondition.cosine(1, 1.0), sf.HamiltonianModel.cosh_sum(1), 0.5, [0.2]))
