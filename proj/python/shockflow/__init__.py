"""Admissible velocities, coalescing particle flows and their regularizations
for Hamilton-Jacobi equations with convex Hamiltonians."""

import json
import os

from ._shockflow import (  # noqa: F401
    AdmissibleSolution,
    ConfigError,
    HamiltonianModel,
    InitialCondition,
    LimitMomentumSet,
    NumericalFailure,
    __version__,
    active_set,
    admissible_velocity,
    bregman_divergence,
    check_admissibility,
    classify_shock,
    evaluate_phi,
    fixture_names,
    integrate_flow,
    lagrangian,
    lhat,
    limit_data,
    limit_set_from_momenta,
    momentum_of_velocity,
    self_consistent_velocities,
    solve_value,
    velocity_of_momentum,
    young_gap,
)
from ._shockflow import _run_experiment


def run(config_path, output_dir=None):
    """Run an experiment config and return its summary as a dict."""
    return json.loads(_run_experiment(os.fspath(config_path), os.fspath(output_dir or "")))
