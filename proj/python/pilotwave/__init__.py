"""Bell-type jump processes and Bohmian trajectories on truncated Fock spaces."""

import json

from ._core import (
    Hamiltonian,
    PilotwaveError,
    ScenarioError,
    State,
    bell_current,
    bell_lattice_model,
    bell_rates,
    btqft_rates,
    dead_particle_speed,
    emission_model,
    master_equation_residual,
    preset_names,
    propagate,
    state_from_amplitudes,
    tv_distance,
)
from . import _core

__all__ = [
    "Hamiltonian",
    "PilotwaveError",
    "ScenarioError",
    "State",
    "bell_current",
    "bell_lattice_model",
    "bell_rates",
    "btqft_rates",
    "check_equivariance",
    "dead_particle_speed",
    "emission_model",
    "master_equation_residual",
    "normalize_scenario",
    "preset",
    "preset_names",
    "propagate",
    "run_scenario",
    "state_from_amplitudes",
    "tv_distance",
]


def preset(name):
    """Scenario dict of a built-in preset."""
    return json.loads(_core._preset(name))


def normalize_scenario(scenario):
    """Validate a scenario dict and return it with defaults filled in."""
    return json.loads(_core._normalize_scenario(json.dumps(scenario)))


def run_scenario(scenario, workers=1):
    """Run a scenario dict; returns (exit_code, artifacts, summary)."""
    return _core._run_scenario(json.dumps(scenario), workers)


def check_equivariance(h, psi0, M, checkpoints, seed=0, dt=0.01, workers=1):
    """Equivariance report as a dict."""
    return json.loads(_core._check_equivariance(h, psi0, M, list(checkpoints), seed, dt, workers))
