"""Quantum-trajectory simulation of a continuously monitored quantum-dot
single-photon source, with timer, CUSUM and Bayesian pump-shutoff control."""

from monitored_sps.errors import (
    ConfigError,
    DegenerateNoise,
    NoFeasibleTime,
    StepUnstable,
    TailNotConverged,
)
from monitored_sps.hilbert import BasisState, StateSpace, build_space, hamiltonian, make_operator
from monitored_sps.dynamics import ModelParams, StepOutput

__all__ = [
    "BasisState",
    "ConfigError",
    "DegenerateNoise",
    "ModelParams",
    "NoFeasibleTime",
    "StateSpace",
    "StepOutput",
    "StepUnstable",
    "TailNotConverged",
    "build_space",
    "hamiltonian",
    "make_operator",
]

__version__ = "0.1.0"
