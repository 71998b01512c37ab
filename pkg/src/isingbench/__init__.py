"""Benchmark suite for dynamical-system Ising solvers and simulated annealing."""
from __future__ import annotations

from .model import IsingProblem, energy, readout, validate
from .instances import (
    SquareLatticeSpec, VianaBraySpec, brute_force_ground_state, gen_planted_square, gen_viana_bray,
    read_instance, write_instance,
)
from .schedules import ScheduleSpec, eval_schedule
from .solvers import RunRecord, SolverParams, default_params, run, run_batch, run_restarts

__version__ = "0.1.0"

__all__ = [
    "IsingProblem", "energy", "readout", "validate",
    "SquareLatticeSpec", "VianaBraySpec", "brute_force_ground_state", "gen_planted_square", "gen_viana_bray",
    "read_instance", "write_instance",
    "ScheduleSpec", "eval_schedule",
    "RunRecord", "SolverParams", "default_params", "run", "run_batch", "run_restarts",
]
