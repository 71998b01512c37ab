"""Ising solvers behind one contract: run(problem, params, seed) -> RunRecord.

``run_batch`` advances many restarts together as rows of one state array.
Each row owns its generator, so a restart's record does not depend on the
batch it ran in.
"""
from __future__ import annotations

import time
from typing import Sequence

from ..model import IsingProblem
from .annealing import metropolis_sweeps, simulate_sa
from .base import (
    JSON_FIELDS, SCHEDULE_ROLES, SOLVER_KINDS, RunRecord, SolverParams, Trajectory, finish_records,
    make_rngs, run_seed, schedules_from_mapping,
)
from .cim import simulate_oeo_cim, simulate_opo_cim, simulate_sim_cim
from .defaults import default_params
from .gd import simulate_gd
from .hopfield import simulate_hopfield, simulate_hopfield_discrete
from .oim import simulate_oim
from .sbm import simulate_sbm

_SIMULATORS = {
    "sim-cim": (simulate_sim_cim, "sign"),
    "oeo-cim": (simulate_oeo_cim, "sign"),
    "opo-cim": (simulate_opo_cim, "sign"),
    "oim": (simulate_oim, "phase"),
    "gd": (simulate_gd, "sign"),
    "sbm": (simulate_sbm, "sign"),
    "hopfield": (simulate_hopfield, "sign"),
    "hopfield-discrete": (simulate_hopfield_discrete, "sign"),
    "sa": (simulate_sa, "sign"),
}

_DISCRETE = ("sim-cim", "oeo-cim", "hopfield-discrete", "sa")


def _check_compatible(params: SolverParams):
    kind, integ = params.kind, params.integrator
    if kind == "sbm":
        if integ not in ("symplectic", "euler"):
            raise ValueError(f"sbm requires the symplectic or euler integrator, got {integ!r}")
    elif kind not in _DISCRETE and integ == "symplectic":
        raise ValueError(f"{kind} is first order; symplectic stepping applies to sbm only")


def run_batch(problem: IsingProblem, params: SolverParams, seeds: Sequence[int]) -> list[RunRecord]:
    """Run one restart per seed, all advanced together; records come back in seed order."""
    seeds = [int(s) for s in seeds]
    if not seeds:
        return []
    _check_compatible(params)
    simulate, kind = _SIMULATORS[params.kind]
    rngs = make_rngs(seeds)
    traj = Trajectory(problem, len(seeds), kind)
    start = time.perf_counter()
    evals = simulate(problem, params, rngs, traj)
    elapsed = time.perf_counter() - start
    steps = traj.steps if params.kind == "hopfield-discrete" else None
    return finish_records(problem, params, seeds, traj, elapsed, derivative_evals=evals, steps=steps)


def run(problem: IsingProblem, params: SolverParams, seed: int) -> RunRecord:
    return run_batch(problem, params, [seed])[0]


def run_restarts(problem: IsingProblem, params: SolverParams, base_seed: int, runs: int,
                 batch: int = 256) -> list[RunRecord]:
    """``runs`` restarts seeded base_seed XOR run_index, executed in batches."""
    seeds = [run_seed(base_seed, r) for r in range(runs)]
    out = []
    for i in range(0, runs, batch):
        out.extend(run_batch(problem, params, seeds[i:i + batch]))
    return out


def _kind(params: SolverParams, expected: str) -> SolverParams:
    if params.kind != expected:
        raise ValueError(f"expected {expected} parameters, got {params.kind!r}")
    return params


def run_sim_cim(problem, params, seed):
    return run(problem, _kind(params, "sim-cim"), seed)


def run_oeo_cim(problem, params, seed):
    return run(problem, _kind(params, "oeo-cim"), seed)


def run_opo_cim(problem, params, seed):
    return run(problem, _kind(params, "opo-cim"), seed)


def run_oim(problem, params, seed):
    return run(problem, _kind(params, "oim"), seed)


def run_gd(problem, params, seed):
    return run(problem, _kind(params, "gd"), seed)


def run_sbm(problem, params, seed):
    return run(problem, _kind(params, "sbm"), seed)


def run_hopfield(problem, params, seed, variant: str = "continuous"):
    if variant not in ("continuous", "discrete"):
        raise ValueError(f"variant must be continuous or discrete, got {variant!r}")
    if variant == "discrete" and params.kind == "hopfield":
        params = params.updated(kind="hopfield-discrete")
    return run(problem, _kind(params, "hopfield" if variant == "continuous" else "hopfield-discrete"), seed)


def run_sa(problem, params, seed):
    return run(problem, _kind(params, "sa"), seed)


__all__ = [
    "JSON_FIELDS", "SCHEDULE_ROLES", "SOLVER_KINDS", "RunRecord", "SolverParams", "default_params",
    "metropolis_sweeps", "run", "run_batch", "run_restarts", "run_seed", "schedules_from_mapping",
    "run_sim_cim", "run_oeo_cim", "run_opo_cim", "run_oim", "run_gd", "run_sbm", "run_hopfield", "run_sa",
]
