"""Single-spin-flip Metropolis simulated annealing."""
from __future__ import annotations

from typing import Iterator

import numpy as np

from ..model import IsingProblem
from .base import NoiseStream, SolverParams, Trajectory, initial_spins


def metropolis_sweeps(problem: IsingProblem, spins: np.ndarray, betas, rngs,
                      order: str = "sequential") -> Iterator[np.ndarray]:
    """Yield the batch of spins (R, n) after each sweep, one sweep per inverse temperature.

    A flip with energy change dE is accepted with probability min(1, exp(-beta dE)).
    The yielded array is updated in place by later sweeps.
    """
    m = problem.matrix
    n = problem.n
    s = np.array(spins, dtype=np.float64)
    rows = [(m.indices[m.indptr[i]:m.indptr[i + 1]], m.data[m.indptr[i]:m.indptr[i + 1]]) for i in range(n)]
    uniform = NoiseStream(rngs, (n,), kind="uniform")
    keys = NoiseStream(rngs, (n,), kind="uniform") if order == "random" else None
    dense = m.toarray() if order == "random" else None
    rep = np.arange(s.shape[0])
    with np.errstate(over="ignore"):
        for beta in betas:
            u = uniform.draw()
            if keys is None:
                for i in range(n):
                    nbr, w = rows[i]
                    h = (s[:, nbr] * w).sum(axis=1)
                    de = 2.0 * s[:, i] * h
                    flip = (de <= 0) | (u[:, i] < np.exp(-beta * de))
                    s[flip, i] = -s[flip, i]
            else:
                perm = np.argsort(keys.draw(), axis=1, kind="stable")
                for p in range(n):
                    idx = perm[:, p]
                    h = (dense[idx] * s).sum(axis=1)
                    de = 2.0 * s[rep, idx] * h
                    flip = (de <= 0) | (u[:, p] < np.exp(-beta * de))
                    s[rep[flip], idx[flip]] *= -1.0
            yield s


def simulate_sa(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    betas = params.schedule("temperature")[1:]
    s0 = initial_spins(rngs, problem.n)
    traj.observe(None, 0, spins=s0.astype(np.int8))
    for k, s in enumerate(metropolis_sweeps(problem, s0, betas, rngs, params.sweep_order), start=1):
        traj.observe(None, k, spins=s.astype(np.int8))
    return 0
