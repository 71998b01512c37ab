"""Hopfield networks: continuous graded-response model and the discrete sign map."""
from __future__ import annotations

import numpy as np

from ..model import IsingProblem, readout
from .base import NoiseStream, SolverParams, Trajectory, initial_spins, noise_width
from .dynamics import evolve

_TINY = np.finfo(np.float64).tiny


def hopfield_drift(problem: IsingProblem, pump, coupling, steepness):
    """dx/dt = -alpha x + beta J tanh(x / zeta(t))."""
    def f(x, k):
        return -pump[k] * x + coupling[k] * problem.field(np.tanh(x / steepness[k]))
    return f


def simulate_hopfield(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    pump = params.schedule("pump")
    coupling = params.schedule("coupling")
    sigma = params.schedule("noise")
    zeta = np.maximum(params.schedule("activation"), _TINY)
    width = noise_width(params, 1.0)
    noise = NoiseStream(rngs, (problem.n,))
    x = sigma[0] * noise.draw()

    def add_noise(state, k, mask):
        return state + (width * sigma[k]) * noise.draw() * mask[:, None]

    _, evals = evolve(params, x, hopfield_drift(problem, pump, coupling, zeta), traj,
                      view=lambda s: s, add_noise=add_noise)
    return evals


def simulate_hopfield_discrete(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    """Synchronous x <- sgn(J x) until a fixed point or n_steps updates.

    Returns per-replica update counts through ``traj.steps``; a replica that
    reaches a fixed point after k updates reports k.
    """
    s = initial_spins(rngs, problem.n).astype(np.int8)
    traj.observe(None, 0, spins=s)
    settled = np.zeros(len(rngs), dtype=bool)
    done_at = np.full(len(rngs), params.n_steps, dtype=np.int64)
    for k in range(1, params.n_steps + 1):
        nxt = readout(problem.field(s.astype(np.float64)), "sign")
        fixed = np.all(nxt == s, axis=1) & ~settled
        done_at[fixed] = k
        settled |= fixed
        s = nxt
        traj.observe(None, k, spins=s)
        if settled.all():
            break
    traj.steps[:] = done_at
    return 0
