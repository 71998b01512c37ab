"""Oscillator-based Ising machine: coupled phase oscillators binarized by a second-harmonic lock."""
from __future__ import annotations

import numpy as np

from ..model import IsingProblem
from .base import NoiseStream, SolverParams, Trajectory, noise_width
from .dynamics import evolve


def wrap_phase(x):
    """Map phases into (-pi, pi]."""
    return np.pi - np.mod(np.pi - x, 2.0 * np.pi)


def oim_drift(problem: IsingProblem, pump, coupling):
    # sum_m J_lm sin(x_l - x_m) = sin x_l (J cos x)_l - cos x_l (J sin x)_l
    def f(x, k):
        s, c = np.sin(x), np.cos(x)
        return -pump[k] * np.sin(2.0 * x) - coupling[k] * (s * problem.field(c) - c * problem.field(s))
    return f


def simulate_oim(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    pump = params.schedule("pump")
    coupling = params.schedule("coupling")
    sigma = params.schedule("noise")
    width = noise_width(params, 1.0)
    x = wrap_phase(np.stack([g.uniform(-np.pi, np.pi, problem.n) for g in rngs]))
    noise = NoiseStream(rngs, (problem.n,))

    def add_noise(state, k, mask):
        return state + (width * sigma[k]) * noise.draw() * mask[:, None]

    _, evals = evolve(params, x, oim_drift(problem, pump, coupling), traj, view=lambda s: s,
                      add_noise=add_noise, post=wrap_phase)
    return evals
