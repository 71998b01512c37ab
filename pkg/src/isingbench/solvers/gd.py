"""Gain-dissipative (polariton condensate) dynamics with feedback-controlled gain.

The complex amplitudes psi_l evolve as

    dpsi_l/dt = psi_l (gamma_l - |psi_l|^2) + beta sum_m J_lm psi_m + h(t) conj(psi_l) + noise
    dgamma_l/dt = eps (rho_th - |psi_l|^2)

with gamma_l the net gain (injection minus loss). The coupling-relaxation
equation is trivial with K = J and is not integrated. Default constants scale
with S = max_l sum_m |J_lm|: eps = 0.005 S, rho_th = 0.15 S, gamma(0) = -S, and
the time step ``params.dt`` is measured in units of 1/S.
"""
from __future__ import annotations

import numpy as np

from ..model import IsingProblem
from .base import NoiseStream, SolverParams, Trajectory
from .dynamics import evolve


def gd_constants(problem: IsingProblem, params: SolverParams) -> dict[str, float]:
    scale = problem.max_abs_row_sum or 1.0
    return {
        "scale": scale,
        "eps_gain": params.extra("eps_gain", 0.005 * scale),
        "rho_th": params.extra("rho_th", 0.15 * scale),
        "gain0": params.extra("gain0", -scale),
        "psi0": params.extra("psi0", 1.0),
    }


def gd_drift(problem: IsingProblem, pump, coupling, eps_gain, rho_th):
    n = problem.n

    def f(state, k):
        a, b, gain = state[:, :n], state[:, n:2 * n], state[:, 2 * n:]
        dens = a * a + b * b
        h = pump[k]
        da = a * (gain - dens) + coupling[k] * problem.field(a) + h * a
        db = b * (gain - dens) + coupling[k] * problem.field(b) - h * b
        dg = eps_gain * (rho_th - dens)
        return np.concatenate([da, db, dg], axis=1)
    return f


def simulate_gd(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    n = problem.n
    c = gd_constants(problem, params)
    pump = params.schedule("pump")
    coupling = params.schedule("coupling")
    sigma = params.schedule("noise")
    dt = params.dt / c["scale"]
    width = np.sqrt(dt) if params.noise_scaling == "sqrt-dt" else 1.0
    noise = NoiseStream(rngs, (2 * n,))
    state = np.zeros((len(rngs), 3 * n))
    state[:, :n] = c["psi0"]
    state[:, 2 * n:] = c["gain0"]

    def add_noise(s, k, mask):
        s = s.copy()
        s[:, :2 * n] += (width * sigma[k]) * noise.draw() * mask[:, None]
        return s

    drift = gd_drift(problem, pump, coupling, c["eps_gain"], c["rho_th"])
    _, evals = evolve(params, state, drift, traj, view=lambda s: s[:, :n], add_noise=add_noise, dt=dt)
    return evals


def densities(state: np.ndarray, n: int) -> np.ndarray:
    """|psi_l|^2 from a packed GD state (R, 3n)."""
    return state[:, :n] ** 2 + state[:, n:2 * n] ** 2
