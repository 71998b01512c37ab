"""Simulated bifurcation machine (mean-field Kerr parametric oscillators).

    dx/dt = Delta y
    dy/dt = -(K x^2 - alpha(t) + Delta) x + beta J x

The pump alpha(t) rises linearly from zero; there is no noise term.
"""
from __future__ import annotations

import numpy as np

from ..integrators import symplectic_euler_step
from ..model import IsingProblem
from .base import CountingDerivative, SolverParams, Trajectory


def coupling_std(problem: IsingProblem) -> float:
    """Standard deviation of the off-diagonal entries of the full coupling matrix."""
    n = problem.n
    if n < 2 or problem.n_couplings == 0:
        return 1.0
    count = n * (n - 1)
    mean = 2.0 * problem.weights.sum() / count
    second = 2.0 * np.square(problem.weights).sum() / count
    return float(np.sqrt(max(second - mean * mean, 0.0))) or 1.0


def default_beta(problem: IsingProblem) -> float:
    return 0.7 / (coupling_std(problem) * np.sqrt(problem.n))


def simulate_sbm(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    if params.integrator not in ("symplectic", "euler"):
        raise ValueError(f"sbm integrates with symplectic or euler, not {params.integrator!r}")
    pump = params.schedule("pump")
    kerr = params.extra("K", 1.0)
    detuning = params.extra("delta", 1.0)
    beta = params.extra("beta", default_beta(problem))
    spread = params.extra("init_spread", 0.1)
    n = problem.n
    x = np.stack([g.uniform(-spread, spread, n) for g in rngs])
    y = np.stack([g.uniform(-spread, spread, n) for g in rngs])

    fx = CountingDerivative(lambda yy, k: detuning * yy)
    fy = CountingDerivative(lambda xx, k: -(kerr * xx * xx - pump[k] + detuning) * xx + beta * problem.field(xx))
    dt = params.dt
    with np.errstate(all="ignore"):
        traj.observe(x, 0)
        for k in range(1, params.n_steps + 1):
            if params.integrator == "symplectic":
                x, y = symplectic_euler_step(fx, fy, x, y, k, dt, check=False)
            else:
                x, y = x + dt * fx(y, k), y + dt * fy(x, k)
            alive = traj.check_finite(x, y)
            x[~alive] = 0.0
            y[~alive] = 0.0
            traj.observe(x, k)
    traj.final_state = (x, y)
    return fx.count + fy.count
