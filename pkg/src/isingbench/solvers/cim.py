"""Coherent Ising machine variants: simulated (Sim-CIM), optoelectronic (OEO-CIM), and OPO."""
from __future__ import annotations

import numpy as np

from ..model import IsingProblem
from .base import NoiseStream, SolverParams, Trajectory, noise_width
from .dynamics import evolve

QUARTER_PI = np.pi / 4


def clamp(x, x_sat):
    """Hard-wall activation confining amplitudes to [-x_sat, x_sat]."""
    return np.clip(x, -x_sat, x_sat)


def sim_cim_map(problem: IsingProblem, x, alpha, beta, g, x_sat, inside: bool = True):
    """One Sim-CIM update x <- clamp(x + alpha x + beta J x + g)."""
    pre = x + alpha * x + beta * problem.field(x)
    return clamp(pre + g, x_sat) if inside else clamp(pre, x_sat) + g


def oeo_cim_map(problem: IsingProblem, x, alpha, beta, g, inside: bool = True):
    """One OEO-CIM update x <- cos^2(alpha x + beta J x - pi/4 + g) - 1/2."""
    feedback = alpha * x + beta * problem.field(x)
    if inside:
        return np.cos(feedback - QUARTER_PI + g) ** 2 - 0.5
    return np.cos(feedback - QUARTER_PI) ** 2 + g - 0.5


def simulate_sim_cim(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    """x <- clamp(x + alpha x + beta J x + g); the noise sits inside the clamp
    unless ``noise_placement == 'table'`` moves it outside."""
    pump = params.schedule("pump")
    coupling = params.schedule("coupling")
    sigma = params.schedule("noise")
    x_sat = params.extra("x_sat")
    noise = NoiseStream(rngs, (problem.n,))
    inside = params.noise_placement == "equation"
    x = clamp(sigma[0] * noise.draw(), x_sat)
    with np.errstate(all="ignore"):
        traj.observe(x, 0)
        for k in range(1, params.n_steps + 1):
            x = sim_cim_map(problem, x, pump[k], coupling[k], sigma[k] * noise.draw(), x_sat, inside)
            alive = traj.check_finite(x)
            x[~alive] = 0.0
            traj.observe(x, k)
    traj.final_state = x
    return 0


def simulate_oeo_cim(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    """x <- cos^2(f - pi/4 + g) - 1/2 with feedback f = alpha x + beta J x."""
    pump = params.schedule("pump")
    coupling = params.schedule("coupling")
    sigma = params.schedule("noise")
    noise = NoiseStream(rngs, (problem.n,))
    inside = params.noise_placement == "equation"
    x = sigma[0] * noise.draw()
    with np.errstate(all="ignore"):
        traj.observe(x, 0)
        for k in range(1, params.n_steps + 1):
            x = oeo_cim_map(problem, x, pump[k], coupling[k], sigma[k] * noise.draw(), inside)
            alive = traj.check_finite(x)
            x[~alive] = 0.0
            traj.observe(x, k)
    traj.final_state = x
    return 0


def opo_drift(problem: IsingProblem, pump, coupling):
    def f(x, k):
        return pump[k] * x - (2.0 / 3.0) * x ** 3 + coupling[k] * problem.field(x)
    return f


def simulate_opo_cim(problem: IsingProblem, params: SolverParams, rngs, traj: Trajectory):
    pump = params.schedule("pump")
    coupling = params.schedule("coupling")
    sigma = params.schedule("noise")
    width = noise_width(params, 1.0)
    noise = NoiseStream(rngs, (problem.n,))
    x = sigma[0] * noise.draw()

    def add_noise(state, k, mask):
        return state + (width * sigma[k]) * noise.draw() * mask[:, None]

    _, evals = evolve(params, x, opo_drift(problem, pump, coupling), traj, view=lambda s: s,
                      add_noise=add_noise)
    return evals
