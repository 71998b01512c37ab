"""Generic driver for first-order continuous-time solvers."""
from __future__ import annotations

import numpy as np

from ..integrators import DT_MIN, euler_step, rk4_step, rk45_step
from .base import CountingDerivative, SolverParams, Trajectory


def evolve(params: SolverParams, state: np.ndarray, drift, traj: Trajectory, view,
           add_noise=None, post=None, dt: float | None = None):
    """Integrate ``drift`` for params.n_steps iterations on a batch of states.

    Step k (1..n_steps) freezes schedules at index k. With RK45 every
    iteration is one attempt; rejected rows keep their state and retry with
    a smaller step on the next iteration. Steps never grow beyond the initial
    dt unless ``extras['dt_max']`` says otherwise. ``add_noise(state, k, mask)`` adds
    the stochastic term to rows in ``mask`` after the deterministic update,
    ``post`` maps the state afterwards (e.g. phase wrapping) and ``view``
    extracts what gets read out as spins.

    Returns the final state and the number of derivative evaluations per replica.
    """
    f = CountingDerivative(drift)
    dt = params.dt if dt is None else dt
    integ = params.integrator
    if integ not in ("euler", "rk4", "rk45"):
        raise ValueError(f"{params.kind} supports euler, rk4 or rk45, not {integ!r}")
    n_rep = state.shape[0]
    step_dt = np.full(n_rep, dt)
    dt_max = params.extra("dt_max", dt)
    all_rows = np.ones(n_rep, dtype=bool)
    with np.errstate(all="ignore"):
        traj.observe(view(state), 0)
        for k in range(1, params.n_steps + 1):
            accepted = all_rows
            if integ == "euler":
                new = euler_step(f, state, k, dt, check=False)
            elif integ == "rk4":
                new = rk4_step(f, state, k, dt, check=False)
            else:
                out = rk45_step(f, state, k, step_dt, params.eps, check=False, dt_max=dt_max)
                new, accepted = out.new_state, out.accepted
                collapsed = ~np.isfinite(out.error_estimate) | (out.dt_next < DT_MIN)
                traj.alive &= ~collapsed
                step_dt = np.where(collapsed, dt, out.dt_next)
            if add_noise is not None:
                new = add_noise(new, k, accepted)
            if post is not None:
                new = post(new)
            alive = traj.check_finite(new)
            new[~alive] = 0.0
            state = new
            traj.observe(view(state), k)
    traj.final_state = state
    return state, f.count
