"""Explicit time-stepping kernels.

A derivative is any callable ``f(x, t) -> dx/dt`` with t the integer step
index at which the solver's schedules are frozen for the step. States may be
a single vector or a batch of shape (R, n); every kernel works row-wise.
Noise is not handled here; solvers add it after a deterministic step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Derivative = Callable[[np.ndarray, int], np.ndarray]

INTEGRATORS = ("euler", "symplectic", "rk4", "rk45")

# Fehlberg 4(5) tableau
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)

SAFETY = 0.9
GROW_MAX = 4.0
SHRINK_MIN = 0.25
DT_MIN = 1e-12


class DivergenceError(FloatingPointError):
    """A derivative or state became non-finite."""


class StiffnessError(FloatingPointError):
    """The adaptive step size collapsed below DT_MIN."""


@dataclass
class StepOutcome:
    new_state: np.ndarray
    dt_used: float | np.ndarray
    dt_next: float | np.ndarray
    accepted: bool | np.ndarray
    error_estimate: float | np.ndarray


def _finite(a, check=True):
    if check and not np.all(np.isfinite(a)):
        raise DivergenceError("non-finite value during integration")
    return a


def euler_step(f: Derivative, x, t, dt, check: bool = True):
    if np.any(np.asarray(dt) <= 0):
        raise ValueError("dt must be positive")
    return x + dt * _finite(f(x, t), check)


def symplectic_euler_step(fx: Derivative, fy: Derivative, x, y, t, dt, check: bool = True):
    """Position first, then momentum from the updated position.

    ``fx`` maps the momentum y to dx/dt and ``fy`` maps the position x to dy/dt.
    """
    if np.any(np.asarray(dt) <= 0):
        raise ValueError("dt must be positive")
    x_new = x + dt * _finite(fx(y, t), check)
    y_new = y + dt * _finite(fy(x_new, t), check)
    return x_new, y_new


def rk4_step(f: Derivative, x, t, dt, check: bool = True):
    if np.any(np.asarray(dt) <= 0):
        raise ValueError("dt must be positive")
    k1 = _finite(f(x, t), check)
    k2 = _finite(f(x + 0.5 * dt * k1, t), check)
    k3 = _finite(f(x + 0.5 * dt * k2, t), check)
    k4 = _finite(f(x + dt * k3, t), check)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _row_max(a):
    a = np.abs(a)
    if a.ndim <= 1:
        return float(np.max(a)) if a.size else 0.0
    return a.reshape(a.shape[0], -1).max(axis=1)


def rk45_step(f: Derivative, x, t, dt, eps: float, check: bool = True,
              dt_max: float | None = None) -> StepOutcome:
    """One Runge-Kutta-Fehlberg attempt with max-norm error control.

    ``dt`` may be a scalar, or an array of shape (R,) for a batch x of shape
    (R, ...) where each row carries its own step size and acceptance. Rejected
    rows keep their old state; callers retry them with ``dt_next``. With
    ``check=False`` nothing is raised for non-finite values or collapsed steps;
    such rows come back rejected with a non-finite error or tiny ``dt_next``.
    ``dt_max`` caps the proposed next step.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    dt_arr = np.asarray(dt, dtype=np.float64)
    if np.any(dt_arr <= 0):
        raise ValueError("dt must be positive")
    if check and np.any(dt_arr < DT_MIN):
        raise StiffnessError(f"step size fell below {DT_MIN}")
    batched = dt_arr.ndim == 1
    h = dt_arr.reshape((-1,) + (1,) * (np.ndim(x) - 1)) if batched else dt_arr

    ks = []
    for a in _A:
        xi = x
        for aj, kj in zip(a, ks):
            if aj != 0.0:
                xi = xi + h * aj * kj
        ks.append(_finite(f(xi, t), check))
    inc5 = sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
    inc4 = sum(b * k for b, k in zip(_B4, ks) if b != 0.0)
    x5 = x + h * inc5
    err = _row_max(h * (inc5 - inc4))

    with np.errstate(divide="ignore"):
        factor = np.where(err > 0, SAFETY * (eps / np.maximum(err, 1e-300)) ** 0.2, GROW_MAX)
    factor = np.clip(factor, SHRINK_MIN, GROW_MAX)
    dt_next = dt_arr * factor
    if dt_max is not None:
        dt_next = np.minimum(dt_next, dt_max)
    accepted = err <= eps
    if batched:
        new_state = np.where(accepted.reshape(h.shape), x5, x)
        return StepOutcome(new_state, dt_arr, dt_next, accepted, err)
    return StepOutcome(x5 if accepted else x, float(dt_arr), float(dt_next), bool(accepted), float(err))


def rk45_advance(f: Derivative, x, t, dt, eps: float, max_tries: int = 100) -> StepOutcome:
    """Retry a single-state RK45 step with shrinking dt until it is accepted."""
    for _ in range(max_tries):
        out = rk45_step(f, x, t, dt, eps)
        if out.accepted:
            return out
        dt = out.dt_next
    raise StiffnessError(f"no accepted step after {max_tries} attempts")
