"""Step-indexed parameter profiles (pump, coupling, noise width, temperature...).

A schedule is evaluated at integer step indices t in [0, n_steps].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

# required parameter names per schedule kind
KINDS: dict[str, tuple[str, ...]] = {
    "constant": ("value",),
    "tanh-ramp": ("amplitude", "sharpness"),
    "linear": ("final",),
    "inverse-linear-beta": ("beta_final",),
    "geometric": ("start", "decay"),
    "periodic-square": ("low", "high", "period"),
}


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    n_steps: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {sorted(KINDS)}")
        missing = [k for k in KINDS[self.kind] if k not in self.params]
        extra = [k for k in self.params if k not in KINDS[self.kind]]
        if missing or extra:
            raise ValueError(f"{self.kind} schedule needs exactly {KINDS[self.kind]}; "
                             f"missing {missing}, unexpected {extra}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})
        for k, v in self.params.items():
            if not math.isfinite(v):
                raise ValueError(f"schedule parameter {k} must be finite, got {v}")
        if self.kind == "geometric" and not 0 < self.params["decay"] <= 1:
            raise ValueError(f"geometric decay must lie in (0, 1], got {self.params['decay']}")
        if self.kind == "periodic-square" and self.params["period"] <= 0:
            raise ValueError("period must be positive")

    def with_steps(self, n_steps: int) -> "ScheduleSpec":
        return replace(self, n_steps=int(n_steps))

    # convenience constructors
    @classmethod
    def constant(cls, value, n_steps=1):
        return cls("constant", {"value": value}, n_steps)

    @classmethod
    def tanh_ramp(cls, amplitude, sharpness, n_steps=1):
        return cls("tanh-ramp", {"amplitude": amplitude, "sharpness": sharpness}, n_steps)

    @classmethod
    def linear(cls, final, n_steps=1):
        return cls("linear", {"final": final}, n_steps)

    @classmethod
    def inverse_linear_beta(cls, beta_final, n_steps=1):
        return cls("inverse-linear-beta", {"beta_final": beta_final}, n_steps)

    @classmethod
    def geometric(cls, start, decay, n_steps=1):
        return cls("geometric", {"start": start, "decay": decay}, n_steps)

    @classmethod
    def periodic_square(cls, low, high, period, n_steps=1):
        return cls("periodic-square", {"low": low, "high": high, "period": period}, n_steps)


def _eval(spec: ScheduleSpec, t):
    p = spec.params
    frac = t / spec.n_steps
    kind = spec.kind
    if kind == "constant":
        return p["value"] + 0.0 * t
    if kind == "tanh-ramp":
        return p["amplitude"] * np.tanh(p["sharpness"] * frac)
    if kind == "linear":
        return p["final"] * frac
    if kind == "inverse-linear-beta":
        return p["beta_final"] * frac
    if kind == "geometric":
        return p["start"] * p["decay"] ** t
    # periodic-square: high for the first half of each period
    phase = np.mod(t, p["period"])
    return np.where(phase < p["period"] / 2, p["high"], p["low"])


def eval_schedule(spec: ScheduleSpec, t: int) -> float:
    if not 0 <= t <= spec.n_steps:
        raise ValueError(f"step {t} outside [0, {spec.n_steps}]")
    return float(_eval(spec, t))


def schedule_values(spec: ScheduleSpec) -> np.ndarray:
    """All values for t = 0..n_steps (length n_steps + 1)."""
    t = np.arange(spec.n_steps + 1, dtype=np.float64)
    return np.asarray(_eval(spec, t), dtype=np.float64) * np.ones_like(t)
