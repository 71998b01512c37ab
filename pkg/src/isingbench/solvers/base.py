"""Shared solver machinery: parameters, run records, noise streams, trajectory tracking."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from ..model import IsingProblem, energy, readout
from ..schedules import ScheduleSpec, schedule_values

SOLVER_KINDS = (
    "sim-cim", "oeo-cim", "opo-cim", "oim", "gd", "sbm", "hopfield", "hopfield-discrete", "sa",
)
SCHEDULE_ROLES = ("pump", "coupling", "noise", "activation", "temperature")
JSON_FIELDS = ("solver", "instance", "seed", "final_energy", "best_energy", "steps", "elapsed_us", "success")


@dataclass
class SolverParams:
    """Everything a solver needs besides the problem and the seed.

    ``schedules`` maps a role (pump, coupling, noise, activation, temperature)
    to a profile; ``extras`` carries per-solver constants such as x_sat, K or
    Delta. The option strings select documented alternatives:

    * ``noise_placement``: ``equation`` puts Sim-CIM/OEO-CIM noise inside the
      activation, ``table`` adds it outside.
    * ``noise_scaling``: ``per-step`` adds N(0, sigma^2) each step, ``sqrt-dt``
      scales it by sqrt(dt) (Euler-Maruyama).
    * ``success``: ``best`` judges the best readout along the trajectory,
      ``final`` only the last one.
    * ``sweep_order``: SA visiting order, ``sequential`` or ``random``.
    """

    kind: str
    n_steps: int
    dt: float = 1.0
    integrator: str = "euler"
    schedules: dict[str, ScheduleSpec] = field(default_factory=dict)
    extras: dict[str, float] = field(default_factory=dict)
    eps: float = 1.0
    noise_placement: str = "equation"
    noise_scaling: str = "per-step"
    success: str = "best"
    sweep_order: str = "sequential"

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {self.kind!r}; expected one of {SOLVER_KINDS}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.integrator not in ("euler", "symplectic", "rk4", "rk45"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        bad = set(self.schedules) - set(SCHEDULE_ROLES)
        if bad:
            raise ValueError(f"unknown schedule roles {sorted(bad)}")
        for opt, allowed in (("noise_placement", ("equation", "table")),
                             ("noise_scaling", ("per-step", "sqrt-dt")),
                             ("success", ("best", "final")),
                             ("sweep_order", ("sequential", "random"))):
            if getattr(self, opt) not in allowed:
                raise ValueError(f"{opt} must be one of {allowed}, got {getattr(self, opt)!r}")
        if self.extras.get("x_sat", 1.0) <= 0:
            raise ValueError("x_sat must be positive")

    def schedule(self, role: str) -> np.ndarray:
        """Values of a schedule for t = 0..n_steps, resized to this run's n_steps."""
        try:
            spec = self.schedules[role]
        except KeyError:
            raise ValueError(f"{self.kind} requires a {role!r} schedule") from None
        return schedule_values(spec.with_steps(self.n_steps))

    def extra(self, name: str, default: float | None = None) -> float:
        if name in self.extras:
            return float(self.extras[name])
        if default is None:
            raise ValueError(f"{self.kind} requires extra parameter {name!r}")
        return default

    def updated(self, **changes) -> "SolverParams":
        return replace(self, **changes)


@dataclass
class RunRecord:
    """Outcome of one restart. ``success`` is None when the optimum is unknown."""

    solver: str
    instance: str
    seed: int
    final_energy: float
    final_config: np.ndarray
    best_energy: float
    steps: int
    elapsed_us: float
    success: bool | None
    derivative_evals: int = 0
    diverged: bool = False

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in JSON_FIELDS}

    def to_json(self, with_timing: bool = True) -> str:
        d = self.to_dict()
        if not with_timing:
            d["elapsed_us"] = None
        return json.dumps(d)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        d = json.loads(line)
        missing = set(JSON_FIELDS) - set(d)
        if missing:
            raise ValueError(f"record lacks fields {sorted(missing)}")
        return cls(final_config=np.zeros(0, dtype=np.int8), **{k: d[k] for k in JSON_FIELDS})


def run_seed(base_seed: int, run_index: int) -> int:
    return int(base_seed) ^ int(run_index)


def make_rngs(seeds: Sequence[int]) -> list[np.random.Generator]:
    return [np.random.default_rng(int(s)) for s in seeds]


class NoiseStream:
    """Per-replica random draws, buffered in chunks of steps.

    Every replica owns its generator and draws its values in the same order
    whatever the batch size, so a replica's trajectory is independent of
    which other replicas share the batch.
    """

    def __init__(self, rngs, shape, kind: str = "normal", chunk: int = 64):
        self.rngs = rngs
        self.shape = tuple(shape)
        self.kind = kind
        self.chunk = chunk
        self._buf = None
        self._k = chunk

    def _fill(self):
        size = (self.chunk,) + self.shape
        if self.kind == "normal":
            blocks = [g.standard_normal(size) for g in self.rngs]
        else:
            blocks = [g.random(size) for g in self.rngs]
        self._buf = np.stack(blocks, axis=1)
        self._k = 0

    def draw(self) -> np.ndarray:
        if self._k == self.chunk:
            self._fill()
        out = self._buf[self._k]
        self._k += 1
        return out


def initial_normal(rngs, n: int, scale: float) -> np.ndarray:
    return scale * np.stack([g.standard_normal(n) for g in rngs])


def initial_uniform(rngs, n: int, low: float, high: float) -> np.ndarray:
    return np.stack([g.uniform(low, high, n) for g in rngs])


def initial_spins(rngs, n: int) -> np.ndarray:
    return np.stack([np.where(g.random(n) < 0.5, 1.0, -1.0) for g in rngs])


class Trajectory:
    """Tracks readouts of a batch: best and final configurations, divergence."""

    def __init__(self, problem: IsingProblem, n_rep: int, kind: str = "sign"):
        self.problem = problem
        self.kind = kind
        n = problem.n
        self.best_energy = np.full(n_rep, np.inf)
        self.best_config = np.ones((n_rep, n), dtype=np.int8)
        self.final_config = np.ones((n_rep, n), dtype=np.int8)
        self.alive = np.ones(n_rep, dtype=bool)
        self.steps = np.zeros(n_rep, dtype=np.int64)
        self.final_state = None

    def check_finite(self, *arrays) -> np.ndarray:
        """Mark rows with any non-finite entry as diverged; returns the alive mask."""
        bad = np.zeros_like(self.alive)
        for a in arrays:
            a = np.asarray(a)
            bad |= ~np.isfinite(a.reshape(a.shape[0], -1)).all(axis=1)
        self.alive &= ~bad
        return self.alive

    def observe(self, state, step: int, spins: np.ndarray | None = None):
        s = readout(state, self.kind) if spins is None else spins
        e = self.problem.energies(s)
        live = self.alive
        better = live & (e < self.best_energy)
        self.best_energy[better] = e[better]
        self.best_config[better] = s[better]
        self.final_config[live] = s[live]
        self.steps[live] = step


def finish_records(problem: IsingProblem, params: SolverParams, seeds, traj: Trajectory,
                   elapsed_s: float, derivative_evals: int = 0, steps=None) -> list[RunRecord]:
    """Exact energies and success flags for each replica of a batch."""
    out = []
    per_run_us = 1e6 * elapsed_s / max(len(seeds), 1)
    gs = problem.ground_energy
    tol = problem.energy_tol
    instance = problem.name
    for r, seed in enumerate(seeds):
        final_cfg = traj.final_config[r].copy()
        final_e = energy(problem, final_cfg)
        best_e = min(energy(problem, traj.best_config[r]), final_e)
        judged = best_e if params.success == "best" else final_e
        diverged = not bool(traj.alive[r])
        success = None if gs is None else (bool(judged <= gs + tol) and not diverged)
        out.append(RunRecord(
            solver=params.kind,
            instance=instance,
            seed=int(seed),
            final_energy=final_e,
            final_config=final_cfg,
            best_energy=best_e,
            steps=int(params.n_steps if steps is None else steps[r]),
            elapsed_us=per_run_us,
            success=success,
            derivative_evals=int(derivative_evals),
            diverged=diverged,
        ))
    return out


class CountingDerivative:
    """Wraps a derivative and counts batched evaluations."""

    def __init__(self, f):
        self.f = f
        self.count = 0

    def __call__(self, x, t):
        self.count += 1
        return self.f(x, t)


def noise_width(params: SolverParams, sigma: float) -> float:
    if params.noise_scaling == "sqrt-dt":
        return sigma * np.sqrt(params.dt)
    return sigma


def schedules_from_mapping(data: Mapping[str, Mapping]) -> dict[str, ScheduleSpec]:
    """Build schedule specs from plain dicts: {role: {kind: ..., <param>: value}}."""
    out = {}
    for role, spec in data.items():
        spec = dict(spec)
        kind = spec.pop("kind")
        out[role] = ScheduleSpec(kind, spec)
    return out
