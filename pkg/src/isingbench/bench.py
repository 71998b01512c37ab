"""Time-to-solution estimation, bootstrap error bars, parameter sweeps and scaling fits.

TTS = n * tau_run with n = log(1 - p_d) / log(1 - p_s) restarts. Step units
replace tau_run by the mean number of solver steps per run, which makes the
numbers machine independent.
"""
from __future__ import annotations

import csv
import itertools
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .model import IsingProblem
from .schedules import ScheduleSpec
from .solvers import RunRecord, SolverParams, run_batch, run_seed

P_DESIRED = 0.99
MIN_RUNS = 100
FIT_POINTS = 5
UNITS = ("us", "steps")
TTS_HEADER = ("solver", "instance_set", "L", "param_key", "p_s", "n", "tts_us", "tts_steps", "ci_lo", "ci_hi")
FIT_HEADER = ("solver", "a", "b", "err_a", "err_b")


class FitError(ValueError):
    """Too few finite points for a scaling fit."""


@dataclass
class TtsEstimate:
    """Success probability, restart count and TTS in both units.

    ``ci_lo``/``ci_hi`` bound the TTS in the units it was estimated for.
    """

    p_s: float
    n_restarts: float
    tts_us: float
    tts_steps: float
    ci_lo: float
    ci_hi: float
    units: str = "steps"

    @property
    def value(self) -> float:
        return self.tts_steps if self.units == "steps" else self.tts_us


@dataclass
class ScalingFit:
    a: float
    b: float
    err_a: float
    err_b: float
    points_used: list[tuple[float, float]] = field(default_factory=list)


def success_probability(records: Sequence[RunRecord]) -> float:
    """Fraction of successful restarts."""
    if not records:
        raise ValueError("no records")
    if any(r.success is None for r in records):
        raise ValueError("success is undefined for instances without a known ground energy")
    if len(records) < MIN_RUNS:
        warnings.warn(f"only {len(records)} restarts; at least {MIN_RUNS} are recommended", stacklevel=2)
    return sum(bool(r.success) for r in records) / len(records)


def restarts_needed(p_s: float, p_d: float = P_DESIRED) -> float:
    """Restarts needed to hit the optimum at least once with confidence p_d (never below 1)."""
    if not 0.0 <= p_s <= 1.0:
        raise ValueError(f"p_s must lie in [0, 1], got {p_s}")
    if not 0.0 < p_d < 1.0:
        raise ValueError(f"p_d must lie in (0, 1), got {p_d}")
    if p_s >= p_d:
        return 1.0
    if p_s == 0.0:
        return math.inf
    return max(1.0, math.log1p(-p_d) / math.log1p(-p_s))


def _restarts_array(p_s: np.ndarray, p_d: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        n = np.log1p(-p_d) / np.log1p(-np.minimum(p_s, p_d))
    n = np.where(p_s == 0, np.inf, n)
    return np.where(p_s >= p_d, 1.0, np.maximum(n, 1.0))


def tts(records: Sequence[RunRecord], p_d: float = P_DESIRED, units: str = "steps",
        B: int = 1000, seed: int = 0) -> TtsEstimate:
    """TTS of one instance from its restarts.

    The interval resamples the restarts (B bootstrap draws) and takes the
    16th/84th percentiles of the resulting TTS values.
    """
    if units not in UNITS:
        raise ValueError(f"units must be one of {UNITS}")
    p_s = success_probability(records)
    n = restarts_needed(p_s, p_d)
    tau_us = float(np.mean([r.elapsed_us for r in records])) if all(
        r.elapsed_us is not None for r in records) else math.nan
    tau_steps = float(np.mean([r.steps for r in records]))
    per_run = tau_steps if units == "steps" else tau_us
    succ = np.array([bool(r.success) for r in records])
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, len(succ), size=(B, len(succ)))
    boot = _restarts_array(succ[draws].mean(axis=1), p_d) * per_run
    est = n * per_run
    lo, hi = _percentiles(boot)
    return TtsEstimate(p_s=p_s, n_restarts=n, tts_us=n * tau_us, tts_steps=n * tau_steps,
                       ci_lo=min(lo, est), ci_hi=max(hi, est), units=units)


def _percentiles(values: np.ndarray) -> tuple[float, float]:
    lo, hi = np.percentile(values, [16, 84], method="inverted_cdf")
    return float(lo), float(hi)


def bootstrap_median(values: Iterable[float], B: int = 1000, seed: int = 0) -> tuple[float, float, float]:
    """Median with 16th/84th percentile bootstrap bounds; +inf entries are allowed.

    Values are sorted first so the result does not depend on their order.
    """
    v = np.sort(np.asarray(list(values), dtype=np.float64))
    if v.size == 0:
        raise ValueError("bootstrap_median needs at least one value")
    med = _median(v)
    rng = np.random.default_rng(seed)
    meds = np.array([_median(np.sort(v[rng.integers(0, v.size, v.size)])) for _ in range(B)])
    lo, hi = _percentiles(meds)
    return med, min(lo, med), max(hi, med)


def _median(sorted_v: np.ndarray) -> float:
    # np.median returns nan for inf + inf midpoints; average by hand instead
    m = sorted_v.size
    if m % 2:
        return float(sorted_v[m // 2])
    a, b = sorted_v[m // 2 - 1], sorted_v[m // 2]
    if a == b:
        return float(a)
    return float(a + (b - a) / 2) if np.isfinite(b) else math.inf


def fit_scaling(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Least-squares fit of log10 TTS = a + b L over the five largest finite sizes."""
    pts = [(float(L), float(t)) for L, t in points]
    finite = [(L, t) for L, t in pts if math.isfinite(t) and t > 0]
    if len(finite) < len(pts):
        warnings.warn(f"excluded {len(pts) - len(finite)} non-finite TTS point(s) from the fit", stacklevel=2)
    if len(finite) < 2:
        raise FitError("need at least two finite TTS points")
    finite.sort()
    use = finite[-FIT_POINTS:]
    L = np.array([p[0] for p in use])
    y = np.log10([p[1] for p in use])
    if np.ptp(L) == 0:
        raise FitError("all points share one size")
    res = stats.linregress(L, y)
    err_b = float(res.stderr) if len(use) > 2 else 0.0
    err_a = float(res.intercept_stderr) if len(use) > 2 else 0.0
    return ScalingFit(a=float(res.intercept), b=float(res.slope), err_a=err_a, err_b=err_b,
                      points_used=[(float(a), float(b)) for a, b in zip(L, y)])


# ---------------------------------------------------------------- sweeps

def grid_points(grid: Mapping[str, Sequence]) -> list[dict]:
    """Cartesian product of a parameter grid, in key-insertion then value order."""
    if not grid:
        return [{}]
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def param_key(point: Mapping) -> str:
    return ";".join(f"{k}={point[k]}" for k in point) or "default"


def apply_overrides(params: SolverParams, point: Mapping) -> SolverParams:
    """Apply dotted overrides: ``n_steps``, ``dt``, ``extras.<name>``, ``<role>.<param>``."""
    changes = {}
    extras = dict(params.extras)
    schedules = dict(params.schedules)
    for key, value in point.items():
        head, _, tail = key.partition(".")
        if not tail:
            if head in ("n_steps",):
                value = int(value)
            changes[head] = value
        elif head == "extras":
            extras[tail] = float(value)
        elif head in schedules:
            spec = schedules[head]
            schedules[head] = ScheduleSpec(spec.kind, {**spec.params, tail: float(value)}, spec.n_steps)
        else:
            raise ValueError(f"cannot override {key!r}")
    return params.updated(extras=extras, schedules=schedules, **changes)


def instance_seed(problem: IsingProblem, seed: int) -> int:
    """Seed tied to instance content, so results do not depend on list order."""
    return int(np.random.SeedSequence([int(seed), int(problem.digest, 16)]).generate_state(1)[0])


def solve_instance(problem: IsingProblem, params: SolverParams, runs: int, seed: int,
                   batch: int = 256) -> list[RunRecord]:
    base = instance_seed(problem, seed)
    seeds = [run_seed(base, r) for r in range(runs)]
    out = []
    for i in range(0, runs, batch):
        out.extend(run_batch(problem, params, seeds[i:i + batch]))
    return out


def _task(args):
    problem, params, runs, seed = args
    return solve_instance(problem, params, runs, seed)


@dataclass
class SweepRow:
    """Aggregate over the instances of one grid point."""

    solver: str
    instance_set: str
    L: int
    param_key: str
    point: dict
    p_s: float
    n: float
    tts_us: float
    tts_steps: float
    ci_lo: float
    ci_hi: float
    per_instance: list[TtsEstimate]
    n_steps: int

    def csv_row(self, units: str = "steps") -> list:
        us = self.tts_us if units == "us" else math.nan
        return [self.solver, self.instance_set, self.L, self.param_key, _fmt(self.p_s), _fmt(self.n),
                _fmt(us), _fmt(self.tts_steps), _fmt(self.ci_lo), _fmt(self.ci_hi)]


def _fmt(x: float) -> str:
    if isinstance(x, (int, np.integer)):
        return str(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


@dataclass
class SweepResult:
    rows: list[SweepRow]
    optimum: SweepRow | None


def sweep(problems: Sequence[IsingProblem], params: SolverParams, grid: Mapping[str, Sequence] | None = None,
          runs: int = MIN_RUNS, p_d: float = P_DESIRED, seed: int = 0, units: str = "steps",
          instance_set: str = "", L: int | None = None, jobs: int = 1, B: int = 1000) -> SweepResult:
    """Median TTS over instances for every grid point, plus the best point.

    The optimum minimises the median TTS; ties go to the smaller step budget,
    then to the earlier grid point.
    """
    if units not in UNITS:
        raise ValueError(f"units must be one of {UNITS}")
    known = [p for p in problems if p.ground_energy is not None]
    if not known:
        raise ValueError("sweep needs at least one instance with a known ground energy")
    points = grid_points(grid or {})
    size = L if L is not None else _size_label(known)
    tasks = [(prob, apply_overrides(params, pt), runs, seed) for pt in points for prob in known]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]

    rows = []
    m = len(known)
    for g, pt in enumerate(points):
        recs = results[g * m:(g + 1) * m]
        ests = [tts(r, p_d, units, B=B, seed=seed) for r in recs]
        vals = [e.value for e in ests]
        med, lo, hi = bootstrap_median(vals, B=B, seed=seed)
        rows.append(SweepRow(
            solver=params.kind, instance_set=instance_set, L=size, param_key=param_key(pt), point=pt,
            p_s=float(np.median([e.p_s for e in ests])),
            n=_median(np.sort([e.n_restarts for e in ests])),
            tts_us=_median(np.sort([e.tts_us for e in ests])) if units == "us" else math.nan,
            tts_steps=_median(np.sort([e.tts_steps for e in ests])),
            ci_lo=lo, ci_hi=hi, per_instance=ests, n_steps=tasks[g * m][1].n_steps,
        ))
    order = sorted(range(len(rows)), key=lambda i: (_key_value(rows[i], units), rows[i].n_steps, i))
    best = rows[order[0]]
    return SweepResult(rows=rows, optimum=best if math.isfinite(_key_value(best, units)) else None)


def _key_value(row: SweepRow, units: str) -> float:
    return row.tts_steps if units == "steps" else row.tts_us


def _size_label(problems: Sequence[IsingProblem]) -> int:
    sizes = {p.metadata.get("L") or p.metadata.get("N") or str(p.n) for p in problems}
    return int(sizes.pop()) if len(sizes) == 1 else 0


def write_tts_csv(rows: Sequence[SweepRow], path, units: str = "steps"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TTS_HEADER)
        for r in rows:
            w.writerow(r.csv_row(units))


def read_tts_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TTS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TTS_HEADER)}")
        return list(reader)


def fit_table(rows: Sequence[Mapping]) -> dict[str, ScalingFit]:
    """Per-solver scaling fits from TTS CSV rows; uses µs when present, else steps."""
    by_solver: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        us = float(r["tts_us"])
        t = us if not math.isnan(us) else float(r["tts_steps"])
        by_solver.setdefault(r["solver"], []).append((float(r["L"]), t))
    return {s: fit_scaling(pts) for s, pts in by_solver.items()}


def write_fit_csv(fits: Mapping[str, ScalingFit], path):
    """Write fits to ``path``; ``-`` means standard output."""
    if path == "-":
        _write_fits(fits, sys.stdout)
        return
    with open(path, "w", newline="") as fh:
        _write_fits(fits, fh)


def _write_fits(fits, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FIT_HEADER)
    for s, f in fits.items():
        w.writerow([s, _fmt(f.a), _fmt(f.b), _fmt(f.err_a), _fmt(f.err_b)])
