"""Benchmark job description loaded from YAML, with strict key checking.

Example::

    units: steps
    runs: 100
    seed: 1
    output: tts.csv
    fit_output: fit.csv
    instance_sets:
      - name: square-L4
        generator: {type: square, L: 4, mode: random-verified, count: 20, seed: 0}
      - name: chook
        files: "instances/*.txt"
    solvers:
      - kind: sa
        n_steps: 4
        grid: {n_steps: [2, 4, 8]}
"""
from __future__ import annotations

import glob
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .instances import SquareLatticeSpec, VianaBraySpec, gen_planted_square, gen_viana_bray, read_instance
from .model import IsingProblem
from .solvers import SolverParams, default_params, schedules_from_mapping
from .solvers.defaults import DEFAULT_KINDS


class ConfigError(ValueError):
    """The bench configuration is malformed; ``problems`` lists every issue found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


TOP_KEYS = {"units", "p_d", "runs", "seed", "output", "fit_output", "all_points", "bootstrap",
            "instance_sets", "solvers"}
SET_KEYS = {"name", "generator", "files", "L"}
GEN_KEYS = {
    "square": {"type", "L", "mode", "count", "seed", "loops"},
    "vb": {"type", "N", "c", "count", "seed", "verify"},
}
SOLVER_KEYS = {"kind", "label", "n_steps", "dt", "integrator", "eps", "schedules", "extras",
               "noise_placement", "noise_scaling", "success", "sweep_order", "grid"}


@dataclass
class InstanceSet:
    name: str
    problems: list[IsingProblem]
    L: int | None = None


@dataclass
class SolverEntry:
    preset: str
    label: str
    overrides: dict[str, Any]
    grid: dict[str, list]

    def params_for(self, L: int) -> SolverParams:
        """Preset defaults at lattice size L, with this entry's overrides applied."""
        base = default_params(self.preset, L)
        o = dict(self.overrides)
        if "schedules" in o:
            o["schedules"] = {**base.schedules, **schedules_from_mapping(o["schedules"])}
        if "extras" in o:
            o["extras"] = {**base.extras, **{k: float(v) for k, v in o["extras"].items()}}
        return base.updated(**o)


@dataclass
class BenchConfig:
    instance_sets: list[InstanceSet]
    solvers: list[SolverEntry]
    units: str = "steps"
    p_d: float = 0.99
    runs: int = 100
    seed: int = 0
    output: str = "tts.csv"
    fit_output: str | None = None
    all_points: bool = False
    bootstrap: int = 1000
    base_dir: Path = field(default_factory=Path)


def _unknown(where: str, data: Mapping, allowed: set) -> list[str]:
    return [f"{where}: unknown key {k!r}" for k in data if k not in allowed]


def _load_set(i: int, data, base: Path, errors: list[str]) -> InstanceSet | None:
    where = f"instance_sets[{i}]"
    if not isinstance(data, Mapping):
        errors.append(f"{where}: expected a mapping")
        return None
    errors.extend(_unknown(where, data, SET_KEYS))
    name = str(data.get("name", f"set{i}"))
    if ("generator" in data) == ("files" in data):
        errors.append(f"{where}: give exactly one of 'generator' or 'files'")
        return None
    problems: list[IsingProblem] = []
    L = data.get("L")
    if "files" in data:
        pattern = str(base / data["files"])
        paths = sorted(glob.glob(pattern))
        problems = [read_instance(p) for p in paths]
    else:
        gen = data["generator"]
        kind = gen.get("type") if isinstance(gen, Mapping) else None
        if kind not in GEN_KEYS:
            errors.append(f"{where}.generator: type must be one of {sorted(GEN_KEYS)}")
            return None
        bad = _unknown(f"{where}.generator", gen, GEN_KEYS[kind])
        if bad:
            errors.extend(bad)
            return None
        count = int(gen.get("count", 1))
        seed = int(gen.get("seed", 0))
        try:
            if kind == "square":
                L = int(gen["L"]) if L is None else L
                problems = [gen_planted_square(SquareLatticeSpec(int(gen["L"]), seed + k, gen.get("loops")),
                                               gen.get("mode", "frustrated-loops")) for k in range(count)]
            else:
                problems = [gen_viana_bray(VianaBraySpec(int(gen["N"]), int(gen["c"]), seed + k),
                                           verify=bool(gen.get("verify", True))) for k in range(count)]
        except KeyError as exc:
            errors.append(f"{where}.generator: missing {exc.args[0]!r}")
            return None
    if L is None and problems:
        tags = {p.metadata.get("L") for p in problems}
        L = int(tags.pop()) if len(tags) == 1 and None not in tags else None
    return InstanceSet(name, problems, None if L is None else int(L))


def _load_solver(i: int, data, errors: list[str]) -> SolverEntry | None:
    where = f"solvers[{i}]"
    if not isinstance(data, Mapping) or "kind" not in data:
        errors.append(f"{where}: expected a mapping with 'kind'")
        return None
    errors.extend(_unknown(where, data, SOLVER_KEYS))
    preset = str(data["kind"])
    if preset not in DEFAULT_KINDS:
        errors.append(f"{where}: unknown kind {preset!r}; expected one of {DEFAULT_KINDS}")
        return None
    overrides = {k: v for k, v in data.items() if k not in ("kind", "label", "grid")}
    grid = data.get("grid") or {}
    if not isinstance(grid, Mapping) or not all(isinstance(v, list) and v for v in grid.values()):
        errors.append(f"{where}.grid: expected a mapping of non-empty lists")
        grid = {}
    return SolverEntry(preset, str(data.get("label", preset)), overrides, dict(grid))


def parse_config(data, base_dir: Path = Path(".")) -> BenchConfig:
    if not isinstance(data, Mapping):
        raise ConfigError(["top level: expected a mapping"])
    errors = _unknown("top level", data, TOP_KEYS)
    for key in ("instance_sets", "solvers"):
        if not isinstance(data.get(key), list) or not data.get(key):
            errors.append(f"top level: {key!r} must be a non-empty list")
    if errors:
        raise ConfigError(errors)
    sets = [_load_set(i, s, base_dir, errors) for i, s in enumerate(data["instance_sets"])]
    solvers = [_load_solver(i, s, errors) for i, s in enumerate(data["solvers"])]
    units = data.get("units", "steps")
    if units not in ("us", "steps"):
        errors.append(f"top level: units must be 'us' or 'steps', got {units!r}")
    for s in sets:
        if s is not None and not s.problems:
            errors.append(f"instance set {s.name!r}: no instances")
    if errors:
        raise ConfigError(errors)
    cfg = BenchConfig(
        instance_sets=sets, solvers=solvers, units=units,
        p_d=float(data.get("p_d", 0.99)), runs=int(data.get("runs", 100)), seed=int(data.get("seed", 0)),
        output=str(data.get("output", "tts.csv")), fit_output=data.get("fit_output"),
        all_points=bool(data.get("all_points", False)), bootstrap=int(data.get("bootstrap", 1000)),
        base_dir=base_dir,
    )
    # catch bad schedule or option values before any solver runs
    for entry in solvers:
        for s in sets:
            try:
                entry.params_for(s.L or 4)
            except (TypeError, ValueError) as exc:
                errors.append(f"solver {entry.label!r}: {exc}")
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path) -> BenchConfig:
    path = Path(path)
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError([f"{path}: {exc}"]) from None
    return parse_config(data, path.parent)
