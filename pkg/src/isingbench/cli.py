"""Command-line interface: gen, solve, bench, fit, oracle.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
3 infeasible request (e.g. exact solve of too many spins).
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import bench
from .config import BenchConfig, ConfigError, load_config
from .instances import (
    ORACLE_MAX_SPINS, SQUARE_MODES, InstanceParseError, OracleInfeasibleError, SquareLatticeSpec, VianaBraySpec,
    brute_force_ground_state, config_to_str, gen_planted_square, gen_viana_bray, read_instance, write_instance,
)
from .model import IsingProblem
from .schedules import ScheduleSpec
from .solvers import SolverParams, default_params, run_batch, run_seed
from .solvers.defaults import DEFAULT_KINDS

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def lattice_size(problem: IsingProblem) -> int:
    tag = problem.metadata.get("L")
    return int(tag) if tag else max(2, round(math.sqrt(problem.n)))


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    outputs = []
    for k in range(args.count):
        seed = args.seed + k
        if args.family == "square":
            prob = gen_planted_square(SquareLatticeSpec(args.L, seed, args.loops), args.mode)
        else:
            prob = gen_viana_bray(VianaBraySpec(args.N, args.c, seed), verify=args.verify)
        out = args.out.format(seed=seed, index=k) if args.out != "-" else "-"
        if args.count > 1 and out != "-" and out == args.out:
            raise UsageError("--count > 1 needs {seed} or {index} in --out")
        write_instance(prob, out)
        outputs.append((out, prob))
    log = sys.stderr if any(o == "-" for o, _ in outputs) else sys.stdout
    for out, prob in outputs:
        if prob.ground_energy is not None:
            print(f"{out}: ground_energy {prob.ground_energy:.17g}", file=log)
    return EXIT_OK


# ---------------------------------------------------------------- solve

def _solve_params(args, problem: IsingProblem) -> SolverParams:
    params = default_params(args.solver, args.defaults_L or lattice_size(problem))
    changes = {}
    steps = args.steps if args.steps is not None else args.sweeps
    if steps is not None:
        changes["n_steps"] = steps
    for name in ("dt", "integrator", "eps", "noise_placement", "noise_scaling", "success", "sweep_order"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = value
    schedules = dict(params.schedules)
    extras = dict(params.extras)
    if args.beta_f is not None:
        schedules["temperature"] = ScheduleSpec.inverse_linear_beta(args.beta_f)
    if args.beta is not None:
        schedules["coupling"] = ScheduleSpec.constant(args.beta)
    if args.sigma is not None:
        schedules["noise"] = ScheduleSpec.constant(args.sigma)
    if args.alpha0 is not None or args.alpha1 is not None:
        pump = schedules.get("pump")
        if pump is None or pump.kind != "tanh-ramp":
            raise UsageError(f"--alpha0/--alpha1 apply to tanh-ramp pumps; {args.solver} has none")
        p = dict(pump.params)
        if args.alpha0 is not None:
            p["amplitude"] = args.alpha0
        if args.alpha1 is not None:
            p["sharpness"] = args.alpha1
        schedules["pump"] = ScheduleSpec("tanh-ramp", p)
    if args.x_sat is not None:
        extras["x_sat"] = args.x_sat
    params = params.updated(schedules=schedules, extras=extras, **changes)
    overrides = {}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        overrides[key] = value if key in ("integrator",) else float(value)
    return bench.apply_overrides(params, overrides) if overrides else params


def _chunks(seq, k):
    size = max(1, -(-len(seq) // k))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _batch(args):
    problem, params, seeds = args
    return run_batch(problem, params, seeds)


def cmd_solve(args) -> int:
    problem = read_instance(args.instance)
    try:
        params = _solve_params(args, problem)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    seeds = [run_seed(args.seed, r) for r in range(args.runs)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            parts = list(ex.map(_batch, [(problem, params, c) for c in _chunks(seeds, args.jobs)]))
    else:
        parts = [_batch((problem, params, c)) for c in _chunks(seeds, max(1, len(seeds) // 256 + 1))]
    records = [r for part in parts for r in part]
    lines = "".join(r.to_json(with_timing=not args.no_timing) + "\n" for r in records)
    if args.out in (None, "-"):
        sys.stdout.write(lines)
    else:
        Path(args.out).write_text(lines)
    return EXIT_OK


# ---------------------------------------------------------------- bench

def run_bench(cfg: BenchConfig, jobs: int = 1) -> list[bench.SweepRow]:
    rows = []
    for entry in cfg.solvers:
        for iset in cfg.instance_sets:
            L = iset.L or lattice_size(iset.problems[0])
            result = bench.sweep(
                iset.problems, entry.params_for(L), entry.grid, runs=cfg.runs, p_d=cfg.p_d, seed=cfg.seed,
                units=cfg.units, instance_set=iset.name, L=iset.L, jobs=jobs, B=cfg.bootstrap,
            )
            chosen = result.rows if cfg.all_points else [result.optimum or result.rows[0]]
            for row in chosen:
                row.solver = entry.label
            rows.extend(chosen)
    return rows


def cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = Path(args.out) if args.out else cfg.base_dir / cfg.output
    rows = run_bench(cfg, jobs=args.jobs)
    bench.write_tts_csv(rows, out, cfg.units)
    print(f"wrote {len(rows)} row(s) to {out}", file=sys.stderr)
    if cfg.fit_output:
        fit_path = cfg.base_dir / cfg.fit_output
        try:
            fits = bench.fit_table(bench.read_tts_csv(out))
        except bench.FitError as exc:
            print(f"skipping scaling fit: {exc}", file=sys.stderr)
        else:
            bench.write_fit_csv(fits, fit_path)
    return EXIT_OK


# ---------------------------------------------------------------- fit

def cmd_fit(args) -> int:
    rows = bench.read_tts_csv(args.csv)
    try:
        fits = bench.fit_table(rows)
    except bench.FitError as exc:
        raise UsageError(f"{args.csv}: {exc}") from None
    bench.write_fit_csv(fits, args.out or "-")
    return EXIT_OK


# ---------------------------------------------------------------- oracle

def cmd_oracle(args) -> int:
    problem = read_instance(args.instance)
    e0, cfg = brute_force_ground_state(problem)
    print(f"ground_energy {e0:.17g}")
    print(f"config {config_to_str(cfg)}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isingbench", description="Dynamical-system Ising solvers and TTS benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate instance files")
    fam = g.add_subparsers(dest="family", required=True, parser_class=_Parser)
    sq = fam.add_parser("square", help="planted periodic square lattice")
    sq.add_argument("--L", type=int, required=True)
    sq.add_argument("--mode", choices=SQUARE_MODES, default="frustrated-loops")
    sq.add_argument("--loops", type=int, default=None, help="frustrated-loops count (default L*L/2)")
    vb = fam.add_parser("vb", help="Viana-Bray random regular graph, Gaussian couplings")
    vb.add_argument("--N", type=int, required=True)
    vb.add_argument("--c", type=int, required=True)
    vb.add_argument("--verify", action="store_true", help=f"solve exactly (N <= {ORACLE_MAX_SPINS})")
    for sp in (sq, vb):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--count", type=int, default=1, help="instances with seeds seed..seed+count-1")
        sp.add_argument("--out", default="-", help="output path; may contain {seed} or {index}")
        sp.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run restarts of one solver on an instance")
    s.add_argument("instance")
    s.add_argument("--solver", required=True, choices=DEFAULT_KINDS)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--defaults-L", type=int, default=None, help="lattice size whose tuned defaults to start from")
    s.add_argument("--steps", type=int, default=None)
    s.add_argument("--sweeps", type=int, default=None, help="alias of --steps for sa")
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--integrator", choices=("euler", "symplectic", "rk4", "rk45"), default=None)
    s.add_argument("--eps", type=float, default=None, help="rk45 error tolerance")
    s.add_argument("--beta-f", type=float, default=None, help="sa final inverse temperature")
    s.add_argument("--beta", type=float, default=None, help="constant global coupling")
    s.add_argument("--sigma", type=float, default=None, help="constant noise width")
    s.add_argument("--alpha0", type=float, default=None)
    s.add_argument("--alpha1", type=float, default=None)
    s.add_argument("--x-sat", type=float, default=None)
    s.add_argument("--noise-placement", choices=("equation", "table"), default=None)
    s.add_argument("--noise-scaling", choices=("per-step", "sqrt-dt"), default=None)
    s.add_argument("--success", choices=("best", "final"), default=None)
    s.add_argument("--sweep-order", choices=("sequential", "random"), default=None)
    s.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="dotted override, e.g. extras.K=1 or pump.period=100")
    s.add_argument("--no-timing", action="store_true", help="write elapsed_us as null")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="TTS sweep from a YAML config")
    b.add_argument("config")
    b.add_argument("--out", default=None, help="override the config's output path")
    b.add_argument("--seed", type=int, default=None, help="override the config's seed")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("fit", help="scaling fits from a TTS CSV")
    f.add_argument("csv")
    f.add_argument("--out", default=None)
    f.add_argument("--seed", type=int, default=0, help="accepted for uniformity; fits are deterministic")
    f.set_defaults(func=cmd_fit)

    o = sub.add_parser("oracle", help="exact ground state by enumeration")
    o.add_argument("instance")
    o.add_argument("--seed", type=int, default=0, help="accepted for uniformity; enumeration is deterministic")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OracleInfeasibleError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InstanceParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
