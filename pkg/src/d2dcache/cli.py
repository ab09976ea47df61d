"""Command-line entry point: ``d2dcache {coverage,sweep,asymptotic,validate}``.

Exit codes: 0 success, 1 numeric failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coverage import CoverageEstimate, MobilityQuery, asymptotic_estimate, db_to_linear, evaluate_many
from .distributions import NetworkParams
from .results import render
from .simulator import SimulationConfig

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
METHODS = ("analytic", "montecarlo", "asymptotic", "both")

# Config-file keys and their defaults (reference network parameters).
DEFAULTS = {
    "pa": 0.5, "q": 0.5, "alpha": 4.0, "lambda": 1.0,
    "t_db": None, "v": None, "v_grid": None, "t_db_grid": None,
    "method": "analytic", "trials": 10_000, "seed": 0, "window_radius": None,
    "out": None, "format": "csv", "workers": None, "quick": False,
}


class UsageError(ValueError):
    pass


def parse_grid(text) -> list[float]:
    """'a:b:step' (inclusive of b) or 'x,y,z'; lists pass through."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise UsageError(f"grid {text!r}: expected start:stop:step with step > 0")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    out = [float(x) for x in text.split(",") if x.strip()]
    if not out:
        raise UsageError("empty grid")
    return out


@dataclass
class RunConfig:
    params: NetworkParams
    v_values: list[float]
    t_db_values: list[float]
    method: str
    sim: SimulationConfig
    out: Optional[str]
    fmt: str
    workers: int
    v_is_grid: bool = False
    t_is_grid: bool = False
    extra: dict = field(default_factory=dict)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat JSON file with default values for the flags")
    p.add_argument("--pa", type=float, help="probability that a device caches file A")
    p.add_argument("--q", type=float, help="interferer activity probability")
    p.add_argument("--alpha", type=float, help="pathloss exponent (> 2)")
    p.add_argument("--lambda", dest="lambda_", type=float, help="device intensity")
    p.add_argument("--t-db", type=float, help="SIR threshold in dB")
    p.add_argument("--v", type=float, help="displacement between the two locations")
    p.add_argument("--v-grid", help="displacement grid, start:stop:step or comma list")
    p.add_argument("--t-db-grid", help="threshold grid in dB (use --t-db-grid=-10:10:2 for negatives)")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--seed", type=int)
    p.add_argument("--window-radius", type=float, help="simulation window radius")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--quick", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="d2dcache", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("coverage", help="coverage of file 2 at given (v, T)")
    _add_common(p)
    p = sub.add_parser("sweep", help="sweep v or T")
    _add_common(p)
    p = sub.add_parser("asymptotic", help="large-mobility closed form")
    _add_common(p)
    p = sub.add_parser("validate", help="run the cross-validation suite")
    p.add_argument("--quick", action="store_true", help="reduced trial counts (smoke level)")
    p.add_argument("--tol-scale", type=float, default=1.0,
                   help="multiply numeric tolerances (< 1 tightens)")
    p.add_argument("--seed", type=int, default=20160934)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--only", nargs="*", help="criterion numbers to run")
    return parser


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"config: cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config: top level must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise UsageError(f"config: unknown field(s) {', '.join(unknown)}")
    return data


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge defaults < config file < flags and validate the result."""
    cfg = dict(DEFAULTS)
    cfg.update(_load_config(args.config))
    flags = {
        "pa": args.pa, "q": args.q, "alpha": args.alpha, "lambda": args.lambda_,
        "t_db": args.t_db, "v": args.v, "v_grid": args.v_grid, "t_db_grid": args.t_db_grid,
        "method": args.method, "trials": args.trials, "seed": args.seed,
        "window_radius": args.window_radius, "out": args.out, "format": args.format,
        "workers": args.workers, "quick": args.quick,
    }
    cfg.update({k: v for k, v in flags.items() if v is not None})

    try:
        params = NetworkParams(lam=float(cfg["lambda"]), p_a=float(cfg["pa"]),
                               q=float(cfg["q"]), alpha=float(cfg["alpha"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if cfg["method"] not in METHODS:
        raise UsageError(f"method must be one of {', '.join(METHODS)}")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    v_grid = parse_grid(cfg["v_grid"]) if cfg["v_grid"] is not None else None
    t_grid = parse_grid(cfg["t_db_grid"]) if cfg["t_db_grid"] is not None else None
    v_values = v_grid if v_grid is not None else ([float(cfg["v"])] if cfg["v"] is not None else [])
    t_values = t_grid if t_grid is not None else ([float(cfg["t_db"])] if cfg["t_db"] is not None else [])
    if any(not (math.isfinite(v) and v >= 0) for v in v_values):
        raise UsageError("v: displacements must be finite and non-negative")
    if any(not math.isfinite(t) for t in t_values):
        raise UsageError("t_db: thresholds must be finite")
    trials = int(cfg["trials"])
    if cfg["quick"]:
        trials = min(trials, 1000)
    if trials < 1:
        raise UsageError("trials must be >= 1")
    if cfg["window_radius"] is not None and not float(cfg["window_radius"]) > 0:
        raise UsageError("window_radius must be positive")
    workers = cfg["workers"] if cfg["workers"] is not None else (os.cpu_count() or 1)
    if int(workers) < 1:
        raise UsageError("workers must be >= 1")
    sim = SimulationConfig(n_trials=trials, seed=int(cfg["seed"]),
                           window_radius=None if cfg["window_radius"] is None else float(cfg["window_radius"]))
    return RunConfig(params=params, v_values=v_values, t_db_values=t_values, method=cfg["method"],
                     sim=sim, out=cfg["out"], fmt=cfg["format"], workers=int(workers),
                     v_is_grid=v_grid is not None, t_is_grid=t_grid is not None)


def _methods(method: str) -> list[str]:
    return ["analytic", "montecarlo"] if method == "both" else [method]


def _jobs(rc: RunConfig, points: list[tuple[float, float]], methods: list[str]):
    jobs = []
    for m in methods:
        for v, t_db in points:
            jobs.append((rc.params, MobilityQuery.from_db(v, t_db), m, rc.sim, None))
    return jobs


def _run_jobs(jobs, workers):
    from .coverage import DEFAULT_TOLERANCES
    jobs = [(p, qy, m, sim, tol or DEFAULT_TOLERANCES) for p, qy, m, sim, tol in jobs]
    return evaluate_many(jobs, workers)


def _emit(rc: RunConfig, estimates: list[CoverageEstimate]) -> int:
    text = render(estimates, rc.fmt)
    if rc.out:
        with open(rc.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [e for e in estimates if not e.ok]
    for e in failed:
        print(f"error: {e.method} at v={e.query.v:g}, T={e.query.t_db:g} dB: "
              f"{e.failure or 'quadrature did not converge'}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_coverage(rc: RunConfig) -> int:
    if not rc.v_values:
        raise UsageError("v: missing required --v (or --v-grid)")
    if not rc.t_db_values:
        raise UsageError("t_db: missing required --t-db (or --t-db-grid)")
    points = [(v, t) for v in rc.v_values for t in rc.t_db_values]
    return _emit(rc, _run_jobs(_jobs(rc, points, _methods(rc.method)), rc.workers))


def cmd_sweep(rc: RunConfig) -> int:
    if rc.v_is_grid and rc.t_is_grid:
        raise UsageError("sweep: give either --v-grid or --t-db-grid, not both")
    if not (rc.v_is_grid or rc.t_is_grid):
        raise UsageError("sweep: one of --v-grid or --t-db-grid is required")
    if rc.v_is_grid:
        if len(rc.t_db_values) != 1:
            raise UsageError("t_db: a v-sweep needs a fixed --t-db")
        points = [(v, rc.t_db_values[0]) for v in rc.v_values]
    else:
        if len(rc.v_values) != 1:
            raise UsageError("v: a T-sweep needs a fixed --v")
        points = [(rc.v_values[0], t) for t in rc.t_db_values]
    estimates = _run_jobs(_jobs(rc, points, _methods(rc.method)), rc.workers)
    if rc.v_is_grid and rc.method != "asymptotic":
        # Large-mobility reference, repeated per grid point as a constant series.
        estimates += [asymptotic_estimate(rc.params, MobilityQuery.from_db(v, t)) for v, t in points]
    return _emit(rc, estimates)


def cmd_asymptotic(rc: RunConfig) -> int:
    if not rc.t_db_values:
        raise UsageError("t_db: missing required --t-db (or --t-db-grid)")
    v_values = rc.v_values or [math.inf]
    estimates = []
    for t in rc.t_db_values:
        for v in v_values:
            estimates.append(asymptotic_estimate(rc.params, MobilityQuery(v=v, T=db_to_linear(t))))
    return _emit(rc, estimates)


def cmd_validate(args) -> int:
    from .validation import Settings, run_all
    st = Settings(quick=args.quick, tol_scale=args.tol_scale, seed=args.seed, workers=args.workers)
    checks = run_all(st, only=args.only or None)
    for c in checks:
        print(c.line(), flush=True)
    passed = sum(c.passed for c in checks)
    level = " (smoke level: reduced trial counts)" if args.quick else ""
    print(f"{passed}/{len(checks)} criteria passed{level}")
    return EXIT_OK if passed == len(checks) else EXIT_NUMERIC


COMMANDS = {"coverage": cmd_coverage, "sweep": cmd_sweep, "asymptotic": cmd_asymptotic}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            if args.only and any(k not in map(str, range(1, 10)) for k in args.only):
                raise UsageError("--only takes criterion numbers 1-9")
            return cmd_validate(args)
        return COMMANDS[args.command](resolve(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
