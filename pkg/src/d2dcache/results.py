"""Tabular output of coverage estimates (CSV and JSON)."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Optional

from .coverage import CoverageEstimate

FIELDS = ("method", "v", "T_db", "p_a", "q", "alpha", "lambda", "estimate", "err",
          "ci_low", "ci_high", "n_trials", "seed")


def _num(x) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def to_row(est: CoverageEstimate) -> dict:
    p, qy = est.params, est.query
    return {
        "method": est.method,
        "v": qy.v,
        "T_db": round(qy.t_db, 12),
        "p_a": p.p_a,
        "q": p.q,
        "alpha": p.alpha,
        "lambda": p.lam,
        "estimate": _num(est.value),
        "err": _num(est.error),
        "ci_low": _num(est.ci_low),
        "ci_high": _num(est.ci_high),
        "n_trials": est.n_trials,
        "seed": est.seed,
    }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def to_csv(estimates: Iterable[CoverageEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for est in estimates:
        row = to_row(est)
        w.writerow([_fmt(row[k]) for k in FIELDS])
    return buf.getvalue()


def to_json(estimates: Iterable[CoverageEstimate]) -> str:
    """JSON array of rows; non-finite numbers (v = inf) become null."""
    rows = [{k: (None if isinstance(x, float) and not math.isfinite(x) else x)
             for k, x in to_row(e).items()} for e in estimates]
    return json.dumps(rows, indent=2, allow_nan=False) + "\n"


def render(estimates: Iterable[CoverageEstimate], fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(estimates)
    if fmt == "json":
        return to_json(estimates)
    raise ValueError(f"unknown output format {fmt!r}")
