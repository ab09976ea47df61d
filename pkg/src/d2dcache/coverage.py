"""Analytical coverage probability of file 2 at location 2.

The subcase integral is nested three deep: r1 (outer, weighted by the
nearest-device density), r2 (middle, weighted by the conditional density
of the file-2 serving distance) and theta (inner, uniform on [0, pi]).
The theta average and the interference integrals for every r2 node of a
refinement round are evaluated together through the batched quadrature.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .distributions import NetworkParams, Subcase, pdf_r1, pdf_r2_given_r1, r1_cutoff, r2_cutoff
from .interference import (
    laplace_i2_batch,
    laplace_i3_batch,
    mean_laplace_i1_batch,
    rho1,
    rho2,
)
from .numerics import QuadratureError, QuadratureSpec, integrate_finite, interior_points


def db_to_linear(t_db: float) -> float:
    return 10.0 ** (t_db / 10.0)


def linear_to_db(t: float) -> float:
    return 10.0 * math.log10(t)


@dataclass(frozen=True)
class MobilityQuery:
    """One evaluation point: displacement v and linear SIR threshold T.

    v = inf is accepted and stands for the large-mobility limit; only the
    asymptotic method can evaluate it.
    """

    v: float
    T: float

    def __post_init__(self):
        if not self.v >= 0:
            raise ValueError(f"v must be non-negative, got {self.v}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be positive, got {self.T}")

    @classmethod
    def from_db(cls, v: float, t_db: float) -> "MobilityQuery":
        return cls(v=v, T=db_to_linear(t_db))

    @property
    def t_db(self) -> float:
        return linear_to_db(self.T)


@dataclass(frozen=True)
class CoverageEstimate:
    value: float
    method: str
    error: float
    params: NetworkParams
    query: MobilityQuery
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    n_trials: Optional[int] = None
    seed: Optional[int] = None
    converged: bool = True
    degenerate: bool = False
    failure: Optional[str] = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return self.failure is None and self.converged


@dataclass(frozen=True)
class CoverageTolerances:
    """Absolute tolerances per nesting level, tightening inward."""

    inner: float = 1e-9
    middle: float = 1e-7
    outer: float = 1e-5
    tail_mass: float = 1e-10

    def scaled(self, factor: float) -> "CoverageTolerances":
        return CoverageTolerances(self.inner * factor, self.middle * factor,
                                  self.outer * factor, self.tail_mass)


DEFAULT_TOLERANCES = CoverageTolerances()


@dataclass(frozen=True)
class SubcaseResult:
    value: float
    error: float
    converged: bool
    degenerate: bool = False


def coverage_file2_subcase(params: NetworkParams, query: MobilityQuery, lam_file2: float,
                           lam_file1: float, tol: CoverageTolerances = DEFAULT_TOLERANCES) -> SubcaseResult:
    """Coverage of file 2 when file-2 devices have intensity ``lam_file2``
    and file-1 devices (including the location-1 server) ``lam_file1``.

    Written for subcase Y (file-2 = A); subcase X swaps the intensities.
    An empty file-2 population gives the convention value 0.
    """
    if not math.isfinite(query.v):
        raise ValueError("v = inf is only available through the asymptotic form")
    if lam_file2 <= 0:
        return SubcaseResult(0.0, 0.0, True, degenerate=True)
    v, T = query.v, query.T
    q, alpha = params.q, params.alpha
    inner = QuadratureSpec(abs_tol=tol.inner, rel_tol=tol.inner)
    mid_spec = QuadratureSpec(abs_tol=tol.middle, rel_tol=0.0)
    out_spec = QuadratureSpec(abs_tol=tol.outer, rel_tol=0.0)
    r1_max = r1_cutoff(params.lam, tol.tail_mass)
    worst_middle = [0.0, True]

    def middle(r1: float) -> float:
        z1 = max(0.0, r1 - v)
        r2_max = r2_cutoff(r1, lam_file2, tol.tail_mass)

        def g(r2):
            s = T * r2**alpha
            dens = pdf_r2_given_r1(r2, r1, v, lam_file2)
            l1 = mean_laplace_i1_batch(s, r1, v, q, alpha, inner)
            l2 = laplace_i2_batch(s, r1, v, q, lam_file1, alpha, inner)
            l3 = laplace_i3_batch(s, r1, r2, v, q, lam_file2, alpha, inner)
            return dens * l1 * l2 * l3

        spec = mid_spec.with_breakpoints((abs(v - r1), v + r1), z1, r2_max)
        res = integrate_finite(g, z1, r2_max, spec)
        worst_middle[0] = max(worst_middle[0], res.error_estimate)
        worst_middle[1] = worst_middle[1] and res.converged
        return res.value

    def outer(r1_nodes):
        vals = np.array([middle(float(r1)) for r1 in r1_nodes])
        return vals * pdf_r1(r1_nodes, params)

    spec = out_spec.with_breakpoints((v,), 0.0, r1_max)
    res = integrate_finite(outer, 0.0, r1_max, spec)
    error = res.error_estimate + worst_middle[0] + 2 * tol.tail_mass
    value = min(max(res.value, 0.0), 1.0)
    return SubcaseResult(value, error, res.converged and worst_middle[1])


def coverage_for_subcase(params: NetworkParams, query: MobilityQuery, subcase: Subcase,
                         tol: CoverageTolerances = DEFAULT_TOLERANCES) -> SubcaseResult:
    lam_file2, lam_file1 = params.intensities(subcase)
    return coverage_file2_subcase(params, query, lam_file2, lam_file1, tol)


def coverage_file2_total(params: NetworkParams, query: MobilityQuery,
                         tol: CoverageTolerances = DEFAULT_TOLERANCES) -> CoverageEstimate:
    """Mix the two subcases with weights p_A (X) and p_B (Y)."""
    value = error = 0.0
    converged, degenerate = True, False
    parts = {}
    for sub in (Subcase.X, Subcase.Y):
        w = sub.weight(params)
        if w == 0:
            continue
        r = coverage_for_subcase(params, query, sub, tol)
        parts[sub.value] = r.value
        value += w * r.value
        error += w * r.error
        converged &= r.converged
        degenerate |= r.degenerate
    return CoverageEstimate(
        value=min(max(value, 0.0), 1.0), method="analytic", error=error,
        params=params, query=query, converged=converged, degenerate=degenerate,
        extra={"subcases": parts},
    )


def _pc_closed_form(p: float, q: float, r1: float, r2: float) -> float:
    if p == 0:
        return 0.0
    return p / (p + q * (r1 + (1.0 - p) * r2))


def coverage_file2_asymptotic(params: NetworkParams, T: float) -> float:
    """Limit of the total coverage as v grows without bound."""
    a, b = rho1(T, params.alpha), rho2(T, params.alpha)
    return (params.p_a * _pc_closed_form(params.p_b, params.q, a, b)
            + params.p_b * _pc_closed_form(params.p_a, params.q, a, b))


def asymptotic_estimate(params: NetworkParams, query: MobilityQuery) -> CoverageEstimate:
    value = coverage_file2_asymptotic(params, query.T)
    degenerate = params.p_a in (0.0, 1.0)
    return CoverageEstimate(value=value, method="asymptotic", error=0.0, params=params,
                            query=query, degenerate=degenerate)


def _evaluate(job):
    params, query, method, sim_cfg, tol = job
    try:
        if method == "analytic":
            return coverage_file2_total(params, query, tol)
        if method == "asymptotic":
            return asymptotic_estimate(params, query)
        if method == "montecarlo":
            from .simulator import estimate_coverage
            return estimate_coverage(params, query, sim_cfg)
        raise ValueError(f"unknown method {method!r}")
    except (QuadratureError, ArithmeticError, ValueError, RuntimeError) as exc:
        return CoverageEstimate(value=float("nan"), method=method, error=float("nan"),
                                params=params, query=query, converged=False,
                                failure=f"{type(exc).__name__}: {exc}")


def evaluate_many(jobs: Sequence[tuple], workers: int = 1) -> list[CoverageEstimate]:
    """Evaluate (params, query, method, sim_cfg, tol) jobs, results in input order."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [_evaluate(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, jobs))


def sweep(params: NetworkParams, axis: str, grid: Sequence[float], fixed: float,
          method: str = "analytic", sim_cfg=None, tol: CoverageTolerances = DEFAULT_TOLERANCES,
          workers: int = 1) -> list[CoverageEstimate]:
    """Evaluate coverage along one axis.

    ``axis="v"`` sweeps displacement with ``fixed`` the linear threshold;
    ``axis="T"`` sweeps linear thresholds at displacement ``fixed``.
    A failing point is recorded in its estimate's ``failure`` field.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    if axis == "v":
        queries = [MobilityQuery(v=float(x), T=fixed) for x in grid]
    elif axis == "T":
        queries = [MobilityQuery(v=fixed, T=float(x)) for x in grid]
    else:
        raise ValueError(f"axis must be 'v' or 'T', got {axis!r}")
    jobs = [(params, qy, method, sim_cfg, tol) for qy in queries]
    return evaluate_many(jobs, workers)
