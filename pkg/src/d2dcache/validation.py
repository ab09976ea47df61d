"""Cross-validation checks run by ``d2dcache validate`` and the acceptance tests.

Every check returns a :class:`Check` carrying the measured quantities, so
a report can list what was compared and how far apart it was.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import geometry, interference
from .coverage import (
    MobilityQuery,
    coverage_file2_asymptotic,
    coverage_file2_total,
    db_to_linear,
    sweep,
)
from .distributions import NetworkParams, pdf_r2_given_r1
from .numerics import QuadratureSpec, integrate_semi_infinite
from .results import to_csv
from .simulator import SimulationConfig, estimate_coverage

REFERENCE = NetworkParams(lam=1.0, p_a=0.5, q=0.5, alpha=4.0)
AGREEMENT_V = (0.0, 0.5, 1.0, 2.0, 5.0)
MOBILITY_V = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
THRESHOLD_DB = (-10.0, -5.0, 0.0, 5.0, 10.0)


@dataclass
class Check:
    key: str
    title: str
    passed: bool
    detail: str
    smoke: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        smoke = " [smoke]" if self.smoke else ""
        return f"[{tag}] {self.key} {self.title}{smoke}: {self.detail}"


@dataclass(frozen=True)
class Settings:
    quick: bool = False
    tol_scale: float = 1.0
    seed: int = 20160934
    workers: int = 1

    @property
    def agreement_trials(self) -> int:
        return 10_000 if self.quick else 100_000


def asymptotic_oracle(params: NetworkParams, T: float) -> float:
    """Closed form at alpha = 4: rho1 = sqrt(T) atan(sqrt(T)), rho2 = sqrt(T) atan(1/sqrt(T))."""
    if params.alpha != 4:
        raise ValueError("closed-form oracle only holds for alpha = 4")
    rt = math.sqrt(T)
    r1, r2 = rt * math.atan(rt), rt * math.atan(1.0 / rt)

    def pc(p):
        return p / (p + params.q * (r1 + (1 - p) * r2)) if p > 0 else 0.0

    return params.p_a * pc(params.p_b) + params.p_b * pc(params.p_a)


def static_coverage_direct(params: NetworkParams, T: float) -> float:
    """Coverage at v = 0 straight from the degenerate formulas, via scipy.

    At v = 0: |A| = pi (r2^2 - r1^2), the location-1 server sits at r12 = r1,
    and C1 lies inside C2 so the exclusion correction vanishes.
    """
    q, alpha, lam = params.q, params.alpha, params.lam

    def tail(a, s):
        return integrate.quad(lambda r: r / (1.0 + r**alpha / s), a, np.inf,
                              epsabs=1e-11, epsrel=1e-10)[0]

    def subcase(lam2, lam1):
        if lam2 == 0:
            return 0.0

        def inner(r2, r1):
            s = T * r2**alpha
            dens = 2 * np.pi * lam2 * r2 * np.exp(-lam2 * np.pi * (r2**2 - r1**2))
            l1 = 1 - q + q * r1**alpha / (r1**alpha + s)
            l2 = np.exp(-2 * np.pi * q * lam1 * tail(r1, s))
            l3 = np.exp(-2 * np.pi * q * lam2 * tail(r2, s))
            return dens * l1 * l2 * l3

        def outer(r1):
            hi = math.sqrt(r1 * r1 + 25.0 / (lam2 * np.pi))
            val = integrate.quad(inner, r1, hi, args=(r1,), epsabs=1e-10, epsrel=1e-10, limit=200)[0]
            return 2 * np.pi * lam * r1 * np.exp(-lam * np.pi * r1 * r1) * val

        r1_hi = math.sqrt(25.0 / (lam * np.pi))
        return integrate.quad(outer, 0.0, r1_hi, epsabs=1e-9, epsrel=1e-9, limit=200)[0]

    lam_a, lam_b = params.p_a * lam, params.p_b * lam
    total = 0.0
    if params.p_a > 0:
        total += params.p_a * subcase(lam_b, lam_a)
    if params.p_b > 0:
        total += params.p_b * subcase(lam_a, lam_b)
    return total


def lune_area_sampled(r1, r2, v, n, rng):
    """Point-sampling estimate of |C2 \\ C1| and its standard error."""
    pts = rng.uniform(-r2, r2, size=(n, 2))
    in_c2 = pts[:, 0] ** 2 + pts[:, 1] ** 2 < r2 * r2
    in_c1 = (pts[:, 0] + v) ** 2 + pts[:, 1] ** 2 < r1 * r1
    frac = np.mean(in_c2 & ~in_c1)
    box = 4 * r2 * r2
    return frac * box, box * math.sqrt(frac * (1 - frac) / n)


# ---------------------------------------------------------------------------
# Acceptance criteria


def check_mc_agreement(st: Settings) -> Check:
    rows, ok, widths = [], True, []
    for v in AGREEMENT_V:
        qy = MobilityQuery.from_db(v, 0.0)
        an = coverage_file2_total(REFERENCE, qy)
        mc = estimate_coverage(REFERENCE, qy, SimulationConfig(n_trials=st.agreement_trials,
                                                          seed=st.seed, workers=st.workers))
        inside = mc.ci_low <= an.value <= mc.ci_high
        widths.append(mc.error)
        ok &= inside
        rows.append(f"v={v:g}: analytic {an.value:.5f} vs MC {mc.value:.5f} "
                    f"[{mc.ci_low:.5f}, {mc.ci_high:.5f}]{'' if inside else ' OUTSIDE'}")
    hw_ok = max(widths) <= 0.005 or st.quick
    return Check("1", "analytic vs Monte Carlo at reference parameters", ok and hw_ok,
                 "; ".join(rows) + f"; max CI half-width {max(widths):.5f}", smoke=st.quick)


def check_asymptotic(st: Settings) -> Check:
    T = 1.0
    closed = coverage_file2_asymptotic(REFERENCE, T)
    oracle = asymptotic_oracle(REFERENCE, T)
    far = coverage_file2_total(REFERENCE, MobilityQuery(1e3, T)).value
    # 0.45911 carries five digits, so its tolerance does not scale.
    ok = (abs(closed - 0.45911) <= 1e-4
          and abs(closed - oracle) <= 1e-9 * st.tol_scale
          and abs(far - closed) <= 1e-2 * st.tol_scale)
    return Check("2", "asymptotic closed form", ok,
                 f"asymptotic {closed:.6f}, arctan oracle {oracle:.6f}, analytic at v=1e3 {far:.6f}")


def check_mobility_monotone(st: Settings) -> Check:
    est = sweep(REFERENCE, "v", MOBILITY_V, fixed=1.0, workers=st.workers)
    vals = [e.value for e in est]
    errs = [e.error for e in est]
    ok = all(e.ok for e in est) and all(
        b - a >= -2 * st.tol_scale * max(ea, eb)
        for a, b, ea, eb in zip(vals, vals[1:], errs, errs[1:]))
    return Check("3", "coverage non-decreasing in v", ok,
                 ", ".join(f"v={v:g}:{x:.5f}" for v, x in zip(MOBILITY_V, vals)))


def check_threshold_monotone(st: Settings) -> Check:
    parts, ok = [], True
    for v in (0.0, 1.0):
        est = sweep(REFERENCE, "T", [db_to_linear(t) for t in THRESHOLD_DB], fixed=v, workers=st.workers)
        vals = [e.value for e in est]
        ok &= all(e.ok for e in est) and all(b < a for a, b in zip(vals, vals[1:]))
        parts.append(f"v={v:g}: " + ", ".join(f"{x:.4f}" for x in vals))
    return Check("4", "coverage strictly decreasing in T", ok, "; ".join(parts))


def check_distance_distribution(st: Settings) -> Check:
    rng = np.random.default_rng(st.seed + 5)
    spec = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)
    worst_norm = 0.0
    for _ in range(200):
        r1, v, lam2 = rng.uniform(0.01, 3.0), rng.uniform(0.0, 5.0), rng.uniform(0.1, 2.0)
        z1 = max(0.0, r1 - v)
        bps = [b for b in (abs(v - r1), v + r1) if b > z1 + 1e-9]
        res = integrate_semi_infinite(lambda x: pdf_r2_given_r1(x, r1, v, lam2), z1,
                                      QuadratureSpec(spec.abs_tol, spec.rel_tol,
                                                     breakpoints=tuple(sorted(set(bps)))))
        worst_norm = max(worst_norm, abs(res.value - 1.0))

    worst_cont = 0.0
    for _ in range(1000):
        r1, v = rng.uniform(0.01, 5.0), rng.uniform(0.01, 5.0)
        outer = v + r1
        worst_cont = max(worst_cont, abs(geometry._lune(r1, outer, v) - np.pi * (outer**2 - r1**2)))
        inner = abs(v - r1)
        expected = np.pi * inner**2 if v > r1 else 0.0
        worst_cont = max(worst_cont, abs(geometry._lune(r1, inner, v) - expected))

    worst_fd = 0.0
    for _ in range(500):
        r1, v = rng.uniform(0.05, 3.0), rng.uniform(0.05, 4.0)
        r2 = rng.uniform(max(0.0, r1 - v), v + r1 + 2.0)
        h = 1e-6 * max(1.0, r2)
        if min(abs(r2 - abs(v - r1)), abs(r2 - v - r1), r2 - max(0.0, r1 - v)) < 1e-3:
            continue
        fd = (geometry.region_area(r1, r2 + h, v) - geometry.region_area(r1, r2 - h, v)) / (2 * h)
        d = geometry.region_area_deriv(r1, r2, v)
        worst_fd = max(worst_fd, abs(fd - d) / max(abs(d), 1e-12))

    ts = st.tol_scale
    ok = worst_norm <= 1e-6 * ts and worst_cont <= 1e-9 * ts and worst_fd <= 1e-5 * ts
    return Check("5", "serving-distance law", ok,
                 f"max |norm-1| {worst_norm:.2e}, max branch jump {worst_cont:.2e}, "
                 f"max FD rel err {worst_fd:.2e}")


def check_lune(st: Settings) -> Check:
    exact = np.pi / 3 + math.sqrt(3) / 2
    # Intersection of two unit circles at unit separation, subtracted from pi.
    identity = np.pi - (2 * math.acos(0.5) - 0.5 * math.sqrt(4 - 1))
    got = geometry.lune_area(1.0, 1.0, 1.0)
    ok = abs(got - exact) <= 1e-12 and abs(got - identity) <= 1e-12
    rng = np.random.default_rng(st.seed + 6)
    worst = 0.0
    n = 100_000 if st.quick else 1_000_000
    for _ in range(20):
        r1, r2 = rng.uniform(0.2, 3.0, 2)
        v = rng.uniform(abs(r1 - r2), r1 + r2)
        est, se = lune_area_sampled(r1, r2, v, n, rng)
        z = abs(est - geometry.lune_area(r1, r2, v)) / se
        worst = max(worst, z)
    ok &= worst <= 3.0
    return Check("6", "lune area oracle", ok,
                 f"lune(1,1,1)={got:.15f} (exact {exact:.15f}); worst sampled z-score {worst:.2f} over 20 configs",
                 smoke=st.quick)


def check_degeneracy(st: Settings) -> Check:
    rng = np.random.default_rng(st.seed + 7)
    transforms_one = True
    for _ in range(50):
        s, r1, v, th = rng.uniform(0, 20), rng.uniform(0.01, 3), rng.uniform(0, 4), rng.uniform(0, np.pi)
        r2 = rng.uniform(max(0, r1 - v), 4)
        vals = (interference.laplace_i1(s, r1, th, v, 0.0, 4.0),
                interference.laplace_i2(s, r1, v, 0.0, 0.7, 4.0),
                interference.laplace_i3(s, r1, r2, v, 0.0, 0.7, 4.0))
        transforms_one &= all(x == 1.0 for x in vals)
    p0 = NetworkParams(lam=1.0, p_a=0.5, q=0.0, alpha=4.0)
    qy = MobilityQuery(0.7, 1.0)
    an = coverage_file2_total(p0, qy).value
    mc = estimate_coverage(p0, qy, SimulationConfig(n_trials=2000, seed=st.seed)).value
    static = coverage_file2_total(REFERENCE, MobilityQuery(0.0, 1.0)).value
    direct = static_coverage_direct(REFERENCE, 1.0)
    ok = (transforms_one and abs(an - 1.0) <= 1e-6 * st.tol_scale and mc == 1.0
          and abs(static - direct) <= 1e-6 * st.tol_scale)
    return Check("7", "degenerate cases (q=0, v=0)", ok,
                 f"q=0 transforms all 1: {transforms_one}; analytic {an:.8f}; MC {mc:.4f}; "
                 f"static {static:.8f} vs direct {direct:.8f}")


def check_laplace(st: Settings) -> Check:
    rng = np.random.default_rng(st.seed + 8)
    s_grid = (0.1, 1.0, 10.0, 100.0)
    bounded = monotone = exclusion = True
    for _ in range(100):
        alpha = rng.uniform(2.2, 6.0)
        q = rng.uniform(0.05, 1.0)
        lam = rng.uniform(0.1, 2.0)
        r1, v, th = rng.uniform(0.05, 3.0), rng.uniform(0.0, 4.0), rng.uniform(0, np.pi)
        r2 = rng.uniform(max(0.0, r1 - v), max(0.0, r1 - v) + 3.0)
        prev = None
        for s in s_grid:
            # Log scale: with alpha near 2 the transforms underflow double precision.
            logs = np.array([np.log(interference.laplace_i1(s, r1, th, v, q, alpha)),
                             interference.log_laplace_i2(s, r1, v, q, lam, alpha),
                             interference.log_laplace_i3(s, r1, r2, v, q, lam, alpha)])
            bounded &= bool(np.all(np.isfinite(logs) & (logs <= 0)))
            if prev is not None:
                monotone &= bool(np.all(logs <= prev + 1e-12 * np.maximum(1.0, np.abs(prev))))
            prev = logs
            with_b = interference.log_laplace_i3(s, r1, r2, v, q, lam, alpha)
            no_b = interference.log_laplace_i3(s, r1, r2, v, q, lam, alpha, exclusion=False)
            exclusion &= with_b >= no_b
    return Check("8", "Laplace transform bounds and ordering", bounded and monotone and exclusion,
                 f"in (0,1]: {bounded}; non-increasing in s: {monotone}; B-correction raises L3: {exclusion}")


def check_reproducibility(st: Settings) -> Check:
    def csv_run(seed):
        cfg = SimulationConfig(n_trials=300, seed=seed)
        est = sweep(REFERENCE, "v", [0.0, 1.0], fixed=1.0, method="montecarlo", sim_cfg=cfg)
        est += sweep(REFERENCE, "v", [0.0, 1.0], fixed=1.0, method="analytic")
        return to_csv(est)

    a, b, c = csv_run(st.seed), csv_run(st.seed), csv_run(st.seed + 1)
    identical = a == b and a != c

    ns = (100, 1_000, 10_000) if st.quick else (1_000, 10_000, 100_000)
    qy = MobilityQuery(0.0, 1.0)
    widths = [estimate_coverage(REFERENCE, qy, SimulationConfig(n_trials=n, seed=st.seed + 9,
                                                           workers=st.workers)).error for n in ns]
    ratios = [w0 / w1 for w0, w1 in zip(widths, widths[1:])]
    shrink = all(abs(r / math.sqrt(10) - 1) <= 0.2 for r in ratios)
    return Check("9", "reproducibility and CI shrinkage", identical and shrink,
                 f"byte-identical CSV for equal seeds, different for other seed: {identical}; "
                 f"half-widths {', '.join(f'{w:.5f}' for w in widths)}, ratios "
                 f"{', '.join(f'{r:.3f}' for r in ratios)} (target {math.sqrt(10):.3f} +/- 20%)",
                 smoke=st.quick)


CRITERIA: dict[str, Callable[[Settings], Check]] = {
    "1": check_mc_agreement,
    "2": check_asymptotic,
    "3": check_mobility_monotone,
    "4": check_threshold_monotone,
    "5": check_distance_distribution,
    "6": check_lune,
    "7": check_degeneracy,
    "8": check_laplace,
    "9": check_reproducibility,
}


def run_all(st: Settings = Settings(), only=None) -> list[Check]:
    keys = only or list(CRITERIA)
    return [CRITERIA[k](st) for k in keys]
