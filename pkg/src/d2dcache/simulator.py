"""Monte Carlo replay of the two-location protocol on a marked PPP.

Each trial draws a Poisson number of devices uniformly in a finite window,
marks them A (probability p_A) or B, lets the user at location 1 = (-v, 0)
pick its nearest device (whose mark is "file 1"), then serves file 2 at
location 2 = (0, 0) from the nearest device with the other mark. Every
other device interferes when active (probability q); all links see
unit-mean Rayleigh fading.

Devices beyond the window are not drawn. Their interference at location 2
is added as its mean (``far_field="mean"``), which removes the truncation
bias that otherwise decays only like R^(2 - alpha); the residual is of
second order in the far-field fluctuation.

Trial ``i`` under seed ``s`` uses its own Philox stream keyed by
SeedSequence(s, spawn_key=(i,)), so results do not depend on the order
or the process in which trials are run.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .coverage import CoverageEstimate, MobilityQuery
from .distributions import NetworkParams
from .geometry import GeometryCase, classify
from .numerics import QuadratureSpec, integrate_finite


class ConfigurationError(RuntimeError):
    """The simulation window or parameters cannot produce valid trials."""


@dataclass(frozen=True)
class SimulationConfig:
    n_trials: int = 10_000
    seed: int = 0
    window_radius: Optional[float] = None
    ci_level: float = 0.99
    redraw_budget: int = 1000
    # "disc": one disc around the midpoint of the two locations.
    # "twin": union of two discs of radius window_radius - v/2, one per location.
    window_shape: str = "disc"
    # "mean": add the mean interference from outside the window; "none": drop it.
    far_field: str = "mean"
    workers: int = 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigurationError("n_trials must be >= 1")
        if not 0 < self.ci_level < 1:
            raise ConfigurationError("ci_level must lie in (0, 1)")
        if self.window_shape not in ("disc", "twin"):
            raise ConfigurationError(f"unknown window shape {self.window_shape!r}")
        if self.far_field not in ("mean", "none"):
            raise ConfigurationError(f"unknown far-field mode {self.far_field!r}")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ConfigurationError("window_radius must be positive")

    def radius_for(self, params: NetworkParams, v: float) -> float:
        if self.window_radius is not None:
            return float(self.window_radius)
        return default_window_radius(params, v)


def default_window_radius(params: NetworkParams, v: float) -> float:
    """v/2 plus 12 mean spacings of the sparser file population."""
    p = min(params.p_a, params.p_b, 0.5)
    if p == 0:
        p = 0.5
    return 0.5 * v + 12.0 / math.sqrt(params.lam * p)


@dataclass(frozen=True)
class TrialOutcome:
    covered: bool
    r1: float
    r2: float
    sir: float
    geometry_case: GeometryCase
    redraws: int = 0


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.Philox(ss))


def _window_discs(v, radius, shape):
    if shape == "disc":
        return [(-0.5 * v, 0.0)], radius
    return [(-v, 0.0), (0.0, 0.0)], radius - 0.5 * v


def far_field_mean(params: NetworkParams, v: float, radius: float, shape: str = "disc") -> float:
    """Mean interference at location 2 from active devices outside the window.

    Campbell: q * lam * integral over the outside region of |x|^(-alpha),
    done in polar coordinates about location 2, which lies inside the window.
    """
    if params.q == 0:
        return 0.0
    centers, rad = _window_discs(v, radius, shape)
    # the disc containing location 2 first, so its segment starts at r = 0
    centers = sorted(centers, key=lambda c: math.hypot(*c))
    a = params.alpha

    def per_angle(phi):
        u = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        spans = []
        for cx, cy in centers:
            b = u[..., 0] * cx + u[..., 1] * cy
            disc = np.sqrt(np.maximum(b * b - (cx * cx + cy * cy) + rad * rad, 0.0))
            spans.append((np.maximum(b - disc, 0.0), b + disc))
        # ray segments covered by the window, merged from r = 0 outwards
        reach = spans[0][1]
        total = np.zeros_like(phi)
        for lo, hi in spans[1:]:
            gap = lo > reach
            lo = np.where(gap, lo, reach)
            total += reach ** (2 - a) - lo ** (2 - a)
            reach = np.where(hi > reach, hi, reach)
        return (total + reach ** (2 - a)) / (a - 2)

    # both window shapes are symmetric about the axis through the two locations
    res = integrate_finite(per_angle, 0.0, np.pi, QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10,
                                                                 max_subdivisions=500))
    return 2.0 * params.q * params.lam * res.value


def _window_check(query: MobilityQuery, radius: float, shape: str):
    if radius <= 0.5 * query.v:
        raise ConfigurationError(
            f"window radius {radius} does not exceed v/2 = {0.5 * query.v}; "
            "both user locations must lie inside the window")


def _draw_points(rng, lam, v, radius, shape):
    """Positions (n, 2) of a PPP of intensity lam on the window."""
    centers, rad = _window_discs(v, radius, shape)
    chunks = []
    for k, (cx, cy) in enumerate(centers):
        n = rng.poisson(lam * math.pi * rad * rad)
        rr = rad * np.sqrt(rng.random(n))
        ang = 2.0 * math.pi * rng.random(n)
        pts = np.column_stack((cx + rr * np.cos(ang), cy + rr * np.sin(ang)))
        for (px, py) in centers[:k]:
            # Union of discs: drop points already covered by an earlier disc.
            pts = pts[(pts[:, 0] - px) ** 2 + (pts[:, 1] - py) ** 2 >= rad * rad]
        chunks.append(pts)
    return np.concatenate(chunks) if len(chunks) > 1 else chunks[0]


def _inside(pts, v, radius, shape):
    if shape == "disc":
        return (pts[:, 0] + 0.5 * v) ** 2 + pts[:, 1] ** 2 < radius * radius
    rad = radius - 0.5 * v
    return (((pts[:, 0] + v) ** 2 + pts[:, 1] ** 2 < rad * rad)
            | (pts[:, 0] ** 2 + pts[:, 1] ** 2 < rad * rad))


def _replay(pts, is_a, active, fading, params, query, far=0.0):
    """Protocol outcome for one realization, or None if it must be redrawn."""
    if len(pts) == 0:
        return None
    v, alpha = query.v, params.alpha
    d1 = np.hypot(pts[:, 0] + v, pts[:, 1])
    i1 = int(np.argmin(d1))
    r1 = float(d1[i1])
    candidates = np.flatnonzero(is_a != is_a[i1])
    if candidates.size == 0:
        return None
    d2 = np.hypot(pts[:, 0], pts[:, 1])
    i2 = int(candidates[np.argmin(d2[candidates])])
    r2 = float(d2[i2])
    # Nearest-neighbour selection leaves C1 empty, hence r2 >= r1 - v.
    assert r2 >= r1 - v - 1e-9 * max(1.0, r1), (r1, r2, v)
    with np.errstate(divide="ignore"):
        power = fading * d2 ** (-alpha)
    mask = active.copy()
    mask[i2] = False
    interference = float(power[mask].sum()) + far
    signal = float(power[i2])
    sir = signal / interference if interference > 0 else math.inf
    return TrialOutcome(covered=sir > query.T, r1=r1, r2=r2, sir=sir,
                        geometry_case=classify(r1, r2, v))


def _marks(rng, n, params):
    is_a = rng.random(n) < params.p_a
    active = rng.random(n) < params.q
    fading = rng.exponential(1.0, n)
    return is_a, active, fading


@functools.lru_cache(maxsize=256)
def _far_cached(params, v, radius, shape):
    return far_field_mean(params, v, radius, shape)


def _far(params, v, radius, cfg):
    return _far_cached(params, v, radius, cfg.window_shape) if cfg.far_field == "mean" else 0.0


def run_trial(params: NetworkParams, query: MobilityQuery, cfg: SimulationConfig,
              trial_index: int) -> TrialOutcome:
    """Replay one trial; realizations without a usable serving device are redrawn."""
    radius = cfg.radius_for(params, query.v)
    _window_check(query, radius, cfg.window_shape)
    rng = trial_rng(cfg.seed, trial_index)
    far = _far(params, query.v, radius, cfg)
    for attempt in range(cfg.redraw_budget + 1):
        pts = _draw_points(rng, params.lam, query.v, radius, cfg.window_shape)
        is_a, active, fading = _marks(rng, len(pts), params)
        out = _replay(pts, is_a, active, fading, params, query, far)
        if out is not None:
            return replace(out, redraws=attempt)
    raise ConfigurationError(
        f"trial {trial_index}: no usable realization in {cfg.redraw_budget} redraws "
        f"(window radius {radius:.3g}, p_a={params.p_a})")


def wilson_interval(successes: int, n: int, level: float) -> tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion."""
    z = stats.norm.ppf(0.5 + 0.5 * level)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    lo, hi = max(0.0, float(center - half)), min(1.0, float(center + half))
    # The bounds reach 0 and 1 exactly at the extremes; keep rounding from breaking that.
    if successes == 0:
        lo = 0.0
    if successes == n:
        hi = 1.0
    return lo, hi


TrialFn = Callable[[NetworkParams, MobilityQuery, SimulationConfig, int], TrialOutcome]


def _count(args):
    params, query, cfg, start, stop, trial_fn = args
    hits = redraws = 0
    for i in range(start, stop):
        out = trial_fn(params, query, cfg, i)
        hits += bool(out.covered)
        redraws += out.redraws
    return hits, redraws


def estimate_coverage(params: NetworkParams, query: MobilityQuery, cfg: SimulationConfig,
                      trial_fn: TrialFn = run_trial) -> CoverageEstimate:
    """Fraction of covered trials with a Wilson interval at ``cfg.ci_level``."""
    n = cfg.n_trials
    workers = max(1, min(cfg.workers, n))
    bounds = np.linspace(0, n, workers + 1).astype(int)
    jobs = [(params, query, cfg, int(a), int(b), trial_fn) for a, b in zip(bounds, bounds[1:])]
    if workers == 1:
        parts = [_count(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count, jobs))
    hits = sum(p[0] for p in parts)
    redraws = sum(p[1] for p in parts)
    lo, hi = wilson_interval(hits, n, cfg.ci_level)
    return CoverageEstimate(
        value=hits / n, method="montecarlo", error=0.5 * (hi - lo), params=params,
        query=query, ci_low=lo, ci_high=hi, n_trials=n, seed=cfg.seed,
        extra={"redraw_fraction": redraws / (n + redraws),
               "window_radius": cfg.radius_for(params, query.v)},
    )


@dataclass(frozen=True)
class WindowReport:
    base: float
    doubled: float
    shift: float
    half_width: float
    n_trials: int
    redraw_fraction: float

    @property
    def passed(self) -> bool:
        return abs(self.shift) < self.half_width


def validate_window(params: NetworkParams, query: MobilityQuery, cfg: SimulationConfig,
                    n_trials: Optional[int] = None) -> WindowReport:
    """Compare coverage in the configured window against a doubled window.

    Each trial draws the PPP on the doubled window and replays the protocol
    twice: on all devices, and on those inside the original window. The
    paired difference isolates the truncation bias of the original window.
    """
    radius = cfg.radius_for(params, query.v)
    _window_check(query, radius, cfg.window_shape)
    n = n_trials or max(1000, cfg.n_trials // 10)
    big = 2.0 * radius
    far_base, far_big = _far(params, query.v, radius, cfg), _far(params, query.v, big, cfg)
    hits_base = hits_big = redraws = 0
    for i in range(n):
        rng = trial_rng(cfg.seed, i)
        for attempt in range(cfg.redraw_budget + 1):
            pts = _draw_points(rng, params.lam, query.v, big, cfg.window_shape)
            is_a, active, fading = _marks(rng, len(pts), params)
            keep = _inside(pts, query.v, radius, cfg.window_shape)
            full = _replay(pts, is_a, active, fading, params, query, far_big)
            base = _replay(pts[keep], is_a[keep], active[keep], fading[keep], params, query,
                           far_base)
            if full is not None and base is not None:
                break
            redraws += 1
        else:
            raise ConfigurationError(f"window validation trial {i}: redraw budget exhausted")
        hits_base += base.covered
        hits_big += full.covered
    lo, hi = wilson_interval(hits_base, n, cfg.ci_level)
    return WindowReport(base=hits_base / n, doubled=hits_big / n,
                        shift=(hits_big - hits_base) / n, half_width=float(0.5 * (hi - lo)),
                        n_trials=n, redraw_fraction=redraws / (n + redraws))
