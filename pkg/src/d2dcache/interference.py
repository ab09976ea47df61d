"""Conditional Laplace transforms of the interference seen at location 2.

Interference at location 2 splits into three independent fields:

* I1, the single device that served location 1 (distance r12 from location 2);
* I2, the rest of the file-1 population, which avoids the disc C1;
* I3, the file-2 population outside C1 and C2 (minus the serving device).

All transforms are evaluated at s = T * r2**alpha by the coverage module.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .geometry import GeometryCase, classify, chord_half_angle
from .numerics import (
    QuadratureError,
    QuadratureSpec,
    integrate_batch,
    integrate_batch_semi_infinite,
    integrate_finite,
    integrate_semi_infinite,
)

INNER_SPEC = QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9)


def _checked(res, what):
    if not res.converged:
        raise QuadratureError(f"{what}: no convergence (error estimate {res.error_estimate:.3g})")
    return res.value


def laplace_i1(s, r1, theta, v, q, alpha):
    """E[exp(-s I1)] for the location-1 server seen at angle theta from location 2's direction.

    A device sitting exactly on location 2 (r12 = 0) gives 1 - q for s > 0.
    """
    theta = np.asarray(theta, dtype=float)
    if s == 0 or q == 0:
        return np.ones_like(theta)[()]
    r12_sq = np.maximum(r1 * r1 + v * v - 2.0 * r1 * v * np.cos(theta), 0.0)
    d = r12_sq ** (0.5 * alpha)
    out = 1.0 - q + q * d / (d + s)
    return out[()] if out.ndim == 0 else out


def mean_laplace_i1(s, r1, v, q, alpha, spec: QuadratureSpec = INNER_SPEC):
    """Average of :func:`laplace_i1` over theta uniform on [0, pi]."""
    if s == 0 or q == 0:
        return 1.0
    if v == 0 or r1 == 0:
        return float(laplace_i1(s, r1, 0.0, v, q, alpha))
    res = integrate_finite(lambda th: laplace_i1(s, r1, th, v, q, alpha), 0.0, np.pi, spec)
    return _checked(res, "theta average of L_I1") / np.pi


def _unit_tail(x, alpha, spec):
    """integral_x^inf u / (1 + u^alpha) du."""
    res = integrate_semi_infinite(lambda u: u / (1.0 + u**alpha), x, spec, decay=alpha - 1.0)
    return _checked(res, "interference tail integral")


def tail_integral(a, s, alpha, spec: QuadratureSpec = INNER_SPEC):
    """integral_a^inf r / (1 + r^alpha / s) dr.

    Rescaled by the length s**(1/alpha) so the quadrature sees an O(1) integrand.
    """
    if s == 0:
        return 0.0
    ell = s ** (1.0 / alpha)
    scaled = replace(spec, abs_tol=spec.abs_tol / (ell * ell))
    return ell * ell * _unit_tail(a / ell, alpha, scaled)


def chord_integral(lo, r1, v, s, alpha, spec: QuadratureSpec = INNER_SPEC):
    """integral_lo^{v+r1} f(r, r1) r / (1 + r^alpha / s) dr, f the chord half-angle.

    ``lo`` must lie in [|v - r1|, v + r1]. The substitution
    r = c - h cos(phi) over the full range [|v - r1|, v + r1] removes the
    square-root behaviour of f at both tangency radii.
    """
    if s == 0 or v == 0 or r1 == 0:
        return 0.0
    r_min, r_max = abs(v - r1), v + r1
    c = 0.5 * (r_min + r_max)
    h = 0.5 * (r_max - r_min)
    if h <= 0:
        # v (or r1) below rounding: the annulus of chord radii has no width
        return 0.0
    phi_lo = float(np.arccos(np.clip((c - lo) / h, -1.0, 1.0)))
    if phi_lo >= np.pi:
        return 0.0

    def g(phi):
        r = c - h * np.cos(phi)
        f = chord_half_angle(np.maximum(r, 1e-300), r1, v)
        return f * r / (1.0 + r**alpha / s) * h * np.sin(phi)

    res = integrate_finite(g, phi_lo, np.pi, spec)
    return _checked(res, "chord integral")


def log_laplace_i2(s, r1, v, q, lambda_b, alpha, spec: QuadratureSpec = INNER_SPEC):
    """log E[exp(-s I2)]: file-1 devices outside C1, excluding the location-1 server."""
    if s == 0 or q == 0 or lambda_b == 0:
        return 0.0
    z1 = max(0.0, r1 - v)
    outer = 2.0 * np.pi * tail_integral(z1, s, alpha, spec)
    inside_c1 = 2.0 * chord_integral(abs(v - r1), r1, v, s, alpha, spec)
    return -q * lambda_b * max(outer - inside_c1, 0.0)


def laplace_i2(s, r1, v, q, lambda_b, alpha, spec: QuadratureSpec = INNER_SPEC):
    return float(np.exp(log_laplace_i2(s, r1, v, q, lambda_b, alpha, spec)))


def exclusion_integral_b(r1, r2, v, s, alpha, spec: QuadratureSpec = INNER_SPEC):
    """Weighted measure of C1 \\ C2, the part of C1 lying beyond radius r2."""
    case = classify(r1, r2, v)
    if case is GeometryCase.ENGULFED:
        return 0.0
    lo = v - r1 if case is GeometryCase.DISJOINT else r2
    return 2.0 * chord_integral(lo, r1, v, s, alpha, spec)


def log_laplace_i3(s, r1, r2, v, q, lambda_a, alpha, spec: QuadratureSpec = INNER_SPEC,
                   exclusion: bool = True):
    """log E[exp(-s I3)]: file-2 devices outside C1 and C2.

    ``exclusion=False`` drops the C1 correction (B := 0), i.e. treats the
    field as if only C2 were empty.
    """
    if s == 0 or q == 0 or lambda_a == 0:
        return 0.0
    outer = 2.0 * np.pi * tail_integral(r2, s, alpha, spec)
    b = exclusion_integral_b(r1, r2, v, s, alpha, spec) if exclusion else 0.0
    return -q * lambda_a * max(outer - b, 0.0)


def laplace_i3(s, r1, r2, v, q, lambda_a, alpha, spec: QuadratureSpec = INNER_SPEC,
               exclusion: bool = True):
    return float(np.exp(log_laplace_i3(s, r1, r2, v, q, lambda_a, alpha, spec, exclusion)))


def rho1(T, alpha, spec: QuadratureSpec = INNER_SPEC):
    """T^(2/alpha) * integral_{T^(-2/alpha)}^inf du / (1 + u^(alpha/2))."""
    if T <= 0:
        raise ValueError("threshold must be positive")
    k = T ** (2.0 / alpha)
    res = integrate_semi_infinite(lambda u: 1.0 / (1.0 + u ** (alpha / 2)), 1.0 / k, spec,
                                  decay=alpha / 2)
    return k * _checked(res, "rho1")


def rho2(T, alpha, spec: QuadratureSpec = INNER_SPEC):
    """T^(2/alpha) * integral_0^{T^(-2/alpha)} du / (1 + u^(alpha/2))."""
    if T <= 0:
        raise ValueError("threshold must be positive")
    k = T ** (2.0 / alpha)
    res = integrate_finite(lambda u: 1.0 / (1.0 + u ** (alpha / 2)), 0.0, 1.0 / k, spec)
    return k * _checked(res, "rho2")


# Batched forms used inside the coverage integral. Each takes an array of
# Laplace arguments ``s`` (one per r2 node) for a fixed (r1, v) and returns
# an array of the same length.


def _checked_batch(res, what):
    if not res.all_converged:
        worst = float(np.max(res.error_estimate))
        raise QuadratureError(f"{what}: batch member failed to converge (error estimate {worst:.3g})")
    return res.value


def mean_laplace_i1_batch(s, r1, v, q, alpha, spec: QuadratureSpec = INNER_SPEC):
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    if q == 0:
        return out
    live = s > 0
    if v == 0 or r1 == 0:
        d = (r1 * r1 + v * v) ** (0.5 * alpha)
        out[live] = 1.0 - q + q * d / (d + s[live])
        return out
    sl = s[live]
    a_cos = r1 * r1 + v * v

    def g(th, k):
        d = np.maximum(a_cos - 2.0 * r1 * v * np.cos(th), 0.0) ** (0.5 * alpha)
        return 1.0 - q + q * d / (d + sl[k])

    res = integrate_batch(g, np.zeros(sl.size), np.full(sl.size, np.pi), spec)
    out[live] = _checked_batch(res, "theta average of L_I1") / np.pi
    return out


def tail_integral_batch(a, s, alpha, spec: QuadratureSpec = INNER_SPEC):
    a, s = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(s, dtype=float))
    out = np.zeros(s.shape)
    live = s > 0
    if not np.any(live):
        return out
    ell = s[live] ** (1.0 / alpha)
    scaled = replace(spec, abs_tol=spec.abs_tol / float(np.max(ell * ell)))
    res = integrate_batch_semi_infinite(lambda u, k: u / (1.0 + u**alpha), a[live] / ell, scaled,
                                        decay=alpha - 1.0)
    out[live] = ell * ell * _checked_batch(res, "interference tail integral")
    return out


def chord_integral_batch(lo, r1, v, s, alpha, spec: QuadratureSpec = INNER_SPEC):
    lo, s = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(s, dtype=float))
    out = np.zeros(s.shape)
    if v == 0 or r1 == 0:
        return out
    r_min, r_max = abs(v - r1), v + r1
    c = 0.5 * (r_min + r_max)
    h = 0.5 * (r_max - r_min)
    if h <= 0:
        return out
    phi_lo = np.arccos(np.clip((c - lo) / h, -1.0, 1.0))
    live = (s > 0) & (phi_lo < np.pi)
    if not np.any(live):
        return out
    sl = s[live]

    def g(phi, k):
        r = np.maximum(c - h * np.cos(phi), 1e-300)
        f = np.arccos(np.clip((r * r + v * v - r1 * r1) / (2.0 * r * v), -1.0, 1.0))
        return f * r / (1.0 + r**alpha / sl[k]) * h * np.sin(phi)

    res = integrate_batch(g, phi_lo[live], np.full(sl.size, np.pi), spec)
    out[live] = _checked_batch(res, "chord integral")
    return out


def laplace_i2_batch(s, r1, v, q, lambda_b, alpha, spec: QuadratureSpec = INNER_SPEC):
    s = np.asarray(s, dtype=float)
    if q == 0 or lambda_b == 0:
        return np.ones_like(s)
    z1 = max(0.0, r1 - v)
    outer = 2.0 * np.pi * tail_integral_batch(z1, s, alpha, spec)
    inside_c1 = 2.0 * chord_integral_batch(abs(v - r1), r1, v, s, alpha, spec)
    return np.exp(-q * lambda_b * np.maximum(outer - inside_c1, 0.0))


def exclusion_integral_b_batch(r1, r2, v, s, alpha, spec: QuadratureSpec = INNER_SPEC):
    r2, s = np.broadcast_arrays(np.asarray(r2, dtype=float), np.asarray(s, dtype=float))
    engulfed = v <= r2 - r1
    disjoint = ~engulfed & (v >= r1 + r2)
    lo = np.where(disjoint, v - r1, r2)
    b = 2.0 * chord_integral_batch(lo, r1, v, np.where(engulfed, 0.0, s), alpha, spec)
    return np.where(engulfed, 0.0, b)


def laplace_i3_batch(s, r1, r2, v, q, lambda_a, alpha, spec: QuadratureSpec = INNER_SPEC,
                     exclusion: bool = True):
    r2, s = np.broadcast_arrays(np.asarray(r2, dtype=float), np.asarray(s, dtype=float))
    if q == 0 or lambda_a == 0:
        return np.ones(s.shape)
    outer = 2.0 * np.pi * tail_integral_batch(r2, s, alpha, spec)
    b = exclusion_integral_b_batch(r1, r2, v, s, alpha, spec) if exclusion else 0.0
    return np.exp(-q * lambda_a * np.maximum(outer - b, 0.0))
