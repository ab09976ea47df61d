"""Two-circle geometry: C1 (radius r1, centred at location 1) and C2 (radius r2,
centred at location 2), with centres a distance v apart.

All area functions broadcast over numpy arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class GeometryDomainError(ValueError):
    pass


class GeometryCase(enum.Enum):
    DISJOINT = "disjoint"
    INTERSECTING = "intersecting"
    ENGULFED = "engulfed"


@dataclass(frozen=True)
class CirclePair:
    r1: float
    r2: float
    v: float

    def __post_init__(self):
        for name in ("r1", "r2", "v"):
            x = getattr(self, name)
            if not (np.isfinite(x) and x >= 0):
                raise GeometryDomainError(f"{name} must be finite and non-negative, got {x}")

    @property
    def case(self) -> GeometryCase:
        return classify(self.r1, self.r2, self.v)

    def lune_area(self) -> float:
        return float(lune_area(self.r1, self.r2, self.v))

    def region_area(self) -> float:
        return float(region_area(self.r1, self.r2, self.v))

    def region_area_deriv(self) -> float:
        return float(region_area_deriv(self.r1, self.r2, self.v))


def classify(r1: float, r2: float, v: float) -> GeometryCase:
    """Disjoint iff v >= r1 + r2, engulfed iff v <= r2 - r1, else intersecting.

    The engulfed test runs first, so the r1 = 0, v = r2 corner is engulfed.
    """
    if v <= r2 - r1:
        return GeometryCase.ENGULFED
    if v >= r1 + r2:
        return GeometryCase.DISJOINT
    return GeometryCase.INTERSECTING


def _clipped_arccos(x):
    return np.arccos(np.clip(x, -1.0, 1.0))


def _triangle_sq(r1, r2, v):
    """16 * (area of the triangle with sides r1, r2, v)^2, clamped at 0.

    Factored so that each factor vanishes exactly at its tangency.
    """
    prod = (r1 + v - r2) * (r1 + v + r2) * (r2 - r1 + v) * (r2 + r1 - v)
    return np.maximum(prod, 0.0)


def _lune(r1, r2, v):
    # Angles via atan2(sin, cos) with a shared sine: well conditioned at
    # tangency, where the arccos form loses half the significant digits.
    root = np.sqrt(_triangle_sq(r1, r2, v))
    a1 = np.arctan2(root, r1**2 + v**2 - r2**2)
    a2 = np.arctan2(root, r2**2 + v**2 - r1**2)
    return np.pi * r2**2 + 0.5 * root - r1**2 * a1 - r2**2 * a2


def lune_area(r1, r2, v):
    """Area of C2 minus C1 for partially overlapping circles.

    Only valid for r2 - r1 < v < r1 + r2 (the intersecting case); arguments
    on the closure of that range are accepted so that branch limits can be
    evaluated.
    """
    r1, r2, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (r1, r2, v)))
    tol = 1e-12 * np.maximum(1.0, r1 + r2 + v)
    if np.any((v < r2 - r1 - tol) | (v > r1 + r2 + tol) | (v <= 0)):
        raise GeometryDomainError("lune_area requires r2 - r1 <= v <= r1 + r2 and v > 0")
    out = np.clip(_lune(r1, r2, v), 0.0, np.pi * r2**2)
    return out[()] if out.ndim == 0 else out


def _check_support(r1, r2, v):
    if np.any(r2 < np.maximum(0.0, r1 - v) - 1e-12 * np.maximum(1.0, r1)):
        raise GeometryDomainError("r2 lies below its support max(0, r1 - v)")


def region_area(r1, r2, v):
    """Area |C2 \\ C1|: full disc, lune, or annulus depending on the case."""
    r1, r2, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (r1, r2, v)))
    _check_support(r1, r2, v)
    disjoint = v >= r1 + r2
    engulfed = v <= r2 - r1
    lune_mask = ~(disjoint | engulfed)
    out = np.where(engulfed, np.pi * (r2**2 - r1**2), np.pi * r2**2)
    if np.any(lune_mask):
        out = np.where(lune_mask, np.clip(_lune(r1, r2, v), 0.0, np.pi * r2**2), out)
    out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out


def region_area_deriv(r1, r2, v):
    """d|C2 \\ C1|/dr2, the length of C2's boundary lying outside C1.

    Exact branch points take the lune-branch value (which coincides with the
    neighbouring branch there anyway, up to the clamp).
    """
    r1, r2, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (r1, r2, v)))
    _check_support(r1, r2, v)
    disjoint = v > r1 + r2
    engulfed = (v < r2 - r1) | (v == 0)
    lune_mask = ~(disjoint | engulfed)
    out = 2 * np.pi * r2
    if np.any(lune_mask):
        phi = np.arctan2(np.sqrt(_triangle_sq(r1, r2, v)), r2**2 + v**2 - r1**2)
        out = np.where(lune_mask & (r2 > 0), 2 * r2 * (np.pi - phi), out)
    return out[()] if out.ndim == 0 else out


def chord_half_angle(r, r1, v):
    """Half-angle, seen from location 2, of the arc of radius r inside C1."""
    r, r1, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (r, r1, v)))
    if np.any(v <= 0):
        raise GeometryDomainError("chord_half_angle needs v > 0")
    if np.any(r <= 0):
        raise GeometryDomainError("chord_half_angle needs r > 0")
    out = _clipped_arccos((r**2 + v**2 - r1**2) / (2 * r * v))
    return out[()] if out.ndim == 0 else out
