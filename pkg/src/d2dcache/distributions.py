"""Serving-distance distributions at the two user locations."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryDomainError, region_area, region_area_deriv


@dataclass(frozen=True)
class NetworkParams:
    """Static environment: device intensity, caching split, activity, pathloss."""

    lam: float = 1.0
    p_a: float = 0.5
    q: float = 0.5
    alpha: float = 4.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not 0.0 <= self.p_a <= 1.0:
            raise ValueError(f"p_a must lie in [0, 1], got {self.p_a}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not (np.isfinite(self.alpha) and self.alpha > 2):
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")

    @property
    def p_b(self) -> float:
        return 1.0 - self.p_a

    def intensities(self, subcase: "Subcase") -> tuple[float, float]:
        """(file-2 intensity, file-1 intensity) under ``subcase``."""
        lam_a, lam_b = self.p_a * self.lam, self.p_b * self.lam
        if subcase is Subcase.Y:
            return lam_a, lam_b
        return lam_b, lam_a


class Subcase(enum.Enum):
    """Which file the nearest device at location 1 holds.

    X: file A is file 1 (probability p_A), so file 2 is B.
    Y: file B is file 1 (probability p_B), so file 2 is A.
    """

    X = "X"
    Y = "Y"

    def weight(self, params: NetworkParams) -> float:
        return params.p_a if self is Subcase.X else params.p_b


def pdf_r1(r1, params: NetworkParams):
    """Nearest-device distance density 2*pi*lam*r*exp(-lam*pi*r^2)."""
    r1 = np.asarray(r1, dtype=float)
    if np.any(r1 < 0):
        raise GeometryDomainError("r1 must be non-negative")
    out = 2 * np.pi * params.lam * r1 * np.exp(-params.lam * np.pi * r1**2)
    return out[()] if out.ndim == 0 else out


def r1_cutoff(lam: float, tail_mass: float = 1e-10) -> float:
    """Radius beyond which the nearest-device distance has mass ``tail_mass``."""
    return float(np.sqrt(-np.log(tail_mass) / (lam * np.pi)))


def r2_cutoff(r1: float, lam2: float, tail_mass: float = 1e-10) -> float:
    """Radius beyond which the conditional CCDF of R2 is below ``tail_mass``.

    Uses |C2 \\ C1| >= pi*(r2^2 - r1^2).
    """
    return float(np.sqrt(r1**2 - np.log(tail_mass) / (lam2 * np.pi)))


def ccdf_r2_given_r1(r2, r1, v, lam2: float):
    """P(R2 > r2 | R1 = r1): no file-2 device in C2 \\ C1."""
    if not lam2 > 0:
        raise ValueError(f"file-2 intensity must be positive, got {lam2}")
    out = np.exp(-lam2 * region_area(r1, r2, v))
    return out


def pdf_r2_given_r1(r2, r1, v, lam2: float):
    """Density of R2 given R1 = r1, computed as lam2 * d|A|/dr2 * exp(-lam2 |A|)."""
    if not lam2 > 0:
        raise ValueError(f"file-2 intensity must be positive, got {lam2}")
    return lam2 * region_area_deriv(r1, r2, v) * np.exp(-lam2 * region_area(r1, r2, v))
