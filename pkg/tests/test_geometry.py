import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from d2dcache.geometry import (
    CirclePair,
    GeometryCase,
    GeometryDomainError,
    chord_half_angle,
    classify,
    lune_area,
    region_area,
    region_area_deriv,
)

UNIT_LUNE = math.pi / 3 + math.sqrt(3) / 2


def lune_reference(r1, r2, v):
    """Textbook two-circle intersection (arccos form), subtracted from pi r2^2."""
    d1 = (v * v + r1 * r1 - r2 * r2) / (2 * v)
    d2 = v - d1
    seg1 = r1 * r1 * math.acos(d1 / r1) - d1 * math.sqrt(r1 * r1 - d1 * d1)
    seg2 = r2 * r2 * math.acos(d2 / r2) - d2 * math.sqrt(r2 * r2 - d2 * d2)
    return math.pi * r2 * r2 - (seg1 + seg2)


@pytest.mark.parametrize("pair, case", [
    ((1, 1, 3), GeometryCase.DISJOINT),
    ((1, 2, 0.5), GeometryCase.ENGULFED),
    ((1, 1, 1), GeometryCase.INTERSECTING),
    ((0, 2, 2), GeometryCase.ENGULFED),
])
def test_classify(pair, case):
    assert classify(*pair) is case
    assert CirclePair(*pair).case is case


def test_circle_pair_validation():
    with pytest.raises(GeometryDomainError):
        CirclePair(-1.0, 1.0, 1.0)
    with pytest.raises(GeometryDomainError):
        CirclePair(1.0, math.nan, 1.0)


def test_lune_examples():
    assert lune_area(1, 1, 1) == pytest.approx(UNIT_LUNE, abs=1e-12)
    assert UNIT_LUNE == pytest.approx(1.913222, abs=1e-6)
    assert lune_area(1, 1, 2 - 1e-12) == pytest.approx(math.pi, abs=1e-5)
    assert lune_area(1, 2, 1 + 1e-12) == pytest.approx(3 * math.pi, abs=1e-5)
    assert lune_area(1, 1, 2) == pytest.approx(math.pi, abs=1e-12)
    assert lune_area(1, 2, 1) == pytest.approx(3 * math.pi, abs=1e-12)


def test_lune_rejects_other_cases():
    with pytest.raises(GeometryDomainError):
        lune_area(1, 1, 3)
    with pytest.raises(GeometryDomainError):
        lune_area(1, 3, 0.5)


def test_lune_against_sampling():
    rng = np.random.default_rng(1)
    n = 400_000
    pts = rng.uniform(-1, 1, (n, 2))
    in_c2 = (pts**2).sum(1) <= 1
    in_c1 = ((pts[:, 0] + 1) ** 2 + pts[:, 1] ** 2) <= 1
    est = 4 * np.mean(in_c2 & ~in_c1)
    assert est == pytest.approx(UNIT_LUNE, abs=4 * 4 * math.sqrt(0.5 * 0.5 / n))


@pytest.mark.parametrize("args, expected", [
    ((1, 0.5, 3), math.pi * 0.25),
    ((1, 3, 0), 8 * math.pi),
    ((1, 1, 1), UNIT_LUNE),
])
def test_region_area_examples(args, expected):
    assert region_area(*args) == pytest.approx(expected, abs=1e-12)
    assert CirclePair(*args).region_area() == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("args, expected", [
    ((1, 0.5, 3), math.pi),
    ((1, 1, 1), 4 * math.pi / 3),
    ((1, 3, 0.5), 6 * math.pi),
])
def test_region_area_deriv_examples(args, expected):
    assert region_area_deriv(*args) == pytest.approx(expected, rel=1e-12)


def test_deriv_matches_fd_unit():
    h = 1e-6
    fd = (region_area(1, 1 + h, 1) - region_area(1, 1 - h, 1)) / (2 * h)
    assert fd == pytest.approx(region_area_deriv(1, 1, 1), rel=1e-6)


def test_region_area_below_support():
    with pytest.raises(GeometryDomainError):
        region_area(3.0, 1.0, 1.0)


@pytest.mark.parametrize("args, expected", [
    ((1, 1, 1), math.pi / 3),
    ((2, 1, 1), 0.0),
    ((0.5, 1, 0.5), math.pi),
])
def test_chord_half_angle(args, expected):
    assert chord_half_angle(*args) == pytest.approx(expected, abs=1e-12)


def test_chord_half_angle_needs_displacement():
    with pytest.raises(GeometryDomainError):
        chord_half_angle(1.0, 1.0, 0.0)


pos = st.floats(0.01, 5.0)


@given(pos, pos, pos)
def test_lune_matches_reference(r1, r2, v):
    if not abs(r2 - r1) + 1e-3 < v < r1 + r2 - 1e-3:
        return
    assert lune_area(r1, r2, v) == pytest.approx(lune_reference(r1, r2, v), abs=1e-9 * (1 + r2 * r2))


@given(pos, pos)
def test_region_area_continuous_at_branches(r1, v):
    for edge in {abs(v - r1), v + r1}:
        if edge <= 0 or edge < r1 - v:
            continue
        lo = region_area(r1, edge * (1 - 1e-13), v) if edge * (1 - 1e-13) >= max(0, r1 - v) else None
        hi = region_area(r1, edge * (1 + 1e-13), v)
        at = region_area(r1, edge, v)
        assert abs(hi - at) < 1e-9 * max(1, edge * edge)
        if lo is not None:
            assert abs(lo - at) < 1e-9 * max(1, edge * edge)


@given(pos, pos, st.floats(0.0, 5.0))
def test_deriv_consistency(r1, v, extra):
    r2 = max(0.0, r1 - v) + extra
    branches = (abs(v - r1), v + r1)
    if r2 <= 1e-3 or any(abs(r2 - b) < 1e-3 for b in branches):
        return
    h = 1e-6 * max(1.0, r2)
    if r2 - h < max(0.0, r1 - v):
        return
    fd = (region_area(r1, r2 + h, v) - region_area(r1, r2 - h, v)) / (2 * h)
    assert fd == pytest.approx(region_area_deriv(r1, r2, v), rel=1e-5, abs=1e-7)


@given(pos, pos, st.floats(0.0, 5.0), st.floats(0.0, 1.0))
def test_area_bounds_and_monotone(r1, v, extra, step):
    r2 = max(0.0, r1 - v) + extra
    a = region_area(r1, r2, v)
    assert 0.0 <= a <= math.pi * r2 * r2 + 1e-12
    assert region_area(r1, r2 + step, v) >= a - 1e-12


@given(pos, pos, pos)
def test_intersection_symmetric(r1, r2, v):
    if not abs(r2 - r1) < v < r1 + r2:
        return
    inter_12 = math.pi * r2 * r2 - lune_area(r1, r2, v)
    inter_21 = math.pi * r1 * r1 - lune_area(r2, r1, v)
    assert inter_12 == pytest.approx(inter_21, abs=1e-10 * (1 + r1 * r1 + r2 * r2))


def test_static_case_exact():
    r2 = np.linspace(1.0, 4.0, 7)
    np.testing.assert_allclose(region_area(1.0, r2, 0.0), np.pi * (r2**2 - 1.0), rtol=0, atol=1e-14)
    np.testing.assert_allclose(region_area_deriv(1.0, r2, 0.0), 2 * np.pi * r2)
