import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from d2dcache.coverage import (
    CoverageTolerances,
    MobilityQuery,
    coverage_file2_asymptotic,
    coverage_file2_subcase,
    coverage_file2_total,
    db_to_linear,
    evaluate_many,
    linear_to_db,
    sweep,
)
from d2dcache.distributions import NetworkParams, Subcase
from d2dcache.validation import asymptotic_oracle, static_coverage_direct

ASYMPTOTE = 0.5 / (0.5 + 0.5 * (math.pi / 4) * 1.5)


def test_asymptote_hand_value():
    assert ASYMPTOTE == pytest.approx(0.45911, abs=1e-5)


def test_query_validation():
    with pytest.raises(ValueError):
        MobilityQuery(v=-1.0, T=1.0)
    with pytest.raises(ValueError):
        MobilityQuery(v=1.0, T=0.0)
    with pytest.raises(ValueError):
        MobilityQuery(v=math.nan, T=1.0)


@given(st.floats(-40.0, 40.0))
def test_db_round_trip(t_db):
    assert linear_to_db(db_to_linear(t_db)) == pytest.approx(t_db, abs=1e-12)
    assert MobilityQuery.from_db(0.0, t_db).T == pytest.approx(10 ** (t_db / 10), rel=1e-15)


@pytest.mark.parametrize("p_a", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("v", [0.0, 1.5])
def test_q_zero_is_certain(p_a, v):
    params = NetworkParams(p_a=p_a, q=0.0)
    est = coverage_file2_total(params, MobilityQuery(v=v, T=3.0))
    assert est.value == pytest.approx(1.0, abs=1e-6)


def test_far_subcase_matches_closed_form(ref_params):
    lam2, lam1 = ref_params.intensities(Subcase.Y)
    res = coverage_file2_subcase(ref_params, MobilityQuery(v=1e3, T=1.0), lam2, lam1)
    assert res.value == pytest.approx(ASYMPTOTE, abs=1e-3)


def test_static_matches_independent_route(ref_params):
    est = coverage_file2_total(ref_params, MobilityQuery(v=0.0, T=1.0))
    assert est.ok
    assert est.value == pytest.approx(static_coverage_direct(ref_params, 1.0), abs=1e-6)


def test_degenerate_population():
    est = coverage_file2_total(NetworkParams(p_a=1.0), MobilityQuery(v=1.0, T=1.0))
    assert est.value == 0.0 and est.degenerate
    est = coverage_file2_total(NetworkParams(p_a=0.0), MobilityQuery(v=1.0, T=1.0))
    assert est.value == 0.0 and est.degenerate


def test_subcase_symmetry(ref_params):
    est = coverage_file2_total(ref_params, MobilityQuery(v=0.7, T=1.0))
    parts = est.extra["subcases"]
    assert parts["X"] == pytest.approx(parts["Y"], abs=1e-9)
    assert est.value == pytest.approx(0.5 * (parts["X"] + parts["Y"]), abs=1e-12)


def test_infinite_v_needs_asymptotic(ref_params):
    with pytest.raises(ValueError):
        coverage_file2_total(ref_params, MobilityQuery(v=math.inf, T=1.0))


def test_v_sweep_example(ref_params):
    est = sweep(ref_params, "v", [0.0, 0.5, 1.0, 2.0, 5.0], 1.0)
    vals = [e.value for e in est]
    errs = [e.error for e in est]
    assert all(b >= a - 2 * (ea + eb) for a, b, ea, eb in zip(vals, vals[1:], errs, errs[1:]))
    assert vals[-1] == pytest.approx(ASYMPTOTE, abs=0.02)
    assert [e.query.v for e in est] == [0.0, 0.5, 1.0, 2.0, 5.0]


def test_t_sweep_example(ref_params):
    vals = [e.value for e in sweep(ref_params, "T", [0.1, 1.0, 10.0], 0.0)]
    assert vals[0] > vals[1] > vals[2]


def test_single_point_sweep(ref_params):
    assert len(sweep(ref_params, "v", [1.0], 1.0)) == 1


def test_sweep_rejects_bad_axis(ref_params):
    with pytest.raises(ValueError):
        sweep(ref_params, "q", [1.0], 1.0)
    with pytest.raises(ValueError):
        sweep(ref_params, "v", [], 1.0)


def test_far_total_matches_asymptote(ref_params):
    far = coverage_file2_total(ref_params, MobilityQuery(v=1e3, T=1.0)).value
    assert far == pytest.approx(coverage_file2_asymptotic(ref_params, 1.0), abs=1e-2)


def test_asymptotic_examples(ref_params):
    assert coverage_file2_asymptotic(ref_params, 1.0) == pytest.approx(ASYMPTOTE, abs=1e-9)
    assert coverage_file2_asymptotic(NetworkParams(q=0.0, p_a=0.3), 5.0) == pytest.approx(1.0)
    assert coverage_file2_asymptotic(ref_params, 1e-12) == pytest.approx(1.0, abs=1e-5)


@given(st.floats(0.05, 0.95), st.floats(0.0, 1.0), st.floats(1e-2, 1e2))
def test_asymptotic_matches_oracle(p_a, q, T):
    params = NetworkParams(p_a=p_a, q=q)
    assert coverage_file2_asymptotic(params, T) == pytest.approx(asymptotic_oracle(params, T), abs=1e-9)


@settings(max_examples=6)
@given(st.floats(0.1, 0.9), st.floats(0.1, 1.0), st.floats(2.5, 5.0), st.floats(0.0, 3.0),
       st.floats(-10.0, 10.0))
def test_total_in_unit_interval(p_a, q, alpha, v, t_db):
    params = NetworkParams(p_a=p_a, q=q, alpha=alpha)
    est = coverage_file2_total(params, MobilityQuery.from_db(v, t_db))
    assert est.ok
    assert 0.0 <= est.value <= 1.0 and est.error >= 0.0


def test_tolerance_scaling_is_stable(ref_params):
    qy = MobilityQuery(v=1.0, T=1.0)
    base = coverage_file2_total(ref_params, qy).value
    tight = coverage_file2_total(ref_params, qy, CoverageTolerances().scaled(0.01)).value
    assert tight == pytest.approx(base, abs=1e-6)


def test_evaluate_many_records_failures(ref_params):
    qy = MobilityQuery(v=1.0, T=1.0)
    out = evaluate_many([(ref_params, qy, "asymptotic", None, None), (ref_params, qy, "bogus", None, None)])
    assert out[0].ok
    assert not out[1].ok and "bogus" in out[1].failure
    assert math.isnan(out[1].value)
