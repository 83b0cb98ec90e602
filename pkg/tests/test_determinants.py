import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import determinant_coefficients_ref, toral_count_ref, toral_fixed_points_bruteforce
from transferlab import ConfigError
from transferlab.determinants import (DeterminantSeries, R_pqt, bound_estimate, compare_zeros_eigenvalues,
                                      determinant_coefficients, determinant_series, determinant_zeros,
                                      periodic_points, rho_pq_limit, rho_pq_sequence, rho_pqm, trace_sum)
from transferlab.dynamics import (CAT_LAMBDA, CAT_MATRIX, ExpandingCircleMap, LinearToralMap,
                                  PerturbedToralMap, Weight)
from transferlab.transfer_op import resonances

DOUBLING = ExpandingCircleMap(2)
CAT = LinearToralMap()
HALF, ONE, ZERO = Weight.constant(0.5), Weight.constant(1.0), Weight.constant(0.0)


# periodic points -----------------------------------------------------------------------

def test_doubling_period_two():  # [DERIVED] j / (2^m - 1)
    data = periodic_points(DOUBLING, 2)
    assert sorted(data.points) == pytest.approx([0.0, 1 / 3, 2 / 3], abs=1e-14)
    assert np.allclose(data.jacobians, 4.0)


@pytest.mark.parametrize("m, count", [(1, 1), (2, 5)])
def test_cat_counts_examples(m, count):  # [DERIVED] |det(A^m - I)|
    assert periodic_points(CAT, m).count == count


@pytest.mark.parametrize("m", range(1, 11))
def test_cat_count_identity(m):  # [DERIVED] sympy integer determinant
    assert periodic_points(CAT, m).count == toral_count_ref(CAT_MATRIX, m)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_cat_points_bruteforce(m):  # [DERIVED] lattice scan oracle
    data = periodic_points(CAT, m)
    ref = toral_fixed_points_bruteforce(CAT_MATRIX, m)
    got = {(Fraction(int(a), data.denominator) % 1, Fraction(int(b), data.denominator) % 1)
           for a, b in data.numerators}
    assert got == {(Fraction(int(x.p), int(x.q)), Fraction(int(y.p), int(y.q))) for x, y in ref}


@given(st.integers(2, 3), st.floats(-0.04, 0.04), st.integers(1, 6))
@settings(max_examples=15)
def test_expanding_counts_and_residuals(k, eps, m):
    T = ExpandingCircleMap(k, eps)
    data = periodic_points(T, m)
    assert data.count == k**m - 1
    r = np.mod(T.iterate(data.points, m) - data.points + 0.5, 1.0) - 0.5
    assert np.max(np.abs(r)) < 1e-10


def test_perturbed_toral_orbits():
    P = PerturbedToralMap(delta=0.01)
    for m in (1, 2, 3):
        data = periodic_points(P, m)
        assert data.count == toral_count_ref(CAT_MATRIX, m)
        r = np.mod(P.iterate(data.points, m) - data.points + 0.5, 1.0) - 0.5
        assert np.max(np.abs(r)) < 1e-10


def test_period_limits():
    with pytest.raises(ConfigError):
        periodic_points(CAT, 15)
    with pytest.raises(ConfigError):
        periodic_points(DOUBLING, 0)


# traces ------------------------------------------------------------------------------

@pytest.mark.parametrize("m", range(1, 15))
def test_doubling_half_traces(m):  # [DERIVED] (2^m - 1) 2^-m / (1 - 2^-m) = 1
    assert trace_sum(DOUBLING, HALF, m) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("m", range(1, 13))
def test_doubling_unit_traces(m):  # [DERIVED] (2^m - 1) / (1 - 2^-m) = 2^m
    assert trace_sum(DOUBLING, ONE, m) == pytest.approx(2.0**m, rel=1e-12)


@pytest.mark.parametrize("m", range(1, 13))
def test_cat_traces_exact(m):  # [DERIVED] count / |det(I - A^m)| with equal integers
    t = trace_sum(CAT, ONE, m)
    assert isinstance(t, Fraction) and t == 1


def test_inverse_jacobian_trace_is_one():
    # with g = 1/|T'| the expanding flat trace is sum 1/((T^m)' - 1) = 1 for the doubling map
    for m in range(1, 8):
        assert trace_sum(DOUBLING, Weight("inverse-jacobian"), m) == pytest.approx(1.0, rel=1e-12)


# determinant series ------------------------------------------------------------------

def test_coefficient_examples():
    assert determinant_coefficients([1] * 8) == [1, -1] + [0] * 7  # [DERIVED] d(z) = 1 - z
    assert determinant_coefficients([2**m for m in range(1, 9)]) == [1, -2] + [0] * 7  # [DERIVED]
    assert determinant_coefficients([0] * 5) == [1] + [0] * 5  # [TRIVIAL]


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=7))
def test_coefficients_match_sympy(traces):  # [DERIVED] sympy series of exp(-sum t z^m / m)
    assert determinant_coefficients(traces) == determinant_coefficients_ref(traces)


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=10))
def test_recursion_and_log_roundtrip(traces):
    a = determinant_coefficients(traces)
    assert a[0] == 1.0
    for m in range(1, len(a)):
        rhs = -sum(traces[j - 1] * a[m - j] for j in range(1, m + 1))
        assert m * a[m] == pytest.approx(rhs, rel=1e-12, abs=1e-9)
    series = DeterminantSeries.from_traces(traces)
    back = series.log_traces(len(traces) // 2)
    assert np.allclose(back, traces[: len(traces) // 2], atol=1e-9)


def test_zero_examples():
    z, _ = determinant_zeros(DeterminantSeries.from_coefficients([1, -2]))
    assert z == [(pytest.approx(0.5), 1)]  # [TRIVIAL]
    z, _ = determinant_zeros(DeterminantSeries.from_coefficients([1, -1.5, 0.5]))
    assert [round(v.real, 12) for v, _ in z] == [1.0, 2.0]  # [DERIVED] (1 - z)(1 - z/2)
    z, diag = determinant_zeros(DeterminantSeries.from_coefficients([1, 0, 0, 0]))
    assert z == [] and "constant" in diag  # [TRIVIAL]


def test_double_zero_order():
    # (1 - z)^2 (1 + z / 3): order 2 at z = 1
    poly = np.convolve(np.convolve([1, -1], [1, -1]), [1, 1 / 3])
    z, _ = determinant_zeros(DeterminantSeries.from_coefficients(list(poly)), cluster_tol=1e-6)
    assert [(round(v.real, 6), o) for v, o in z] == [(1.0, 2), (-3.0, 1)]


def test_closed_form_series():
    s = determinant_series(DOUBLING, HALF, 14)
    assert s.coefficients[1] == pytest.approx(-1.0, abs=1e-12)
    assert max(abs(complex(a)) for a in s.coefficients[2:]) < 1e-12
    zeros, _ = determinant_zeros(s)
    assert len(zeros) == 1 and zeros[0][0] == pytest.approx(1.0, abs=1e-10) and zeros[0][1] == 1
    exact = determinant_series(CAT, ONE, 12)
    assert exact.coefficients[:2] == [1, -1] and all(a == 0 for a in exact.coefficients[2:])
    assert math.isinf(exact.reliability_radius)


# bounds ---------------------------------------------------------------------------------

def test_rho_examples():
    assert rho_pqm(CAT, ONE, 1, -1, 1, n_quad=16)[0] == pytest.approx(1 / CAT_LAMBDA, rel=1e-12)
    assert rho_pqm(CAT, ONE, 1, -1, 8, n_quad=16)[0] == pytest.approx(CAT_LAMBDA**-8, rel=1e-12)
    assert rho_pqm(CAT, ZERO, 1, -1, 3, n_quad=16)[0] == 0.0  # [TRIVIAL]
    v, se = rho_pqm(CAT, ONE, 1, -1, 2, n_quad=32, method="montecarlo", seed=1)
    assert v == pytest.approx(CAT_LAMBDA**-2, rel=1e-12) and se == pytest.approx(0.0, abs=1e-15)


def test_rho_limit_examples():
    assert rho_pq_limit([0.3] * 5, [1, 1, 1, 1, 1]) == (pytest.approx(0.3), 0.0)  # [TRIVIAL]
    ms = [2, 4, 6, 8]
    seq = rho_pq_sequence(CAT, ONE, 1, -1, ms, n_quad=16)
    rho, diag = rho_pq_limit(seq, ms)
    assert rho == pytest.approx(1 / CAT_LAMBDA, rel=1e-12) and diag < 1e-12
    with pytest.raises(ConfigError):
        rho_pq_limit([1, 2, 3])


def test_perturbed_cauchy_diagnostic():  # measured property
    P = PerturbedToralMap(delta=0.01)
    ms = list(range(1, 9))
    seq = rho_pq_sequence(P, ONE, 1, -1, ms, n_quad=64)
    _, diag = rho_pq_limit(seq, ms)
    assert diag < 1e-2


@pytest.mark.parametrize("t", [2.0, math.inf])
def test_R_examples(t):
    assert R_pqt(CAT, ONE, 1, -1, t, n_quad=16)[0] == pytest.approx(1 / CAT_LAMBDA, rel=1e-12)
    assert R_pqt(CAT, ZERO, 1, -1, t, n_quad=16)[0] == 0.0


def test_monotonicity():
    for model, g in [(CAT, ONE), (PerturbedToralMap(delta=0.01), ONE),
                     (PerturbedToralMap(delta=0.01), Weight("trig", value=1.0, terms=[{"k": [1, 0], "a": 0.2}]))]:
        est = bound_estimate(model, g, 1.0, -1.0, range(1, 7), n_quad=48)
        assert all(est.rho <= r + 1e-6 for r in est.R.values())
        assert all(np.isfinite(v) and v > 0 for v in est.rho_roots)


# matching ---------------------------------------------------------------------------------

def test_matching_examples():
    s = determinant_series(DOUBLING, HALF, 14)
    zeros, _ = determinant_zeros(s)
    rep = resonances(DOUBLING, HALF, 32, 2.0)
    table = compare_zeros_eigenvalues(rep, zeros, s.reliability_radius)
    assert table.perfect and table.max_distance < 1e-8 and len(table.pairs) == 1
    s = determinant_series(CAT, ONE, 12)
    zeros, _ = determinant_zeros(s)
    rep = resonances(CAT, ONE, 6, 1.0, -1.0)
    table = compare_zeros_eigenvalues(rep, zeros, 1 / rep.filter)
    assert table.perfect and len(table.pairs) == 1
    empty = compare_zeros_eigenvalues([], determinant_zeros(DeterminantSeries.from_traces([0.0] * 4))[0], 2.0)
    assert empty.perfect and empty.pairs == []  # [TRIVIAL]


def test_matching_reports_unmatched():
    table = compare_zeros_eigenvalues([1.0, 0.5 + 0j], [(1.0, 1)], 3.0)
    assert table.unmatched_resonances == [0.5] and not table.perfect
