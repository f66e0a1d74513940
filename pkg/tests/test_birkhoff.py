import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftapprox.approx import approximate
from shiftapprox.birkhoff import (
    CSV_HEADER,
    average,
    level_bound_checks,
    level_csv,
    log_grid,
    prefix_sums,
    reports_csv,
    running_averages,
    segment_average,
    series,
    typicality_report,
    weighted_average_identity,
)
from shiftapprox.errors import EmptySegment
from shiftapprox.measures import Observable, integral
from shiftapprox.splice import build_schedule, modulus_sequence, splice
from shiftapprox.symbolic import PeriodicPoint, WordMeasure, empirical_measure, window

from conftest import periodic_points

IND0 = Observable.indicator(2, (0,))


def naive_averages(point, f, n):
    vals = [float(f.evaluate(window(point, i, f.depth))) for i in range(n)]
    return [math.fsum(vals[: v]) / v for v in range(1, n + 1)]


@pytest.fixture(scope="module")
def small_splice():
    kappa = WordMeasure.uniform(2, 2)
    pts = [approximate(kappa, N=4 * 4**l).cyclic for l in range(4)]
    c = [p.c for p in pts]
    g, _ = modulus_sequence(IND0, c)
    return splice(pts, build_schedule(c, g))


def test_average_examples(markov_kappa):
    assert average(PeriodicPoint(2, (0, 1, 1)), Observable.constant(2, 3), 17) == 3
    assert average(PeriodicPoint(2, (0, 1)), IND0, 10) == 0.5
    beta = PeriodicPoint(2, (0, 0, 0, 1, 0))
    assert average(beta, Observable.indicator(2, (0, 0)), 5) == pytest.approx(3 / 5, abs=0)
    with pytest.raises(EmptySegment):
        average(beta, IND0, 0)


def test_segment_average_examples():
    p = PeriodicPoint(2, (0, 1, 1, 0, 1))
    assert segment_average(p, IND0, 0, 9) == average(p, IND0, 9)
    assert segment_average(p, Observable.constant(2, -2), 3, 9) == -2
    with pytest.raises(EmptySegment):
        segment_average(p, IND0, 4, 4)


@settings(max_examples=40, deadline=None)
@given(periodic_points(m=3, max_len=9), st.lists(st.integers(-4, 4), min_size=9, max_size=9), st.integers(1, 80))
def test_running_averages_match_naive(p, table, n):
    f = Observable.cellwise(3, 2, table, bound=4)
    assert np.allclose(running_averages(p, f, n), naive_averages(p, f, n), rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(periodic_points(m=3, max_len=9), st.lists(st.integers(0, 4), min_size=3, max_size=3), st.integers(1, 6))
def test_period_multiples_are_exact(p, table, j):
    f = Observable.cellwise(3, 1, table)
    A = running_averages(p, f, j * p.c)
    exact = integral(f, empirical_measure(p, 1))
    assert A[j * p.c - 1] == pytest.approx(float(exact), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(periodic_points(m=2, max_len=9), st.data())
def test_weighted_average_identity(p, data):
    n = data.draw(st.integers(2, 300))
    m = data.draw(st.integers(1, n - 1))
    f = Observable.cellwise(2, 2, [0.3, -1.2, 2.5, 0.1], bound=2.5)
    A = running_averages(p, f, n)
    rebuilt = weighted_average_identity(A[m - 1], m, segment_average(p, f, m, n), n)
    assert rebuilt == pytest.approx(A[n - 1], rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(periodic_points(m=2, max_len=9), st.integers(1, 100))
def test_shifted_average_recursion(p, m):
    shifted = PeriodicPoint(p.m, p.period[1:] + p.period[:1])
    B = running_averages(shifted, IND0, m)[m - 1]
    A = running_averages(p, IND0, m + 1)[m]
    assert (m * B + IND0.evaluate(window(p, 0, 1))) / (m + 1) == pytest.approx(A, rel=1e-12)


def test_prefix_sums_compensated():
    rng = np.random.default_rng(1)
    x = rng.random(50_000) * 1e-3 + 1e6
    ps = prefix_sums(x)
    for k in (1, 4096, 4097, 12_345, 50_000):
        assert ps[k - 1] == pytest.approx(math.fsum(x[:k]), rel=1e-15)


def test_series_tiles_periodic_points():
    p = PeriodicPoint(2, (0, 1, 1))
    assert series(p, IND0, 10).tolist() == [1, 0, 0] * 3 + [1]
    assert series(p, IND0, 4, start=2).tolist() == [0, 1, 0, 0]


def test_log_grid():
    g = log_grid(100, extra=[37, 500])
    assert g[0] == 1 and g[-1] == 100 and 37 in g and 500 not in g
    assert g == sorted(set(g))


def test_typicality_examples():
    beta = approximate(WordMeasure.uniform(2, 2), N=16).cyclic
    [rep] = typicality_report(beta, [IND0], [Fraction(1, 2)], Fraction(1, 100), beta.c)
    assert rep.passed and rep.max_error == 0 and rep.basis == "period"
    [rep] = typicality_report(PeriodicPoint(2, (0,)), [IND0], [Fraction(1, 2)], Fraction(1, 100), 50)
    assert rep.status == "fail" and rep.max_error == 0.5


def test_typicality_rows_sorted_and_consistent():
    beta = PeriodicPoint(2, (0, 1, 1))
    [rep] = typicality_report(beta, [IND0], [Fraction(1, 3)], 0.05, 300)
    ns = [r[0] for r in rep.rows]
    assert ns == sorted(ns)
    assert all(ok == (err < 0.05) for _, _, err, _, ok in rep.rows)
    text = reports_csv([rep])
    assert text.splitlines()[0].split(",") == CSV_HEADER
    assert len(text.splitlines()) == len(rep.rows) + 1


def test_typicality_inconclusive_when_horizon_short(small_splice):
    [rep] = typicality_report(small_splice, [IND0], [Fraction(1, 2)], 0.01, small_splice.schedule.T[1] - 1)
    assert rep.status == "inconclusive"
    [rep] = typicality_report(PeriodicPoint(2, (0, 1)), [IND0], [Fraction(1, 2)], 0.01, 100, start=200)
    assert rep.status == "inconclusive"


def test_typicality_scan_agrees_with_direct_scan(small_splice):
    eps = 0.05
    T = small_splice.schedule.T
    [rep] = typicality_report(small_splice, [IND0], [Fraction(1, 2)], eps, T[-1])
    A = np.array(naive_averages(small_splice, IND0, T[-1]))
    err = np.abs(A - 0.5)
    if rep.passed:
        assert rep.basis in ("scan", "certified")
        assert np.all(err[rep.start - 1 :] < eps)
        if rep.basis == "scan" and rep.level > 1:
            assert not np.all(err[T[rep.level - 1] - 1 :] < eps)
    else:
        assert not any(np.all(err[T[l] - 1 :] < eps) for l in range(1, len(T) - 1))


def test_certified_horizon_with_loose_epsilon(small_splice):
    T = small_splice.schedule.T
    [rep] = typicality_report(small_splice, [IND0], [Fraction(1, 2)], 8, T[-1])
    assert rep.basis == "certified" and rep.passed


def test_level_bounds_and_exact_segments(small_splice):
    checks = level_bound_checks(small_splice, IND0)
    assert [c.checked for c in checks] == [False, False, True, True]
    assert all(c.passed for c in checks if c.checked)
    sched = small_splice.schedule
    for n, pt in enumerate(small_splice.points):
        k = (sched.T[n + 1] - sched.T[n]) // pt.c
        seg = segment_average(small_splice, IND0, sched.T[n], sched.T[n] + k * pt.c)
        assert seg == float(integral(IND0, empirical_measure(pt, 1)))
    rows = level_csv(checks).splitlines()
    assert rows[0] == "level,T_n,A_Tn,t_n,abs_err,b_n,pass"
    assert rows[1].endswith("unchecked") and rows[3].endswith(",1")
