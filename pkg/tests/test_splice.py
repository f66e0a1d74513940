import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from shiftapprox.errors import ArityError, InsufficientLevels, MissingModulus, OutOfRange
from shiftapprox.measures import Observable
from shiftapprox.splice import (
    SplicedPoint,
    SpliceSchedule,
    build_schedule,
    horizon,
    level_averages,
    modulus_sequence,
    predicted_bounds,
    splice,
)
from shiftapprox.symbolic import PeriodicPoint


def greedy_oracle(c, g):
    """Scan the candidates T_i + k*g_i in order; independent of the
    closed-form lower bound used by the builder."""
    T, C = [0], []
    for i in range(len(c)):
        t = T[i] + g[i]
        while not (
            t >= 2**i * T[i]
            and (i == 0 or (t - T[i]) // g[i] > C[-1])
            and (i + 1 == len(c) or t >= 2 ** (i + 1) * c[i + 1])
        ):
            t += g[i]
        C.append((t - T[i]) // g[i])
        T.append(t)
    return tuple(T)


def test_modulus_examples():
    assert modulus_sequence(Observable.indicator(2, (0, 1)), (1, 2, 4)) == ([2, 2, 4], [0, 0, 0])
    assert modulus_sequence(Observable.indicator(2, (0,)), (1, 1, 1)) == ([1, 2, 3], [0, 0, 0])
    g, Q = modulus_sequence(Observable.constant(3, 7), (5, 1))
    assert Q == [0, 0]


def test_modulus_callback():
    f = Observable.callback(2, 3, lambda xs: xs[0], bound=1, modulus=lambda g: Fraction(1, 2**g))
    assert modulus_sequence(f, (1, 4)) == ([3, 4], [Fraction(1, 8), Fraction(1, 16)])
    with pytest.raises(MissingModulus):
        modulus_sequence(Observable.callback(2, 1, lambda xs: 0, bound=0), (1,))


@pytest.mark.parametrize(
    "c, g, T, C",
    [((1, 2), (2, 4), (0, 4, 16), (2, 3)), ((1,), (1,), (0, 1), (1,)), ((1, 1), (1, 1), (0, 2, 5), (2, 3))],
)
def test_schedule_examples(c, g, T, C):
    s = build_schedule(c, g)
    assert s.T == T and s.C == C


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 4)), min_size=1, max_size=6))
def test_schedule_is_greedy_minimal_and_valid(levels):
    c = [a for a, _ in levels]
    g = [a * k for a, k in levels]
    s = build_schedule(c, g)
    assert s.violations() == []
    assert s.T == greedy_oracle(c, g)


def test_schedule_violations_reported():
    bad = SpliceSchedule((1, 4), (1, 4), (0, 3, 7))
    v = bad.violations()
    assert any("(iii)" in x for x in v) and any("(iv)" in x for x in v)
    with pytest.raises(OutOfRange):
        bad.verify()
    with pytest.raises(OutOfRange):
        build_schedule((2,), (3,))


def test_schedule_json():
    s = build_schedule((1, 2), (2, 4))
    assert s.to_json() == {"levels": 2, "c": [1, 2], "g": [2, 4], "T": [0, 4, 16], "C": [2, 3]}
    assert SpliceSchedule.from_json(json.loads(json.dumps(s.to_json()))) == s


def test_splice_examples():
    a = splice([PeriodicPoint(2, (0,))], SpliceSchedule((1,), (1,), (0, 5)))
    assert a.symbols(0, 5).tolist() == [0] * 5
    s = SpliceSchedule((1, 1), (1, 1), (0, 4, 16))
    b = splice([PeriodicPoint(2, (0,)), PeriodicPoint(2, (1,))], s)
    assert b.symbols(0, 16).tolist() == [0] * 4 + [1] * 12
    alt = splice([PeriodicPoint(2, (0, 1)), PeriodicPoint(2, (1,))], SpliceSchedule((2, 1), (2, 1), (0, 4, 16)))
    assert alt.symbols(0, 4).tolist() == [0, 1, 0, 1]


def test_splice_phase_reset_and_tail():
    pts = [PeriodicPoint(2, (0, 1)), PeriodicPoint(2, (1, 1, 0))]
    sched = build_schedule((2, 3), (2, 3))
    a = splice(pts, sched)
    T1 = sched.T[1]
    syms = a.symbols(0, sched.T[-1] + 7).tolist()
    assert syms == [a[i] for i in range(len(syms))]
    assert syms[T1 : T1 + 3] == [1, 1, 0]
    assert a.level_of(sched.T[-1] + 5) == 1
    assert SplicedPoint.from_json(json.loads(json.dumps(a.to_json()))) == a


def test_splice_arity():
    s = build_schedule((1, 1), (1, 2))
    with pytest.raises(ArityError):
        splice([PeriodicPoint(2, (0,))], s)
    with pytest.raises(ArityError):
        splice([PeriodicPoint(2, (0,)), PeriodicPoint(3, (0,))], s)
    with pytest.raises(ArityError):
        splice([PeriodicPoint(2, (0,)), PeriodicPoint(2, (0, 1))], s)


def test_bound_examples():
    b = predicted_bounds(1, (0, 0), (2, 3))
    assert b.b[2] == Fraction(11, 3)
    assert b.derived[2] == 1 + Fraction(4, 3)
    z = predicted_bounds(0, (Fraction(1, 5), Fraction(1, 7)), (2, 3))
    assert z.b == {1: Fraction(1, 5), 2: Fraction(1, 7)}
    big = predicted_bounds(1, [0] * 30, [10**9] * 30)
    assert abs(float(big.b[30]) - 3 / 2**28) < 1e-8


def _bounds(L, M=1, Q=0):
    return predicted_bounds(M, [Q] * L, [n + 2 for n in range(1, L + 1)])


def test_horizon_zero_observable():
    bounds = predicted_bounds(0, [0] * 5, [3, 4, 5, 6, 7])
    t_levels = [1, Fraction(1, 2), Fraction(1, 10), Fraction(1, 100), 0]
    h = horizon(Fraction(1, 10), 0, bounds, t_levels, 0)
    # first level with |t_n - t| < eps/2
    assert h.N4 == 4


def test_horizon_slack_tolerance():
    bounds = _bounds(8)
    h = horizon(100, 1, bounds, [Fraction(1, 2)] * 8, Fraction(1, 2))
    assert h.N4 == 1


def test_horizon_insufficient_levels():
    with pytest.raises(InsufficientLevels) as exc:
        horizon(Fraction(1, 2), 1, _bounds(6), [Fraction(1, 2)] * 6, Fraction(1, 2))
    assert exc.value.best_epsilon > 0.5


def test_horizon_is_monotone_in_epsilon():
    bounds = _bounds(40)
    t = [Fraction(1, 2)] * 40
    prev = 0
    for eps in (4, 2, 1, Fraction(1, 2), Fraction(1, 4)):
        n = horizon(eps, 1, bounds, t, Fraction(1, 2)).N4
        assert n >= prev
        prev = n


def test_level_averages():
    pts = [PeriodicPoint(2, (0, 1)), PeriodicPoint(2, (0, 0, 1))]
    assert level_averages(pts, Observable.indicator(2, (0,))) == [Fraction(1, 2), Fraction(2, 3)]
