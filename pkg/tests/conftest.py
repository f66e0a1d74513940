from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from shiftapprox import MarkovSpec, PeriodicPoint, WordMeasure, empirical_measure, markov_word_measure

MARKOV = WordMeasure(2, 2, {(0, 0): Fraction(1, 2), (0, 1): Fraction(1, 4), (1, 0): Fraction(1, 4)})


@pytest.fixture
def markov_kappa() -> WordMeasure:
    return MARKOV


def two_state_chain(a: Fraction, b: Fraction) -> MarkovSpec:
    """``P = [[1-a, a], [b, 1-b]]`` has stationary vector ``(b, a) / (a + b)``."""
    return MarkovSpec(((1 - a, a), (b, 1 - b)), (b / (a + b), a / (a + b)))


def random_balanced_measure(rnd: random.Random, m: int = 2, n: int = 2, parts: int = 3) -> WordMeasure:
    """Mixture of empirical measures of random periodic points.

    Every point starts with ``n - 1`` zeros, so all supports meet at the
    all-zero vertex and the mixture has connected support. Mixture weights
    lie in [1/2, 1] with large denominators, so each positive word keeps
    mass at least ``1 / (2 * parts * (n + 6))``.
    """
    acc: dict = {}
    raw = [Fraction(1, 2) + Fraction(rnd.randint(0, 10**6), 2 * 10**6 + rnd.randint(1, 10**5)) for _ in range(parts)]
    total = sum(raw)
    for w in raw:
        body = tuple(rnd.randrange(m) for _ in range(rnd.randint(1, 7)))
        pt = PeriodicPoint(m, (0,) * (n - 1) + body)
        for word, p in empirical_measure(pt, n).weights.items():
            acc[word] = acc.get(word, Fraction(0)) + p * w / total
    return WordMeasure(m, n, acc)


@st.composite
def fractions_in(draw, lo: int = 1, hi: int = 9, den: int = 10):
    return Fraction(draw(st.integers(lo, hi)), den)


@st.composite
def chains(draw):
    a = Fraction(draw(st.integers(1, 20)), draw(st.integers(20, 40)))
    b = Fraction(draw(st.integers(1, 20)), draw(st.integers(20, 40)))
    return two_state_chain(a, b)


@st.composite
def periodic_points(draw, m: int | None = None, max_len: int = 12):
    m = m if m is not None else draw(st.integers(1, 4))
    period = draw(st.lists(st.integers(0, m - 1), min_size=1, max_size=max_len))
    return PeriodicPoint(m, tuple(period))


@st.composite
def balanced_measures(draw, m: int = 2, n: int = 2):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_balanced_measure(random.Random(seed), m, n, draw(st.integers(1, 4)))


def markov_measure(n: int = 2) -> WordMeasure:
    spec = MarkovSpec(((Fraction(2, 3), Fraction(1, 3)), (Fraction(1), Fraction(0))), (Fraction(3, 4), Fraction(1, 4)))
    return markov_word_measure(spec, n)
