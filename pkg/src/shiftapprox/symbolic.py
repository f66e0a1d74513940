"""Alphabets, words, cylinder cells, periodic points and word measures.

Points of ``[0,1]^N`` are handled symbolically: a coordinate is the index ``j``
of the cell ``[j/m, (j+1)/m)`` it lies in, and the real value attached to
index ``j`` is the cell midpoint ``(2j+1)/(2m)``.  A word is a plain tuple of
such indices.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import InvalidResolution, OutOfRange

Word = tuple  # tuple[int, ...] of symbol indices


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    return Fraction(x)


def frac_pair(x: Fraction) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


@dataclass(frozen=True)
class Alphabet:
    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise InvalidResolution(f"resolution must be a positive integer, got {self.m!r}")

    @property
    def symbols(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(2 * j + 1, 2 * self.m) for j in range(self.m))

    def __len__(self):
        return self.m


def make_alphabet(m: int) -> Alphabet:
    return Alphabet(m)


def classify(value, m: int) -> int:
    """Index of the cell of the resolution-``m`` partition containing ``value``.

    Cells are half-open ``[j/m, (j+1)/m)`` except the last, which is closed
    at 1.
    """
    if m < 1:
        raise InvalidResolution(f"resolution must be positive, got {m}")
    v = value if isinstance(value, Fraction) else Fraction(value)
    if v < 0 or v > 1:
        raise OutOfRange(f"value {value} outside [0, 1]")
    if v == 1:
        return m - 1
    return math.floor(v * m)


def classify_array(values, m: int) -> np.ndarray:
    """Vectorised :func:`classify` for float samples.

    Exact with respect to the binary value of each float: entries whose
    product with ``m`` lands within rounding distance of an integer are
    re-classified with rational arithmetic.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size and (np.nanmin(x) < 0 or np.nanmax(x) > 1 or np.isnan(x).any()):
        bad = x[(x < 0) | (x > 1) | np.isnan(x)][0]
        raise OutOfRange(f"sample {bad} outside [0, 1]")
    scaled = x * m
    idx = np.floor(scaled).astype(np.int64)
    near = np.abs(scaled - np.rint(scaled)) < 1e-9 * max(m, 1)
    for i in np.flatnonzero(near):
        idx[i] = classify(Fraction(float(x[i])), m)
    return np.minimum(idx, m - 1)


@dataclass(frozen=True)
class CylinderCell:
    """The cylinder of sequences whose first ``n`` coordinates lie in the
    cells named by ``index``."""

    index: tuple[int, ...]
    m: int

    def __post_init__(self):
        if not self.index:
            raise InvalidResolution("a cell needs at least one coordinate")
        if any(j < 0 or j >= self.m for j in self.index):
            raise OutOfRange(f"cell index {self.index} not below m={self.m}")

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def bounds(self) -> list[tuple[Fraction, Fraction, bool]]:
        """Per coordinate ``(low, high, high_is_closed)``."""
        return [
            (Fraction(j, self.m), Fraction(j + 1, self.m), j == self.m - 1)
            for j in self.index
        ]

    def contains(self, point: Sequence) -> bool:
        if len(point) < self.n:
            raise OutOfRange("point has fewer coordinates than the cell")
        for x, (lo, hi, closed) in zip(point, self.bounds):
            x = x if isinstance(x, Fraction) else Fraction(x)
            if x < lo or x > hi or (x == hi and not closed):
                return False
        return True


def cells(m: int, n: int) -> Iterator[CylinderCell]:
    for idx in all_words(m, n):
        yield CylinderCell(idx, m)


def all_words(m: int, n: int) -> Iterator[Word]:
    """All length-``n`` words over ``m`` symbols in lexicographic order."""
    return itertools.product(range(m), repeat=n)


def word_code(word: Sequence[int], m: int) -> int:
    code = 0
    for j in word:
        code = code * m + j
    return code


def word_from_code(code: int, m: int, n: int) -> Word:
    out = [0] * n
    for i in range(n - 1, -1, -1):
        code, out[i] = divmod(code, m)
    return tuple(out)


def word_to_json(word: Sequence[int], m: int) -> dict:
    return {"m": m, "indices": [int(j) for j in word]}


def _check_word(word: Sequence[int], m: int) -> Word:
    word = tuple(int(j) for j in word)
    if not word:
        raise OutOfRange("words have length at least 1")
    if any(j < 0 or j >= m for j in word):
        raise OutOfRange(f"word {word} has an index outside [0, {m})")
    return word


@dataclass(frozen=True)
class PeriodicPoint:
    """A periodic symbolic sequence given by one period."""

    m: int
    period: tuple[int, ...]

    def __post_init__(self):
        Alphabet(self.m)
        object.__setattr__(self, "period", _check_word(self.period, self.m))

    @property
    def c(self) -> int:
        return len(self.period)

    def __getitem__(self, i: int) -> int:
        return self.period[i % len(self.period)]

    def symbols(self, start: int, stop: int) -> np.ndarray:
        arr = np.asarray(self.period, dtype=np.int64)
        return arr[np.arange(start, stop) % len(arr)]

    def values(self, start: int, stop: int) -> np.ndarray:
        """Real coordinates (cell midpoints) at positions ``start..stop-1``."""
        return (2 * self.symbols(start, stop) + 1) / (2 * self.m)

    def to_json(self) -> dict:
        return word_to_json(self.period, self.m)

    @classmethod
    def from_json(cls, data: Mapping) -> "PeriodicPoint":
        return cls(int(data["m"]), tuple(data["indices"]))


def window(point, start: int, n: int) -> Word:
    """The length-``n`` word read from ``point`` starting at ``start``."""
    if n < 1:
        raise OutOfRange("window length must be positive")
    return tuple(int(s) for s in point.symbols(start, start + n))


@dataclass(frozen=True)
class WordMeasure:
    """A probability vector on length-``n`` words with exact rational weights.

    Only positive weights are stored; indexing a missing word returns 0.
    """

    m: int
    n: int
    weights: Mapping[Word, Fraction] = field(repr=False)

    def __post_init__(self):
        Alphabet(self.m)
        if self.n < 1:
            raise OutOfRange("word length must be positive")
        clean = {}
        for w, p in self.weights.items():
            w = _check_word(w, self.m)
            if len(w) != self.n:
                raise OutOfRange(f"word {w} does not have length {self.n}")
            p = as_fraction(p)
            if p < 0:
                raise OutOfRange(f"negative weight {p} on {w}")
            if p:
                clean[w] = clean.get(w, Fraction(0)) + p
        total = sum(clean.values(), Fraction(0))
        if total != 1:
            raise OutOfRange(f"total mass is {total}, expected 1")
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(clean.items()))))

    def __getitem__(self, word) -> Fraction:
        return self.weights.get(tuple(word), Fraction(0))

    @property
    def support(self) -> tuple[Word, ...]:
        return tuple(self.weights)

    def dense(self) -> list[Fraction]:
        return [self[w] for w in all_words(self.m, self.n)]

    def marginal(self, d: int) -> "WordMeasure":
        """Law of the first ``d`` coordinates."""
        if not 1 <= d <= self.n:
            raise OutOfRange(f"cannot marginalise length-{self.n} words to {d}")
        acc: dict[Word, Fraction] = {}
        for w, p in self.weights.items():
            acc[w[:d]] = acc.get(w[:d], Fraction(0)) + p
        return WordMeasure(self.m, d, acc)

    def distance(self, other: "WordMeasure") -> Fraction:
        """Sup-norm distance over words."""
        if (self.m, self.n) != (other.m, other.n):
            raise OutOfRange("measures live on different word spaces")
        words = set(self.weights) | set(other.weights)
        return max((abs(self[w] - other[w]) for w in words), default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "weights": [
                {"word": list(w), "num": p.numerator, "den": p.denominator}
                for w, p in self.weights.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "WordMeasure":
        weights = {
            tuple(e["word"]): Fraction(int(e["num"]), int(e["den"])) for e in data["weights"]
        }
        return cls(int(data["m"]), int(data["n"]), weights)

    @classmethod
    def uniform(cls, m: int, n: int) -> "WordMeasure":
        p = Fraction(1, m**n)
        return cls(m, n, {w: p for w in all_words(m, n)})

    @classmethod
    def from_counts(cls, m: int, n: int, counts: Mapping[Word, int]) -> "WordMeasure":
        total = sum(counts.values())
        return cls(m, n, {w: Fraction(c, total) for w, c in counts.items() if c})


def window_codes(symbols: np.ndarray, m: int, n: int) -> np.ndarray:
    """Codes of the sliding length-``n`` windows of a symbol array."""
    count = len(symbols) - n + 1
    codes = np.zeros(max(count, 0), dtype=np.int64)
    for i in range(n):
        codes = codes * m + symbols[i : i + count]
    return codes


def empirical_measure(point: PeriodicPoint, n: int) -> WordMeasure:
    """Frequencies of the ``c`` cyclic length-``n`` windows of one period."""
    if n < 1:
        raise OutOfRange("word length must be positive")
    c = point.c
    codes = window_codes(point.symbols(0, c + n - 1), point.m, n)
    counts = Counter(codes.tolist())
    return WordMeasure(
        point.m, n, {word_from_code(k, point.m, n): Fraction(v, c) for k, v in counts.items()}
    )


def count_vector(words: Iterable[Word]) -> Counter:
    return Counter(tuple(w) for w in words)
