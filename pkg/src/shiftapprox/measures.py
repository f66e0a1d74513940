"""Shift-invariant word measures, observables and their integrals, Markov
sources, and trajectory ingestion."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InsufficientDepth, InvalidBound, MissingModulus, OutOfRange, StationarityError
from .symbolic import (
    Alphabet,
    Word,
    WordMeasure,
    all_words,
    as_fraction,
    classify,
    classify_array,
    word_code,
    word_from_code,
    window_codes,
)


class BalanceReport(NamedTuple):
    balanced: bool
    imbalance: Fraction


def prefix_suffix_marginals(kappa: WordMeasure) -> tuple[dict, dict]:
    """Marginals of the first ``n-1`` and of the last ``n-1`` symbols."""
    pre: dict[Word, Fraction] = {}
    suf: dict[Word, Fraction] = {}
    for w, p in kappa.weights.items():
        pre[w[:-1]] = pre.get(w[:-1], Fraction(0)) + p
        suf[w[1:]] = suf.get(w[1:], Fraction(0)) + p
    return pre, suf


def check_shift_balance(kappa: WordMeasure) -> BalanceReport:
    """Whether the prefix and suffix ``(n-1)``-marginals of ``kappa`` agree.

    This is the finite trace of shift invariance. The report carries the
    largest absolute difference over all ``(n-1)``-words.
    """
    pre, suf = prefix_suffix_marginals(kappa)
    worst = Fraction(0)
    for w in set(pre) | set(suf):
        worst = max(worst, abs(pre.get(w, 0) - suf.get(w, 0)))
    return BalanceReport(worst == 0, worst)


@dataclass(frozen=True)
class MarkovSpec:
    """A stationary Markov chain on states ``0..s-1`` used as symbols of an
    ``m``-letter alphabet."""

    P: tuple
    pi: tuple
    m: int | None = None

    def __post_init__(self):
        P = tuple(tuple(as_fraction(x) for x in row) for row in self.P)
        pi = tuple(as_fraction(x) for x in self.pi)
        s = len(pi)
        m = s if self.m is None else int(self.m)
        Alphabet(m)
        if s > m:
            raise OutOfRange(f"{s} states do not fit an alphabet of size {m}")
        if len(P) != s or any(len(row) != s for row in P):
            raise OutOfRange("transition matrix must be square and match the stationary vector")
        for i, row in enumerate(P):
            if any(x < 0 for x in row) or sum(row) != 1:
                raise OutOfRange(f"row {i} of the transition matrix is not a probability vector")
        if any(x < 0 for x in pi) or sum(pi) != 1:
            raise OutOfRange("stationary vector is not a probability vector")
        for j in range(s):
            if sum(pi[i] * P[i][j] for i in range(s)) != pi[j]:
                raise StationarityError(f"stationary vector is not fixed by P at state {j}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "m", m)

    @property
    def states(self) -> int:
        return len(self.pi)

    def to_json(self) -> dict:
        pair = lambda x: [x.numerator, x.denominator]
        return {"P": [[pair(x) for x in row] for row in self.P], "pi": [pair(x) for x in self.pi]}

    @classmethod
    def from_json(cls, data: Mapping, m: int | None = None) -> "MarkovSpec":
        P = [[as_fraction(x) for x in row] for row in data["P"]]
        pi = [as_fraction(x) for x in data["pi"]]
        return cls(tuple(map(tuple, P)), tuple(pi), m if m is not None else data.get("m"))

    @classmethod
    def load(cls, path, m: int | None = None) -> "MarkovSpec":
        return cls.from_json(json.loads(Path(path).read_text()), m)


def markov_word_measure(spec: MarkovSpec, n: int) -> WordMeasure:
    """Law of ``n`` consecutive states of the stationary chain."""
    if n < 1:
        raise OutOfRange("word length must be positive")
    layer = {(i,): p for i, p in enumerate(spec.pi) if p}
    for _ in range(n - 1):
        nxt = {}
        for w, p in layer.items():
            for j, q in enumerate(spec.P[w[-1]]):
                if q:
                    nxt[w + (j,)] = p * q
        layer = nxt
    return WordMeasure(spec.m, n, layer)


@dataclass(frozen=True)
class Observable:
    """A bounded function of the first ``depth`` coordinates.

    Either ``table`` holds one value per cell of the depth-``depth``
    partition (indexed by word code), or ``func`` is a callback receiving the
    tuple of ``depth`` real coordinates. Callbacks must declare ``modulus``:
    a sequence or a function mapping the number ``g`` of agreeing leading
    coordinates to the oscillation bound ``Q``.
    """

    m: int
    depth: int
    bound: float | Fraction
    table: tuple | None = None
    func: Callable | None = field(default=None, compare=False)
    modulus: Callable[[int], float] | Sequence | None = field(default=None, compare=False)
    name: str = "f"

    def __post_init__(self):
        Alphabet(self.m)
        if self.depth < 1:
            raise OutOfRange("observable depth must be positive")
        if (self.table is None) == (self.func is None):
            raise ValueError("give exactly one of table or func")
        if self.table is not None:
            if len(self.table) != self.m**self.depth:
                raise OutOfRange(f"table needs {self.m ** self.depth} entries, got {len(self.table)}")
            if self.bound < max(abs(v) for v in self.table):
                raise InvalidBound(f"declared bound {self.bound} below max |f|")
        elif self.bound < 0:
            raise InvalidBound("bound must be nonnegative")

    # constructors

    @classmethod
    def cellwise(cls, m: int, depth: int, values, bound=None, name: str = "f") -> "Observable":
        if isinstance(values, Mapping):
            table = [0] * (m**depth)
            for w, v in values.items():
                table[word_code(w, m)] = v
        else:
            table = list(values)
        if bound is None:
            bound = max(abs(v) for v in table)
        return cls(m, depth, bound, table=tuple(table), name=name)

    @classmethod
    def indicator(cls, m: int, word: Sequence[int], name: str | None = None) -> "Observable":
        """Indicator of the cylinder cell named by ``word``."""
        word = tuple(word)
        table = [0] * (m ** len(word))
        table[word_code(word, m)] = 1
        return cls(m, len(word), 1, table=tuple(table), name=name or "1[" + "".join(map(str, word)) + "]")

    @classmethod
    def constant(cls, m: int, value, name: str = "const") -> "Observable":
        return cls(m, 1, abs(value), table=(value,) * m, name=name)

    @classmethod
    def callback(cls, m: int, depth: int, func: Callable, bound, modulus=None, name: str = "f") -> "Observable":
        return cls(m, depth, bound, func=func, modulus=modulus, name=name)

    # queries

    @property
    def is_cellwise(self) -> bool:
        return self.table is not None

    def evaluate(self, word: Sequence[int]):
        if self.table is not None:
            return self.table[word_code(word[: self.depth], self.m)]
        coords = tuple((2 * j + 1) / (2 * self.m) for j in word[: self.depth])
        return self.func(coords)

    def values(self) -> np.ndarray:
        """Float values on every depth-``depth`` word; symbolic points only
        visit cell midpoints, so this tabulates callbacks as well."""
        if self.table is not None:
            return np.array([float(v) for v in self.table])
        return np.array([float(self.evaluate(w)) for w in all_words(self.m, self.depth)])

    def oscillation(self, g: int) -> float | Fraction:
        """Sup of ``|f(b) - f(c)|`` over sequences agreeing on ``g`` leading
        coordinates."""
        if self.table is None:
            if self.modulus is None:
                raise MissingModulus(f"callback observable {self.name!r} declares no modulus")
            return self.modulus(g) if callable(self.modulus) else self.modulus[g]
        if g >= self.depth:
            return 0
        block = self.m ** (self.depth - g)
        return max(
            max(self.table[i : i + block]) - min(self.table[i : i + block])
            for i in range(0, len(self.table), block)
        )

    def extend(self, depth: int) -> "Observable":
        """The same function tabulated at a larger depth."""
        if depth < self.depth or self.table is None:
            raise InsufficientDepth("can only extend tabulated observables to larger depth")
        rep = self.m ** (depth - self.depth)
        return Observable(self.m, depth, self.bound, table=tuple(v for v in self.table for _ in range(rep)), name=self.name)


def combine(a, f: Observable, b, g: Observable) -> Observable:
    """The cellwise observable ``a*f + b*g``."""
    if not (f.is_cellwise and g.is_cellwise) or f.m != g.m:
        raise OutOfRange("linear combinations need cellwise observables on one alphabet")
    d = max(f.depth, g.depth)
    f, g = f.extend(d), g.extend(d)
    table = tuple(a * x + b * y for x, y in zip(f.table, g.table))
    return Observable(f.m, d, max(abs(v) for v in table), table=table, name=f"{a}*{f.name}+{b}*{g.name}")


def integral(f: Observable, kappa: WordMeasure):
    """Exact integral of a cellwise observable against a word measure."""
    if not f.is_cellwise:
        raise TypeError("integral needs a cellwise observable")
    if f.m != kappa.m:
        raise OutOfRange("observable and measure use different alphabets")
    if f.depth > kappa.n:
        raise InsufficientDepth(f"observable reads {f.depth} coordinates, measure has {kappa.n}")
    marg = kappa.marginal(f.depth)
    return sum((p * f.table[word_code(w, f.m)] for w, p in marg.weights.items()), Fraction(0))


def ingest_trajectory(samples, m: int, n: int) -> WordMeasure:
    """Word frequencies of the non-cyclic sliding windows of a trajectory.

    Real trajectories are not periodic, so the result is only balanced up to
    ``(n-1)/(len - n + 1)``.
    """
    if isinstance(samples, np.ndarray) and samples.dtype.kind == "f":
        symbols = classify_array(samples, m)
    else:
        samples = list(samples)
        if samples and all(isinstance(s, (float, np.floating)) for s in samples):
            symbols = classify_array(np.asarray(samples), m)
        else:
            symbols = np.array([classify(as_fraction(s), m) for s in samples], dtype=np.int64)
    length = len(symbols)
    if length < n:
        raise OutOfRange(f"trajectory of length {length} is shorter than the window {n}")
    codes, counts = np.unique(window_codes(symbols, m, n), return_counts=True)
    total = length - n + 1
    return WordMeasure(
        m, n, {word_from_code(int(k), m, n): Fraction(int(c), total) for k, c in zip(codes, counts)}
    )


def read_trajectory(path, column: str | int | None = None) -> list[Fraction]:
    """Samples from a text file, one per line, or from one CSV column.

    Values are parsed as exact decimals so cell boundaries are respected.
    """
    text = Path(path).read_text()
    if column is None:
        return [Fraction(line.strip()) for line in text.splitlines() if line.strip()]
    rows = list(csv.reader(text.splitlines()))
    if isinstance(column, int) or str(column).isdigit():
        col = int(column)
        body = rows
        if body and not _is_number(body[0][col]):
            body = body[1:]
    else:
        col = rows[0].index(column)
        body = rows[1:]
    return [Fraction(r[col].strip()) for r in body if r and r[col].strip()]


def _is_number(s: str) -> bool:
    try:
        Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        return False
    return True
