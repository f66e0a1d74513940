"""A finite cyclic system: positions ``0..k-1``, counting measure, rotation
``x -> x+1 mod k``, the orbit-coding map into symbolic sequences, and the
stopping-time covering used to compare sums of two functions ``G`` and ``F``.

Sums are exact when ``F`` and ``G`` are integer arrays and ``epsilon`` is
rational; float inputs fall back to float arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .errors import NoCover, OutOfRange
from .measures import Observable, integral
from .symbolic import Word, WordMeasure, as_fraction, window, window_codes


def rotate(x: int, k: int) -> int:
    if not 0 <= x < k:
        raise OutOfRange(f"position {x} outside [0, {k})")
    return x + 1 if x < k - 1 else 0


def rotate_inverse(x: int, k: int) -> int:
    if not 0 <= x < k:
        raise OutOfRange(f"position {x} outside [0, {k})")
    return x - 1 if x > 0 else k - 1


def preimage(A: Iterable[int], k: int) -> set[int]:
    """Positions mapped into ``A`` by one rotation."""
    return {rotate_inverse(a, k) for a in A}


def counting_measure(A: Iterable[int], k: int) -> Fraction:
    A = set(A)
    if any(not 0 <= a < k for a in A):
        raise OutOfRange("set is not contained in the cycle")
    return Fraction(len(A), k)


@dataclass(frozen=True)
class CyclicSystem:
    k: int
    g: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise OutOfRange("cycle length must be positive")
        if len(self.g) != self.k:
            raise OutOfRange("state function must have one value per position")

    def cycle_average(self, x: int):
        """``(1/k) * sum_i g(phi^i x)`` over one full turn from ``x``."""
        orbit = (x + np.arange(self.k)) % self.k
        return _mean(np.asarray(self.g)[orbit], self.k)


def _is_int_array(a) -> bool:
    return np.asarray(a).dtype.kind in "iu"


def _mean(values: np.ndarray, k: int):
    if _is_int_array(values):
        return Fraction(int(np.sum(values, dtype=np.int64)), k)
    return math.fsum(values) / k


def factor_map(alpha, x: int, depth: int) -> Word:
    """The first ``depth`` coordinates of ``sigma^x alpha``."""
    if x < 0:
        raise OutOfRange("position must be nonnegative")
    return window(alpha, x, depth)


def intertwining_failures(alpha, k: int, depth: int) -> list[int]:
    """Positions ``x < k`` where the code of ``phi x`` is not the shifted code
    of ``x`` (compared on the ``depth - 1`` coordinates both determine)."""
    if depth < 2:
        return []
    syms = alpha.symbols(0, k + depth - 1)
    codes = np.lib.stride_tricks.sliding_window_view(syms, depth)[:k]
    nxt = codes[(np.arange(k) + 1) % k]
    bad = np.any(nxt[:, : depth - 1] != codes[:, 1:], axis=1)
    return np.flatnonzero(bad).tolist()


class TransferReport(NamedTuple):
    orbit_average: float
    integral: object
    difference: float
    epsilon: float | None

    @property
    def passed(self) -> bool:
        return self.epsilon is None or self.difference < self.epsilon


def ergodic_transfer_check(alpha, f: Observable, kappa: WordMeasure, k: int, epsilon=None) -> TransferReport:
    """Compare the average of ``f`` over the orbit ``x < k`` of ``alpha``
    with the integral of ``f`` under ``kappa``."""
    syms = alpha.symbols(0, k + f.depth - 1)
    table = f.table if f.is_cellwise else tuple(f.values())
    codes = window_codes(syms, f.m, f.depth)
    if all(isinstance(v, (int, Fraction)) for v in table):
        counts = np.bincount(codes, minlength=len(table))
        lhs = sum((Fraction(int(c)) * v for c, v in zip(counts, table) if c), Fraction(0)) / k
    else:
        lhs = math.fsum(np.asarray(table, dtype=float)[codes]) / k
    rhs = integral(f, kappa)
    diff = abs(lhs - rhs)
    return TransferReport(float(lhs), rhs, float(diff), None if epsilon is None else float(epsilon))


@dataclass(frozen=True)
class CoveringDecomposition:
    """Stopping times ``T(x)``, their maximum ``r`` and the chained
    breakpoints ``T_0 = 0, T_j = T_{j-1} + T(T_{j-1})`` up to the first
    ``T_J`` in ``[k - r, k)``."""

    k: int
    epsilon: object
    T: np.ndarray
    r: int
    breaks: tuple[int, ...]

    @property
    def J(self) -> int:
        return len(self.breaks) - 1

    @property
    def T_J(self) -> int:
        return self.breaks[-1]

    def leftover_measure(self) -> Fraction:
        return Fraction(self.k - self.T_J, self.k)

    def violations(self) -> list[str]:
        out = []
        b, T, k, r = self.breaks, self.T, self.k, self.r
        if b[0] != 0:
            out.append("T_0 != 0")
        for j in range(1, len(b)):
            if b[j] - b[j - 1] != T[b[j - 1]]:
                out.append(f"step {j} is not T(T_{j - 1})")
        if not k - r <= b[-1] < k:
            out.append("T_J outside [k - r, k)")
        if any(k - r <= x < k for x in b[:-1]):
            out.append("J is not the first index in [k - r, k)")
        if sum(int(T[x]) for x in b[:-1]) != b[-1]:
            out.append("block lengths do not telescope to T_J")
        if self.leftover_measure() > Fraction(r, k):
            out.append("leftover interval exceeds r/k")
        return out


def _slack_series(F, G, epsilon):
    """``G - F - epsilon`` as exact integers (scaled) or floats."""
    if _is_int_array(F) and _is_int_array(G) and not isinstance(epsilon, float):
        eps = as_fraction(epsilon)
        return (np.asarray(G, dtype=np.int64) - np.asarray(F, dtype=np.int64)) * eps.denominator - eps.numerator
    return np.asarray(G, dtype=np.float64) - np.asarray(F, dtype=np.float64) - float(epsilon)


def stopping_times(F, G, epsilon, k: int) -> CoveringDecomposition:
    """Least ``n`` in ``[1, k)`` with
    ``sum_{i<n} G(phi^i x) <= sum_{i<n} F(phi^i x) + n * epsilon`` for every
    position ``x``, and the breakpoint chain built from it."""
    F, G = np.asarray(F), np.asarray(G)
    if len(F) != k or len(G) != k:
        raise OutOfRange("F and G need one value per position")
    D = _slack_series(F, G, epsilon)
    P = np.concatenate([[0], np.cumsum(np.concatenate([D, D]))])
    T = np.zeros(k, dtype=np.int64)
    todo = np.arange(k)
    for n in range(1, k):
        hit = P[todo + n] - P[todo] <= 0
        T[todo[hit]] = n
        todo = todo[~hit]
        if not len(todo):
            break
    if len(todo):
        raise NoCover(f"{len(todo)} positions have no stopping time below k={k}", todo.tolist())
    r = int(T.max())
    breaks = [0]
    while breaks[-1] < k - r:
        breaks.append(breaks[-1] + int(T[breaks[-1]]))
    assert breaks[-1] < k
    return CoveringDecomposition(k, epsilon, T, r, tuple(breaks))


class CoveringResult(NamedTuple):
    lhs: object  # (1/k) sum_{x < T_J} G
    middle: object  # (1/k) sum_{x < T_J} F + T_J * eps / k
    rhs: object  # (1/k) sum_{x < T_J} F + eps
    blocks_ok: bool

    @property
    def passed(self) -> bool:
        return self.blocks_ok and self.lhs <= self.middle < self.rhs


def covering_inequality(dec: CoveringDecomposition, F, G, k: int, epsilon) -> CoveringResult:
    """Sum the per-block inequalities over the covering and compare
    ``(1/k) sum G`` with ``(1/k) sum F + epsilon`` on ``[0, T_J)``."""
    exact = _is_int_array(F) and _is_int_array(G) and not isinstance(epsilon, float)
    dtype = np.int64 if exact else np.float64
    PF = np.concatenate([[0], np.cumsum(np.asarray(F, dtype=dtype))])
    PG = np.concatenate([[0], np.cumsum(np.asarray(G, dtype=dtype))])
    b = np.asarray(dec.breaks, dtype=np.int64)
    g_blocks, f_blocks, lengths = np.diff(PG[b]), np.diff(PF[b]), np.diff(b)
    TJ = dec.T_J
    if exact:
        eps = as_fraction(epsilon)
        # G_j <= F_j + len_j * eps, scaled by eps's denominator
        blocks_ok = bool(np.all(g_blocks * eps.denominator <= f_blocks * eps.denominator + lengths * eps.numerator))
        sum_G, sum_F = int(PG[TJ]), int(PF[TJ])
        blocks_ok &= int(g_blocks.sum()) == sum_G and int(f_blocks.sum()) == sum_F
        lhs = Fraction(sum_G, k)
        middle = (sum_F + TJ * eps) / k
        rhs = Fraction(sum_F, k) + eps
    else:
        eps = float(epsilon)
        blocks_ok = bool(np.all(g_blocks <= f_blocks + lengths * eps))
        sum_G, sum_F = float(PG[TJ]), float(PF[TJ])
        lhs, middle, rhs = sum_G / k, (sum_F + TJ * eps) / k, sum_F / k + eps
    return CoveringResult(lhs, middle, rhs, blocks_ok)


def demo_instance(k: int, rng: np.random.Generator, epsilon=Fraction(1, 2), max_tries: int = 100):
    """Integer-valued ``(F, G)`` on a cycle of length ``k`` for which every
    position has a stopping time: ``G`` mostly sits below ``F`` with short
    positive excursions."""
    for _ in range(max_tries):
        F = rng.integers(0, 11, size=k)
        up = rng.random(k) < 0.3
        D = np.where(up, rng.integers(1, 7, size=k), -rng.integers(0, 5, size=k))
        G = F + D
        try:
            stopping_times(F, G, epsilon, k)
        except NoCover:
            continue
        return F.astype(np.int64), G.astype(np.int64)
    raise NoCover("could not draw a covered instance")
