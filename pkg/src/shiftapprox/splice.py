"""Splicing periodic points into one sequence whose Birkhoff averages converge.

Level ``i`` occupies positions ``[T_i, T_{i+1})`` with the point ``alpha_i``
restarted at phase 0. The schedule ``T`` obeys four growth conditions:

    (i)   T_{i+1} >= 2**i * T_i
    (ii)  g_i divides T_{i+1} - T_i
    (iii) C_i = (T_{i+1} - T_i) / g_i is strictly increasing
    (iv)  T_i >= 2**i * c_i for i >= 1

where ``c_i`` is the period of ``alpha_i`` and ``g_i`` a multiple of it long
enough for the observable to see only one level at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ArityError, InsufficientLevels, OutOfRange
from .measures import Observable, integral
from .symbolic import PeriodicPoint, empirical_measure


def modulus_sequence(f: Observable, periods: Sequence[int]) -> tuple[list[int], list]:
    """Moduli ``g_n`` (multiples of ``c_n``, at least ``max(depth, n + 1)``)
    and the oscillations ``Q_n`` of ``f`` over ``g_n`` agreeing coordinates."""
    g = []
    for n, c in enumerate(periods):
        if c < 1:
            raise OutOfRange("periods must be positive")
        g.append(c * -(-max(f.depth, n + 1) // c))
    Q = [f.oscillation(gn) for gn in g]
    return g, Q


@dataclass(frozen=True)
class SpliceSchedule:
    c: tuple[int, ...]
    g: tuple[int, ...]
    T: tuple[int, ...]

    @property
    def levels(self) -> int:
        return len(self.c)

    @property
    def C(self) -> tuple[int, ...]:
        return tuple((self.T[i + 1] - self.T[i]) // self.g[i] for i in range(self.levels))

    def violations(self) -> list[str]:
        """Every failed growth condition, empty when the schedule is valid."""
        out = []
        L, T, c, g = self.levels, self.T, self.c, self.g
        if len(T) != L + 1 or len(g) != L:
            return ["schedule arrays have inconsistent lengths"]
        if T[0] != 0:
            out.append("T_0 != 0")
        for i in range(L):
            if g[i] % c[i]:
                out.append(f"c_{i}={c[i]} does not divide g_{i}={g[i]}")
            if T[i + 1] <= T[i]:
                out.append(f"T_{i + 1} <= T_{i}")
            if T[i + 1] < 2**i * T[i]:
                out.append(f"(i) fails at {i}")
            if (T[i + 1] - T[i]) % g[i]:
                out.append(f"(ii) fails at {i}")
            if i >= 1 and not self.C[i] > self.C[i - 1]:
                out.append(f"(iii) fails at {i}")
            if i >= 1 and T[i] < 2**i * c[i]:
                out.append(f"(iv) fails at {i}")
        return out

    def verify(self) -> None:
        bad = self.violations()
        if bad:
            raise OutOfRange("invalid splice schedule: " + "; ".join(bad))

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "c": list(self.c),
            "g": list(self.g),
            "T": list(self.T),
            "C": list(self.C),
        }

    @classmethod
    def from_json(cls, data) -> "SpliceSchedule":
        return cls(tuple(data["c"]), tuple(data["g"]), tuple(data["T"]))


def build_schedule(c: Sequence[int], g: Sequence[int], levels: int | None = None) -> SpliceSchedule:
    """The smallest schedule meeting the growth conditions, built greedily."""
    L = len(c) if levels is None else levels
    if len(c) < L or len(g) < L:
        raise ArityError(f"need {L} periods and moduli, got {len(c)} and {len(g)}")
    c, g = tuple(c[:L]), tuple(g[:L])
    for i in range(L):
        if g[i] % c[i]:
            raise OutOfRange(f"period c_{i}={c[i]} must divide g_{i}={g[i]}")
    T = [0]
    prev_count = 0
    for i in range(L):
        lo = max(T[i] + 1, 2**i * T[i], T[i] + (prev_count + 1) * g[i])
        if i + 1 < L:
            lo = max(lo, 2 ** (i + 1) * c[i + 1])
        count = -(-(lo - T[i]) // g[i])
        T.append(T[i] + count * g[i])
        prev_count = count
    sched = SpliceSchedule(c, g, tuple(T))
    sched.verify()
    return sched


@dataclass(frozen=True)
class SplicedPoint:
    """``alpha(p) = alpha_n(p - T_n)`` for ``T_n <= p < T_{n+1}``.

    Past ``T_L`` the last level keeps running so that windows near the end
    stay defined.
    """

    points: tuple[PeriodicPoint, ...]
    schedule: SpliceSchedule

    @property
    def m(self) -> int:
        return self.points[0].m

    @property
    def length(self) -> int:
        return self.schedule.T[-1]

    def level_of(self, pos: int) -> int:
        T = self.schedule.T
        return min(int(np.searchsorted(T, pos, side="right")) - 1, len(self.points) - 1)

    def __getitem__(self, pos: int) -> int:
        lvl = self.level_of(pos)
        return self.points[lvl][pos - self.schedule.T[lvl]]

    def symbols(self, start: int, stop: int) -> np.ndarray:
        T = self.schedule.T
        out = np.empty(max(stop - start, 0), dtype=np.int64)
        L = len(self.points)
        for lvl, pt in enumerate(self.points):
            lo = max(start, T[lvl])
            hi = stop if lvl == L - 1 else min(stop, T[lvl + 1])
            if lo < hi:
                out[lo - start : hi - start] = pt.symbols(lo - T[lvl], hi - T[lvl])
        return out

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "points": [p.to_json() for p in self.points],
            "schedule": self.schedule.to_json(),
        }

    @classmethod
    def from_json(cls, data) -> "SplicedPoint":
        pts = tuple(PeriodicPoint.from_json(p) for p in data["points"])
        return cls(pts, SpliceSchedule.from_json(data["schedule"]))


def splice(points: Sequence[PeriodicPoint], schedule: SpliceSchedule) -> SplicedPoint:
    if len(points) != schedule.levels:
        raise ArityError(f"{len(points)} points for a {schedule.levels}-level schedule")
    if len({p.m for p in points}) != 1:
        raise ArityError("points use different alphabets")
    for i, p in enumerate(points):
        if p.c != schedule.c[i]:
            raise ArityError(f"level {i}: point period {p.c} differs from scheduled c={schedule.c[i]}")
    return SplicedPoint(tuple(points), schedule)


@dataclass(frozen=True)
class BoundSeries:
    """Per level ``n = 1..L``: ``b_n = 3M/2**(n-2) + Q_{n-1} + 2M/C_{n-1}``.

    ``derived`` holds ``M/2**(n-2) + Q_{n-1} + 4M/C_{n-1}``, the sum of the
    individual estimates on the averaging, block and periodicity errors.
    """

    M: object
    Q: tuple
    C: tuple
    b: dict
    derived: dict

    def rows(self) -> list[dict]:
        return [
            {"n": n, "Q": self.Q[n - 1], "C": self.C[n - 1], "M": self.M, "b": self.b[n], "derived": self.derived[n]}
            for n in sorted(self.b)
        ]


def predicted_bounds(M, Q: Sequence, C: Sequence, levels: int | None = None) -> BoundSeries:
    L = len(C) if levels is None else levels
    if len(Q) < L or len(C) < L:
        raise ArityError("Q and C must cover every level")
    if M < 0:
        raise OutOfRange("M must be nonnegative")
    two = Fraction(2)
    b, derived = {}, {}
    for n in range(1, L + 1):
        scale = two ** (n - 2)
        q, cn = Q[n - 1], C[n - 1]
        b[n] = M / scale + 2 * M / scale + q + Fraction(2) * M / cn
        derived[n] = M / scale + q + Fraction(4) * M / cn
    return BoundSeries(M, tuple(Q[:L]), tuple(C[:L]), b, derived)


@dataclass(frozen=True)
class Horizon:
    N1: int
    N2: int
    N3: int

    @property
    def N4(self) -> int:
        return max(self.N1, self.N2, self.N3)


def horizon(epsilon, M, bounds: BoundSeries, t_levels: Sequence, t) -> Horizon:
    """Level beyond which every Birkhoff average stays within ``epsilon`` of
    ``t``, from the three position cases (block starts, interior points and
    block tails).

    ``t_levels[n-1]`` is the period average ``t_n`` of the level occupying
    ``[T_{n-1}, T_n)``, for ``n = 1..L``. Levels usable as a starting point run
    from 1 to ``L - 1``.
    """
    eps = float(epsilon)
    if eps <= 0:
        raise OutOfRange("epsilon must be positive")
    L = len(bounds.C)
    Mf = float(M)
    b = {n: float(v) for n, v in bounds.b.items()}
    Q = [float(q) for q in bounds.Q]
    C = [float(x) for x in bounds.C]
    dt = {n: abs(float(t_levels[n - 1]) - float(t)) for n in range(1, L + 1)}
    last = L - 1

    def first_from(cond) -> int | None:
        start = None
        for n in range(last, 0, -1):
            if not cond(n):
                break
            start = n
        return start

    def n1(e):
        return first_from(
            lambda n: max(b[n], Q[n], dt[n], dt[n + 1]) < e / 2
        )

    def n3(e):
        return first_from(
            lambda n: max(b[n], 2 * Mf / C[n] + b[n + 1]) < e / 2 and max(dt[n], dt[n + 1]) < e / 2
        )

    N1, N1_half, N3 = n1(eps), n1(eps / 2), n3(eps)
    log_term = math.ceil(math.log2(2 * Mf / eps)) + 2 if Mf > 0 else 1
    if None in (N1, N1_half, N3) or log_term > last:
        best = None
        if last >= 1:
            n = last
            best = max(
                4 * max(b[n], Q[n], dt[n], dt[n + 1]),
                2 * max(b[n], 2 * Mf / C[n] + b[n + 1], dt[n], dt[n + 1]),
                2 * Mf / 2 ** (n - 2) if Mf > 0 else 0.0,
            )
        raise InsufficientLevels(
            f"{L} levels cannot certify epsilon={eps}; best certifiable epsilon is {best}", best
        )
    return Horizon(N1, max(N1_half, log_term, 1), N3)


def level_averages(points: Sequence[PeriodicPoint], f: Observable) -> list:
    """Exact period averages of ``f`` along each level's point."""
    return [integral(f, empirical_measure(p, f.depth)) for p in points]
