"""Birkhoff averages along symbolic points, typicality reports and the
level-by-level bound check for spliced points."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import EmptySegment, InsufficientLevels, OutOfRange
from .measures import Observable
from .splice import SplicedPoint, horizon, level_averages, modulus_sequence, predicted_bounds
from .symbolic import PeriodicPoint, window_codes

_BLOCK = 4096


def series(point, f: Observable, n: int, start: int = 0) -> np.ndarray:
    """``f(sigma^i point)`` for ``start <= i < start + n`` as floats."""
    if f.m != point.m:
        raise OutOfRange("observable and point use different alphabets")
    table = f.values()
    if isinstance(point, PeriodicPoint) and n > 2 * point.c:
        one = series(point, f, point.c, start)
        return np.resize(one, n)
    syms = point.symbols(start, start + n + f.depth - 1)
    return table[window_codes(syms, f.m, f.depth)]


def prefix_sums(values: np.ndarray) -> np.ndarray:
    """Running sums with per-block ``cumsum`` and a Neumaier-compensated
    carry between blocks.

    Each block is centred on its mean before the ``cumsum`` so the partial
    sums stay small and lose little to rounding.
    """
    values = np.asarray(values, dtype=np.float64)
    out = np.empty_like(values)
    s = comp = 0.0
    for lo in range(0, len(values), _BLOCK):
        chunk = values[lo : lo + _BLOCK]
        x = math.fsum(chunk)
        mu = x / len(chunk)
        block = np.cumsum(chunk - mu) + mu * np.arange(1, len(chunk) + 1)
        out[lo : lo + _BLOCK] = block + (s + comp)
        t = s + x
        comp += (s - t) + x if abs(s) >= abs(x) else (x - t) + s
        s = t
    return out


def running_averages(point, f: Observable, n: int) -> np.ndarray:
    """``A_1 .. A_n`` (entry ``v - 1`` is ``A_v``)."""
    return prefix_sums(series(point, f, n)) / np.arange(1, n + 1)


def average(point, f: Observable, n: int) -> float:
    if n < 1:
        raise EmptySegment("average over an empty range")
    return math.fsum(series(point, f, n)) / n


def segment_average(point, f: Observable, m: int, n: int) -> float:
    """Mean of ``f`` over shifts ``m .. n-1``."""
    if not 0 <= m < n:
        raise EmptySegment(f"segment [{m}, {n}) is empty")
    return math.fsum(series(point, f, n - m, start=m)) / (n - m)


def log_grid(horizon_: int, extra: Sequence[int] = (), ratio: float = 1.2) -> list[int]:
    pts = set()
    k = 0
    while True:
        v = math.ceil(ratio**k)
        if v > horizon_:
            break
        pts.add(v)
        k += 1
    pts.update(int(x) for x in extra if 1 <= x <= horizon_)
    pts.add(horizon_)
    return sorted(pts)


@dataclass
class ConvergenceReport:
    """Averages of one observable on a grid of horizons against a target.

    ``status`` is ``pass``, ``fail`` or ``inconclusive``; ``basis`` says how
    the burn-in position ``start`` was obtained: ``certified`` (from the
    bound series), ``scan`` (smallest level after which a direct scan of
    every average stays within tolerance) or ``period`` (one full period of
    a periodic point).
    """

    observable: str
    target: float
    epsilon: float
    horizon: int
    rows: list = field(default_factory=list)  # (n, A_n, |A_n - t|, bound, pass)
    status: str = "inconclusive"
    basis: str = ""
    start: int | None = None
    level: int | None = None
    certified_level: int | None = None
    certified_note: str = ""
    max_error: float = float("nan")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def csv_rows(self) -> list[list]:
        return [
            [self.observable, n, _fmt(a), _fmt(self.target), _fmt(e), "" if b is None else _fmt(float(b)), int(ok)]
            for n, a, e, b, ok in self.rows
        ]

    def summary(self) -> dict:
        return {
            "observable": self.observable,
            "target": _fmt(self.target),
            "epsilon": _fmt(self.epsilon),
            "horizon": self.horizon,
            "status": self.status,
            "basis": self.basis,
            "start": self.start,
            "level": self.level,
            "certified_level": self.certified_level,
            "certified_note": self.certified_note,
            "max_error": _fmt(self.max_error),
        }


CSV_HEADER = ["observable", "n", "A_n", "target", "abs_err", "bound", "pass"]


def reports_csv(reports: Sequence[ConvergenceReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerows(r.csv_rows())
    return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def splice_bounds(alpha: SplicedPoint, f: Observable):
    """Bound series and per-level period averages ``t_1..t_L`` for a spliced
    point; ``t_n`` belongs to the level occupying ``[T_{n-1}, T_n)``."""
    sched = alpha.schedule
    _, Q = modulus_sequence(f, sched.c)
    bounds = predicted_bounds(f.bound, Q, sched.C)
    return bounds, level_averages(alpha.points, f)


def typicality_report(point, family: Sequence[Observable], targets: Sequence, epsilon, horizon_: int, start: int | None = None) -> list[ConvergenceReport]:
    """Check ``|A_n - t| < epsilon`` past a burn-in position for every
    observable of ``family``.

    For a spliced point the burn-in is the certified level ``N4`` when the
    bound series reaches ``epsilon`` within the available levels, otherwise
    the smallest schedule level after which a direct scan of every ``A_v``
    up to the horizon stays within ``epsilon``. For a periodic point it is one
    period. An explicit ``start`` overrides both.
    """
    eps = float(epsilon)
    reports = []
    for f, t in zip(family, targets):
        t = float(t)
        rep = ConvergenceReport(f.name, t, eps, horizon_)
        A = running_averages(point, f, horizon_)
        err = np.abs(A - t)
        bound_at = {}
        extra: list[int] = []
        if isinstance(point, SplicedPoint):
            T = point.schedule.T
            bounds, t_levels = splice_bounds(point, f)
            bound_at = {T[n]: bounds.b[n] for n in bounds.b if T[n] <= horizon_}
            extra = list(T[1:])
            try:
                N4 = horizon(eps, f.bound, bounds, t_levels, t).N4
                rep.certified_level = N4
            except InsufficientLevels as exc:
                rep.certified_note = str(exc)
            if start is not None:
                rep.basis, rep.start = "given", start
            elif rep.certified_level is not None:
                rep.basis, rep.level, rep.start = "certified", rep.certified_level, T[rep.certified_level]
            else:
                rep.basis = "scan"
                for lvl in range(1, point.schedule.levels):
                    if T[lvl] <= horizon_ and bool(np.all(err[T[lvl] - 1 :] < eps)):
                        rep.level, rep.start = lvl, T[lvl]
                        break
        else:
            extra = list(range(point.c, horizon_ + 1, point.c))[:64]
            rep.basis, rep.start = ("given", start) if start is not None else ("period", point.c)
        grid = log_grid(horizon_, extra)
        for n in grid:
            rep.rows.append((n, float(A[n - 1]), float(err[n - 1]), bound_at.get(n), bool(err[n - 1] < eps)))
        if rep.start is None:
            # no scanned level stays within epsilon up to the horizon
            reachable = isinstance(point, SplicedPoint) and point.schedule.T[1] <= horizon_
            rep.status = "fail" if reachable else "inconclusive"
            rep.max_error = float(err[-1])
        elif rep.start > horizon_:
            rep.status = "inconclusive"
        else:
            rep.max_error = float(err[rep.start - 1 :].max())
            grid_ok = all(ok for n, _, _, _, ok in rep.rows if n >= rep.start)
            rep.status = "pass" if grid_ok else "fail"
        reports.append(rep)
    return reports


@dataclass(frozen=True)
class LevelCheck:
    level: int
    T: int
    A_T: float
    t: object
    error: float
    b: object
    derived: object
    checked: bool

    @property
    def passed(self) -> bool:
        return self.error <= float(self.b)


def level_bound_checks(alpha: SplicedPoint, f: Observable) -> list[LevelCheck]:
    """``|A_{T_n} - t_n|`` against ``b_n`` at every level boundary.

    Only levels ``n >= 3`` are asserted; the bound's ``2**(n-2)`` scaling is
    degenerate below that.
    """
    bounds, t_levels = splice_bounds(alpha, f)
    T = alpha.schedule.T
    A = running_averages(alpha, f, T[-1])
    out = []
    for n in range(1, alpha.schedule.levels + 1):
        a = float(A[T[n] - 1])
        e = abs(a - float(t_levels[n - 1]))
        out.append(LevelCheck(n, T[n], a, t_levels[n - 1], e, bounds.b[n], bounds.derived[n], n >= 3))
    return out


def level_csv(checks: Sequence[LevelCheck]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "T_n", "A_Tn", "t_n", "abs_err", "b_n", "pass"])
    for c in checks:
        w.writerow([c.level, c.T, _fmt(c.A_T), _fmt(float(c.t)), _fmt(c.error), _fmt(float(c.b)),
                    int(c.passed) if c.checked else "unchecked"])
    return buf.getvalue()


def weighted_average_identity(A_m: float, m: int, A_mn: float, n: int) -> float:
    """``(m*A_m + (n-m)*A_{m,n}) / n``, which equals ``A_n``."""
    return (m * A_m + (n - m) * A_mn) / n


def exact_period_average(point: PeriodicPoint, f: Observable) -> Fraction:
    return level_averages([point], f)[0]
