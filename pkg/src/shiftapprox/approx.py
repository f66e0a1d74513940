"""Periodic points whose window statistics approximate a shift-balanced word
measure.

Pipeline: :func:`rationalize` a balanced measure to denominator ``N``, build
the de Bruijn multigraph carrying ``N * kappa'(w)`` copies of each word ``w``
as an edge from its prefix to its suffix, walk an Eulerian circuit
(:func:`longest_allowed_sequence`), and read a periodic point off the circuit
either by unrolling it (:func:`periodic_point_paper`, period ``N + n - 1``,
error at most ``n / (N + n)``) or by closing it up
(:func:`periodic_point_cyclic`, period ``N``, exact).
"""
from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import (
    BalanceError,
    ClosureError,
    ConnectivityError,
    DenominatorTooSmall,
    InvalidBound,
    MalformedSequence,
    OutOfRange,
)
from .measures import Observable, check_shift_balance
from .symbolic import PeriodicPoint, Word, WordMeasure, all_words, as_fraction, empirical_measure, frac_pair


@dataclass(frozen=True)
class RationalizedMeasure:
    kappa: WordMeasure  # the rationalized measure, denominator N
    N: int
    source: WordMeasure
    deviation: Fraction

    @property
    def counts(self) -> dict[Word, int]:
        out = {}
        for w, p in self.kappa.weights.items():
            c = p * self.N
            assert c.denominator == 1
            out[w] = int(c)
        return out


@dataclass(frozen=True)
class DeBruijnGraph:
    """Vertices are ``(n-1)``-words; word ``w`` is an edge
    ``w[:-1] -> w[1:]`` with multiplicity ``multiplicity[w]``."""

    m: int
    n: int
    multiplicity: dict

    @classmethod
    def from_counts(cls, m: int, n: int, counts: dict) -> "DeBruijnGraph":
        return cls(m, n, {tuple(w): int(c) for w, c in sorted(counts.items()) if c})

    @property
    def vertices(self) -> list[Word]:
        return list(all_words(self.m, self.n - 1))

    @property
    def total(self) -> int:
        return sum(self.multiplicity.values())

    def degrees(self) -> tuple[Counter, Counter]:
        out_deg, in_deg = Counter(), Counter()
        for w, c in self.multiplicity.items():
            out_deg[w[:-1]] += c
            in_deg[w[1:]] += c
        return in_deg, out_deg

    def is_balanced(self) -> bool:
        in_deg, out_deg = self.degrees()
        return all(in_deg[v] == out_deg[v] for v in set(in_deg) | set(out_deg))

    def components(self) -> list[list[Word]]:
        """Weakly connected components of the vertices touching an edge."""
        parent: dict[Word, Word] = {}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for w in self.multiplicity:
            for v in (w[:-1], w[1:]):
                parent.setdefault(v, v)
            a, b = find(w[:-1]), find(w[1:])
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[Word, list[Word]] = {}
        for v in sorted(parent):
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())


def _largest_remainder(targets: dict[Word, Fraction], N: int) -> dict[Word, int]:
    x = {w: math.floor(t) for w, t in targets.items()}
    short = N - sum(x.values())
    order = sorted(targets, key=lambda w: (-(targets[w] - x[w]), w))
    for w in order[:short]:
        x[w] += 1
    return x


def _repair_balance(x: dict[Word, int], targets: dict[Word, Fraction]) -> None:
    """Balance ``x`` in place by unit changes along residual paths.

    Each word may move between ``floor`` and ``ceil`` of its target. The
    fractional target itself is a balanced point of that box, so a balanced
    integer point exists and augmenting paths find one.
    """
    lo = {w: math.floor(t) for w, t in targets.items()}
    hi = {w: math.ceil(t) for w, t in targets.items()}
    need: Counter = Counter()
    for w, c in x.items():
        need[w[:-1]] -= c
        need[w[1:]] += c
    words = sorted(w for w in x if w[:-1] != w[1:])
    while True:
        sources = sorted(v for v, e in need.items() if e > 0)
        if not sources:
            return
        adj: dict[Word, list[tuple[Word, Word, int]]] = {}
        for w in words:
            if x[w] < hi[w]:
                adj.setdefault(w[:-1], []).append((w[1:], w, +1))
            if x[w] > lo[w]:
                adj.setdefault(w[1:], []).append((w[:-1], w, -1))
        prev: dict[Word, tuple] = {v: None for v in sources}
        queue = deque(sources)
        sink = None
        while queue and sink is None:
            u = queue.popleft()
            for v, w, step in adj.get(u, ()):
                if v not in prev:
                    prev[v] = (u, w, step)
                    if need[v] < 0:
                        sink = v
                        break
                    queue.append(v)
        if sink is None:
            raise BalanceError("no balanced integer rounding inside the rounding box")
        v = sink
        need[v] += 1
        while prev[v] is not None:
            u, w, step = prev[v]
            x[w] += step
            v = u
        need[v] -= 1


def _rationalize_at(kappa: WordMeasure, delta: Fraction, N: int) -> RationalizedMeasure:
    targets = {w: p * N for w, p in kappa.weights.items()}
    x = _largest_remainder(targets, N)
    if kappa.n > 1:
        _repair_balance(x, targets)
    total = sum(x.values())
    if total <= 0:
        raise DenominatorTooSmall(f"N={N} leaves no mass; use a larger N")
    prime = WordMeasure(kappa.m, kappa.n, {w: Fraction(c, total) for w, c in x.items() if c})
    dev = prime.distance(kappa)
    if dev >= delta:
        raise DenominatorTooSmall(
            f"N={N} gives deviation {dev} >= delta={delta}; use a larger N"
        )
    if not check_shift_balance(prime).balanced:
        raise BalanceError("rounded measure lost shift balance")
    if any(w not in kappa.weights for w in prime.weights):
        raise BalanceError("rounding created weight on a word of zero mass")
    return RationalizedMeasure(prime, total, kappa, dev)


def rationalize(kappa: WordMeasure, delta, N: int | None = None, max_doublings: int = 40) -> RationalizedMeasure:
    """Balanced measure with common denominator ``N`` within ``delta`` of
    ``kappa`` in every word, keeping zero weights at zero.

    With ``N`` given, the returned denominator is the total of the rounded
    counts, which may differ from ``N`` by a few units when rounding had to be
    repaired. Without ``N``, start at ``ceil(m**n / delta)`` and double.
    """
    delta = as_fraction(delta)
    if delta <= 0:
        raise OutOfRange("delta must be positive")
    report = check_shift_balance(kappa)
    if not report.balanced:
        raise BalanceError(f"measure is not shift-balanced (imbalance {report.imbalance})")
    if N is not None:
        if N < 1:
            raise DenominatorTooSmall("N must be positive")
        return _rationalize_at(kappa, delta, int(N))
    N = math.ceil(Fraction(kappa.m**kappa.n) / delta)
    for _ in range(max_doublings):
        try:
            return _rationalize_at(kappa, delta, N)
        except DenominatorTooSmall:
            N *= 2
    raise DenominatorTooSmall(f"no denominator up to {N} achieves delta={delta}")


def de_bruijn_graph(r: RationalizedMeasure) -> DeBruijnGraph:
    return DeBruijnGraph.from_counts(r.kappa.m, r.kappa.n, r.counts)


def eulerian_circuit(graph: DeBruijnGraph) -> list[Word]:
    """Hierholzer's algorithm; at each vertex the lowest unused word is taken
    first, so the circuit is reproducible."""
    if not graph.multiplicity:
        return []
    if not graph.is_balanced():
        raise BalanceError("de Bruijn graph is not balanced")
    comps = graph.components()
    if len(comps) > 1:
        raise ConnectivityError(
            f"positive support splits into {len(comps)} components: {comps}", comps
        )
    remaining = dict(graph.multiplicity)
    out_edges: dict[Word, list[Word]] = {}
    for w in sorted(remaining):
        out_edges.setdefault(w[:-1], []).append(w)
    cursor = Counter()
    start = min(remaining)[:-1]
    stack: list[tuple[Word, Word | None]] = [(start, None)]
    circuit: list[Word] = []
    while stack:
        v, via = stack[-1]
        edges = out_edges.get(v, [])
        i = cursor[v]
        while i < len(edges) and remaining[edges[i]] == 0:
            i += 1
        cursor[v] = i
        if i < len(edges):
            w = edges[i]
            remaining[w] -= 1
            stack.append((w[1:], w))
        else:
            stack.pop()
            if via is not None:
                circuit.append(via)
    circuit.reverse()
    return circuit


def longest_allowed_sequence(r: RationalizedMeasure) -> list[Word]:
    """Cyclically overlapping sequence of words using each word ``w``
    exactly ``N * kappa'(w)`` times."""
    seq = eulerian_circuit(de_bruijn_graph(r))
    if len(seq) != r.N:
        raise BalanceError(f"circuit length {len(seq)} differs from N={r.N}")
    return seq


def _check_overlaps(seq: Sequence[Word]) -> None:
    if not seq:
        raise MalformedSequence("empty word sequence")
    n = len(seq[0])
    for i, (a, b) in enumerate(zip(seq, seq[1:])):
        if len(b) != n:
            raise MalformedSequence(f"word {i + 1} has length {len(b)}, expected {n}")
        if a[1:] != b[:-1]:
            raise MalformedSequence(f"words {i} and {i + 1} do not overlap in {n - 1} symbols")


def periodic_point_paper(seq: Sequence[Word], m: int) -> PeriodicPoint:
    """Unroll the sequence: the first word, then the last symbol of each
    following word. Period ``n + r - 1``."""
    seq = [tuple(w) for w in seq]
    _check_overlaps(seq)
    return PeriodicPoint(m, seq[0] + tuple(w[-1] for w in seq[1:]))


def periodic_point_cyclic(seq: Sequence[Word], m: int) -> PeriodicPoint:
    """Close the circuit: symbol ``i`` is the last symbol of word ``i``.
    Period ``r``; the cyclic windows are exactly the words of ``seq``."""
    seq = [tuple(w) for w in seq]
    _check_overlaps(seq)
    if seq[-1][1:] != seq[0][:-1]:
        raise ClosureError("last word does not overlap the first one")
    return PeriodicPoint(m, tuple(w[-1] for w in seq))


class ApproximationError(NamedTuple):
    max_error: Fraction
    bound: Fraction

    @property
    def within_bound(self) -> bool:
        return self.max_error <= self.bound


def approximation_error(beta: PeriodicPoint, kappa_prime: WordMeasure, N: int) -> ApproximationError:
    """Largest cell error of ``beta``'s empirical measure against
    ``kappa_prime``, with the certified bound ``n / (N + n)``."""
    if beta.m != kappa_prime.m:
        raise OutOfRange("point and measure use different alphabets")
    n = kappa_prime.n
    emp = empirical_measure(beta, n)
    return ApproximationError(emp.distance(kappa_prime), Fraction(n, N + n))


@dataclass(frozen=True)
class Approximation:
    rationalized: RationalizedMeasure
    sequence: list
    paper: PeriodicPoint
    cyclic: PeriodicPoint
    paper_error: ApproximationError
    cyclic_error: ApproximationError

    def point(self, mode: str) -> PeriodicPoint:
        return {"paper": self.paper, "cyclic": self.cyclic}[mode]

    def report(self, mode: str) -> dict:
        err = self.paper_error if mode == "paper" else self.cyclic_error
        beta = self.point(mode)
        return {
            "N": self.rationalized.N,
            "r": len(self.sequence),
            "period": beta.c,
            "mode": mode,
            "max_error": frac_pair(err.max_error),
            "bound": frac_pair(err.bound),
            "beta": list(beta.period),
        }


def approximate(kappa: WordMeasure, N: int | None = None, delta=None) -> Approximation:
    """Run the whole pipeline for one measure, producing both point modes."""
    if delta is None:
        delta = Fraction(1)  # N fixed by the caller; any deviation below 1 is accepted
    r = rationalize(kappa, delta, N)
    seq = longest_allowed_sequence(r)
    paper = periodic_point_paper(seq, kappa.m)
    cyclic = periodic_point_cyclic(seq, kappa.m)
    perr = approximation_error(paper, r.kappa, r.N)
    cerr = approximation_error(cyclic, r.kappa, r.N)
    if not perr.within_bound:
        raise AssertionError(f"paper-mode error {perr.max_error} exceeds {perr.bound}")
    if cerr.max_error != 0:
        raise AssertionError(f"cyclic-mode error {cerr.max_error} is not zero")
    return Approximation(r, seq, paper, cyclic, perr, cerr)


def partition_tolerance(f: Observable, epsilon) -> tuple[int, int, Fraction]:
    """Resolution, depth and per-cell tolerance ``delta`` such that any
    measure within ``delta`` of ``rho`` on every depth-``n`` cell integrates
    ``f`` to within ``epsilon`` of ``rho``.

    For a cellwise observable the within-cell oscillation is zero, so
    ``delta = epsilon / (2 M m**n)``. A zero observable gets ``M = 1``.
    """
    if not f.is_cellwise:
        raise TypeError("partition_tolerance needs a cellwise observable")
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise OutOfRange("epsilon must be positive")
    M = as_fraction(f.bound)
    nonzero = any(v != 0 for v in f.table)
    if M <= 0:
        if nonzero:
            raise InvalidBound("nonzero observable with nonpositive bound")
        M = Fraction(1)
    gamma = Fraction(0)
    return f.m, f.depth, eps / (2 * (gamma + M) * f.m**f.depth)
