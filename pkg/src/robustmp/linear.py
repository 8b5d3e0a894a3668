"""Exact affine constraints over play totals.

Every quantity the strategies and monitors care about is an affine function of
the per-dimension totals and the round count, e.g. ``Avg(g_s) <= -1/2`` is
``-g_s - n/2 >= 0`` once multiplied by the (positive) round count.  Along a
self-loop traversed ``j`` times the totals move by ``j * w`` and the round
count by ``j``, so each constraint becomes affine in ``j``.  That is what lets
the engine fast-forward loops of astronomically many rounds while still
answering "first round where this fails" exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


@dataclass(frozen=True)
class Ge:
    """``sum(coef * totals[dim]) + per_round * n + const >= 0`` (``> 0`` if strict).

    Built through :func:`ge`, which clears denominators so that all
    coefficients are integers.
    """

    coeffs: tuple[tuple[int, Number], ...]
    per_round: Number = 0
    const: Number = 0
    strict: bool = False
    label: str = ""

    def value(self, totals: Sequence[int], n: int) -> Fraction:
        v = self.const + self.per_round * n
        for dim, c in self.coeffs:
            v += c * totals[dim]
        return v

    def holds(self, totals: Sequence[int], n: int) -> bool:
        v = self.value(totals, n)
        return v > 0 if self.strict else v >= 0

    def slope(self, weights: Sequence[int]) -> Fraction:
        """Change of ``value`` per traversal of an edge with ``weights``."""
        s = self.per_round
        for dim, c in self.coeffs:
            s += c * weights[dim]
        return s


@dataclass(frozen=True)
class AllOf:
    parts: tuple
    label: str = ""

    def holds(self, totals, n):
        return all(p.holds(totals, n) for p in self.parts)


@dataclass(frozen=True)
class AnyOf:
    parts: tuple
    label: str = ""

    def holds(self, totals, n):
        return any(p.holds(totals, n) for p in self.parts)


Pred = Union[Ge, AllOf, AnyOf]


def ge(terms: dict[int, Number] | Iterable[tuple[int, Number]], per_round: Number = 0,
       const: Number = 0, strict: bool = False, label: str = "") -> Ge:
    items = terms.items() if isinstance(terms, dict) else terms
    merged: dict[int, Fraction] = {}
    for dim, c in items:
        merged[dim] = merged.get(dim, Fraction(0)) + Fraction(c)
    per_round, const = Fraction(per_round), Fraction(const)
    # scaling by a positive integer keeps the sign and lets evaluation stay in ints
    scale = math.lcm(per_round.denominator, const.denominator, *(c.denominator for c in merged.values()))
    coeffs = tuple(sorted((d, int(c * scale)) for d, c in merged.items() if c != 0))
    return Ge(coeffs, int(per_round * scale), int(const * scale), strict, label)


def avg_ge(dim: int, bound: Number, strict: bool = False, label: str = "") -> Ge:
    """``Avg(dim) >= bound`` (or ``>``), valid for n > 0."""
    return ge({dim: 1}, per_round=-Fraction(bound), strict=strict, label=label)


def avg_le(dim: int, bound: Number, strict: bool = False, label: str = "") -> Ge:
    """``Avg(dim) <= bound`` (or ``<``), valid for n > 0."""
    return ge({dim: -1}, per_round=Fraction(bound), strict=strict, label=label)


def leaves(pred: Pred) -> list[Ge]:
    if isinstance(pred, Ge):
        return [pred]
    out: list[Ge] = []
    for p in pred.parts:
        out.extend(leaves(p))
    return out


def _shift(totals: Sequence[int], weights: Sequence[int], j: int) -> tuple[int, ...]:
    return tuple(t + j * w for t, w in zip(totals, weights))


def change_points(atom: Ge, totals: Sequence[int], n: int, weights: Sequence[int]) -> list[int]:
    """Traversal counts at which ``atom`` may change truth value (possibly out of range)."""
    slope = atom.slope(weights)
    if slope == 0:
        return []
    root = -atom.value(totals, n) / slope
    return [math.floor(root), math.floor(root) + 1, math.ceil(root)]


def first_failure(pred: Pred, totals: Sequence[int], n: int, weights: Sequence[int],
                  lo: int, hi: int) -> int | None:
    """Smallest ``j`` in ``[lo, hi]`` with ``pred`` false after ``j`` traversals.

    Each leaf is affine in ``j`` so it flips at most once; between consecutive
    flip points every leaf is constant, hence checking the start of each piece
    is exhaustive.
    """
    if hi < lo:
        return None
    if hi - lo < 4:
        for j in range(lo, hi + 1):
            if not pred.holds(_shift(totals, weights, j), n + j):
                return j
        return None
    candidates = {lo, hi}
    for atom in leaves(pred):
        for c in change_points(atom, totals, n, weights):
            if lo <= c <= hi:
                candidates.add(c)
    for j in sorted(candidates):
        if not pred.holds(_shift(totals, weights, j), n + j):
            return j
    return None


def min_loops(constraints: Iterable[Ge], totals: Sequence[int], n: int,
              weights: Sequence[int], lookahead: int = 0) -> int | None:
    """Least ``j >= 0`` such that every constraint holds after ``j`` traversals.

    The constraints are evaluated at round count ``n + j + lookahead`` (rounds
    that will pass with the totals unchanged before the value matters).
    Returns ``None`` when no such ``j`` exists.
    """
    lo, hi = 0, None
    for atom in constraints:
        a = atom.value(totals, n + lookahead)
        b = atom.slope(weights)
        if b == 0:
            if (a > 0) if atom.strict else (a >= 0):
                continue
            return None
        root = -a / b
        if b > 0:
            bound = math.floor(root) + 1 if atom.strict else math.ceil(root)
            lo = max(lo, bound)
        else:
            bound = math.ceil(root) - 1 if atom.strict else math.floor(root)
            hi = bound if hi is None else min(hi, bound)
    if hi is not None and lo > hi:
        return None
    return lo
