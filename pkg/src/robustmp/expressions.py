"""Mean-payoff expressions: limit-average atoms closed under min, max, sum and negation.

Text form::

    sum(infavg(1), max(infavg(2), supavg(3)))
    neg(min(supavg(x), supavg(y)))

Dimensions are indices, or names when a name list is supplied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .conditions import eval_condition
from .game import DimensionOutOfRange, LimitVector
from .reduction import DimensionLayout, build_condition


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    pass


class WrongLayout(ExpressionError):
    pass


@dataclass(frozen=True)
class InfAvg:
    dim: int


@dataclass(frozen=True)
class SupAvg:
    dim: int


@dataclass(frozen=True)
class Min:
    parts: tuple

    def __post_init__(self):
        _check_arity(self)


@dataclass(frozen=True)
class Max:
    parts: tuple

    def __post_init__(self):
        _check_arity(self)


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __post_init__(self):
        _check_arity(self)


@dataclass(frozen=True)
class Neg:
    part: object


Expr = Union[InfAvg, SupAvg, Min, Max, Sum, Neg]


def _check_arity(node) -> None:
    if len(node.parts) < 2:
        raise ExpressionError(f"{type(node).__name__.lower()} needs at least two arguments")


def eval_expr(e: Expr, lv: LimitVector) -> Fraction:
    if isinstance(e, (InfAvg, SupAvg)):
        if not 0 <= e.dim < lv.k:
            raise DimensionOutOfRange(f"dimension {e.dim} outside 0..{lv.k - 1}")
        return lv.inf_avg[e.dim] if isinstance(e, InfAvg) else lv.sup_avg[e.dim]
    if isinstance(e, Neg):
        return -eval_expr(e.part, lv)
    values = [eval_expr(p, lv) for p in e.parts]
    if isinstance(e, Min):
        return min(values)
    if isinstance(e, Max):
        return max(values)
    if isinstance(e, Sum):
        return sum(values, Fraction(0))
    raise TypeError(f"not an expression node: {e!r}")


def max_dim(e: Expr) -> int:
    if isinstance(e, (InfAvg, SupAvg)):
        return e.dim
    if isinstance(e, Neg):
        return max_dim(e.part)
    return max(max_dim(p) for p in e.parts)


_NAMES = {Min: "min", Max: "max", Sum: "sum"}
_NODES = {v: k for k, v in _NAMES.items()}


def format_expr(e: Expr, names: Sequence[str] | None = None) -> str:
    if isinstance(e, (InfAvg, SupAvg)):
        word = "infavg" if isinstance(e, InfAvg) else "supavg"
        return f"{word}({names[e.dim] if names else e.dim})"
    if isinstance(e, Neg):
        return f"neg({format_expr(e.part, names)})"
    inner = ", ".join(format_expr(p, names) for p in e.parts)
    return f"{_NAMES[type(e)]}({inner})"


_TOKEN = re.compile(r"\s*(?:([(),])|([A-Za-z_][\w+\-]*|\d+))")


def _tokens(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


def parse_expr(text: str, names: Sequence[str] | None = None) -> Expr:
    toks = _tokens(text)
    pos = 0

    def take(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise ExpressionSyntaxError(f"unexpected end of input, expected {expected or 'more'}")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise ExpressionSyntaxError(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def node():
        word = take()
        take("(")
        if word in ("infavg", "supavg"):
            d = take()
            if d.isdigit():
                dim = int(d)
            elif names and d in names:
                dim = list(names).index(d)
            else:
                raise ExpressionSyntaxError(f"unknown dimension {d!r}")
            take(")")
            return InfAvg(dim) if word == "infavg" else SupAvg(dim)
        args = [node()]
        while toks[pos:pos + 1] == [","]:
            take(",")
            args.append(node())
        take(")")
        if word == "neg":
            if len(args) != 1:
                raise ExpressionSyntaxError("neg takes exactly one argument")
            return Neg(args[0])
        cls = _NODES.get(word)
        if cls is None:
            raise ExpressionSyntaxError(f"unknown function {word!r}")
        try:
            return cls(tuple(args))
        except ExpressionError as exc:
            raise ExpressionSyntaxError(str(exc)) from None

    e = node()
    if pos != len(toks):
        raise ExpressionSyntaxError(f"trailing input at {toks[pos]!r}")
    return e


@dataclass(frozen=True)
class SignExpressions:
    E1: Expr
    E2: Expr
    E3: Expr
    E: Expr
    F: Expr


def build_theorem2(layout: DimensionLayout) -> SignExpressions:
    """Expressions whose sign decides the two-counter game condition.

    The condition holds iff ``E >= 0`` and fails iff ``F = -E > 0``.
    """
    if layout.counter_count != 2 or layout.k != 10:
        raise WrongLayout(f"expected the two-counter layout with 10 dimensions, got k={layout.k}")
    L = layout
    e1 = Max((Min((InfAvg(L.l), InfAvg(L.r))), SupAvg(L.gs)))
    e2 = Max((Min(tuple(InfAvg(d) for d in L.counter_dims())), SupAvg(L.gc)))
    e3 = Min((SupAvg(L.x), SupAvg(L.y)))
    e = Min((e1, e2, e3))
    return SignExpressions(e1, e2, e3, e, Neg(e))


def check_equivalence(lv: LimitVector, layout: DimensionLayout) -> tuple[bool, bool]:
    """(phi <=> E >= 0, not phi <=> F > 0) on one limit vector."""
    t = build_theorem2(layout)
    phi = eval_condition(build_condition(layout), lv)
    return (phi == (eval_expr(t.E, lv) >= 0), (not phi) == (eval_expr(t.F, lv) > 0))
