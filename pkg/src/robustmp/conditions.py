"""Boolean combinations of limit-average threshold atoms.

Text form::

    inf(0) >= 0 & inf(1) >= 0 | sup(2) >= 0

``!`` binds tightest, then ``&``, then ``|``.  Thresholds are integers or
``a/b`` rationals.  When a list of dimension names is supplied the parser
also accepts names in place of indices, e.g. ``sup(x) >= 0``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .game import DimensionOutOfRange, LimitVector


class ConditionSyntaxError(ValueError):
    pass


class Kind(enum.Enum):
    INF = "inf"
    SUP = "sup"


class Op(enum.Enum):
    GE = ">="
    GT = ">"
    LE = "<="
    LT = "<"

    def compare(self, a: Fraction, b: Fraction) -> bool:
        if self is Op.GE:
            return a >= b
        if self is Op.GT:
            return a > b
        if self is Op.LE:
            return a <= b
        return a < b

    def negated(self) -> "Op":
        return _NEGATED[self]


_NEGATED = {Op.GE: Op.LT, Op.GT: Op.LE, Op.LE: Op.GT, Op.LT: Op.GE}


@dataclass(frozen=True)
class Atom:
    kind: Kind
    dim: int
    op: Op = Op.GE
    threshold: Fraction = Fraction(0)

    def value(self, lv: LimitVector) -> Fraction:
        if not 0 <= self.dim < lv.k:
            raise DimensionOutOfRange(f"dimension {self.dim} outside 0..{lv.k - 1}")
        return lv.inf_avg[self.dim] if self.kind is Kind.INF else lv.sup_avg[self.dim]


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    part: object


Condition = Union[Atom, And, Or, Not]


def inf(dim: int, op: Op = Op.GE, threshold=0) -> Atom:
    return Atom(Kind.INF, dim, op, Fraction(threshold))


def sup(dim: int, op: Op = Op.GE, threshold=0) -> Atom:
    return Atom(Kind.SUP, dim, op, Fraction(threshold))


def conj(*parts) -> And:
    return And(tuple(parts))


def disj(*parts) -> Or:
    return Or(tuple(parts))


def normalize_positive(cond: Condition, negate: bool = False) -> Condition:
    """Push every negation down to the atoms by flipping comparison operators."""
    if isinstance(cond, Atom):
        if not negate:
            return cond
        return Atom(cond.kind, cond.dim, cond.op.negated(), cond.threshold)
    if isinstance(cond, Not):
        return normalize_positive(cond.part, not negate)
    parts = tuple(normalize_positive(p, negate) for p in cond.parts)
    if isinstance(cond, And):
        return Or(parts) if negate else And(parts)
    return And(parts) if negate else Or(parts)


def eval_condition(cond: Condition, lv: LimitVector) -> bool:
    if isinstance(cond, Atom):
        return cond.op.compare(cond.value(lv), cond.threshold)
    if isinstance(cond, Not):
        return not eval_condition(cond.part, lv)
    if isinstance(cond, And):
        return all(eval_condition(p, lv) for p in cond.parts)
    if isinstance(cond, Or):
        return any(eval_condition(p, lv) for p in cond.parts)
    raise TypeError(f"not a condition node: {cond!r}")


def atoms(cond: Condition) -> list[Atom]:
    if isinstance(cond, Atom):
        return [cond]
    if isinstance(cond, Not):
        return atoms(cond.part)
    out = []
    for p in cond.parts:
        out.extend(atoms(p))
    return out


def is_positive(cond: Condition) -> bool:
    if isinstance(cond, Atom):
        return True
    if isinstance(cond, Not):
        return False
    return all(is_positive(p) for p in cond.parts)


def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_condition(cond: Condition, names: Sequence[str] | None = None) -> str:
    """Render with explicit parentheses around every compound child."""
    if isinstance(cond, Atom):
        d = names[cond.dim] if names else str(cond.dim)
        return f"{cond.kind.value}({d}) {cond.op.value} {format_fraction(cond.threshold)}"
    if isinstance(cond, Not):
        return "!" + _wrap(cond.part, names)
    sep = " & " if isinstance(cond, And) else " | "
    return sep.join(_wrap(p, names) for p in cond.parts)


def _wrap(cond, names):
    text = format_condition(cond, names)
    return text if isinstance(cond, Atom) else f"({text})"


_TOKEN = re.compile(r"\s*(?:(>=|<=|>|<|&|\||!|\(|\))|(-?\d+(?:/\d+)?)|([A-Za-z_][\w+\-]*))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ConditionSyntaxError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str], names: Sequence[str] | None):
        self.toks = tokens
        self.i = 0
        self.names = list(names) if names else None

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ConditionSyntaxError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def parse(self) -> Condition:
        cond = self.disjunction()
        if self.peek() is not None:
            raise ConditionSyntaxError(f"trailing input at {self.peek()!r}")
        return cond

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            inner = self.disjunction()
            self.take(")")
            return inner
        return self.atom()

    def atom(self):
        word = self.take()
        if word not in ("inf", "sup"):
            raise ConditionSyntaxError(f"expected inf(...) or sup(...), got {word!r}")
        self.take("(")
        dim = self.dimension(self.take())
        self.take(")")
        op_tok = self.take()
        try:
            op = Op(op_tok)
        except ValueError:
            raise ConditionSyntaxError(f"expected a comparison, got {op_tok!r}") from None
        num = self.take()
        try:
            threshold = Fraction(num)
        except ValueError:
            raise ConditionSyntaxError(f"bad threshold {num!r}") from None
        return Atom(Kind(word), dim, op, threshold)

    def dimension(self, tok: str) -> int:
        if tok.isdigit():
            return int(tok)
        if self.names and tok in self.names:
            return self.names.index(tok)
        raise ConditionSyntaxError(f"unknown dimension {tok!r}")


def parse_condition(text: str, names: Sequence[str] | None = None) -> Condition:
    return _Parser(_tokenize(text), names).parse()


def relax(cond: Condition, tol: Fraction) -> Condition:
    """Loosen every threshold by ``tol`` (lower bounds go down, upper bounds go up)."""
    if isinstance(cond, Atom):
        shift = -tol if cond.op in (Op.GE, Op.GT) else tol
        return Atom(cond.kind, cond.dim, cond.op, cond.threshold + shift)
    if isinstance(cond, Not):
        return Not(relax(cond.part, -tol))
    parts = tuple(relax(p, tol) for p in cond.parts)
    return And(parts) if isinstance(cond, And) else Or(parts)
