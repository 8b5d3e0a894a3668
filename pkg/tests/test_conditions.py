from fractions import Fraction

import pytest

from robustmp.conditions import (ConditionSyntaxError, Op, atoms, conj, disj, eval_condition,
                                 format_condition, inf, is_positive, normalize_positive,
                                 parse_condition, relax, sup, Not)
from robustmp.game import DimensionOutOfRange, LimitVector


def lv(inf_vals, sup_vals=None):
    sup_vals = inf_vals if sup_vals is None else sup_vals
    return LimitVector(tuple(map(Fraction, inf_vals)), tuple(map(Fraction, sup_vals)))


def test_atoms_read_inf_and_sup():
    v = lv([-1, 0], [2, 0])
    assert not eval_condition(inf(0), v)
    assert eval_condition(sup(0), v)
    assert eval_condition(inf(0, Op.LT, 0), v)


def test_out_of_range_dimension():
    with pytest.raises(DimensionOutOfRange):
        eval_condition(inf(5), lv([0]))


def test_normalize_positive_keeps_meaning():
    c = Not(conj(inf(0), disj(sup(1, Op.LE, 1), Not(inf(1, Op.GT, -1)))))
    n = normalize_positive(c)
    assert is_positive(n) and not is_positive(c)
    for a in range(-2, 3):
        for b in range(-2, 3):
            v = lv([a, b], [a + 1, b + 1])
            assert eval_condition(n, v) == eval_condition(c, v)


def test_parse_precedence_and_roundtrip():
    c = parse_condition("inf(0) >= 0 & inf(1) >= 0 | sup(2) >= 0")
    assert c == disj(conj(inf(0), inf(1)), sup(2))
    assert parse_condition(format_condition(c)) == c
    d = parse_condition("!inf(0) < -1/2 & sup(x) <= 3", names=["l", "x"])
    assert d == conj(Not(inf(0, Op.LT, Fraction(-1, 2))), sup(1, Op.LE, 3))
    assert len(atoms(d)) == 2


@pytest.mark.parametrize("text", ["inf(0) >=", "foo(0) >= 1", "inf(0) >= 1 &", "inf(q) >= 0",
                                  "inf(0) = 1", "(inf(0) >= 0"])
def test_parse_errors(text):
    with pytest.raises(ConditionSyntaxError):
        parse_condition(text)


def test_relax_loosens_thresholds():
    c = conj(inf(0), sup(1, Op.LE, 0))
    r = relax(c, Fraction(1, 10))
    v = lv([Fraction(-1, 20), Fraction(1, 20)])
    assert not eval_condition(c, v)
    assert eval_condition(r, v)
