from fractions import Fraction

import pytest

from robustmp.game import (CheckpointOutOfRange, DisconnectedStem, EmptyPrefix, GraphBuilder,
                           InvalidGraph, LimitVector, NotAClosedPath, PlayPrefix, Player,
                           avg_prefix, estimate_limits, geometric_checkpoints, lasso_limits)


def two_cycle():
    b = GraphBuilder(2)
    u = b.vertex(Player.P1, "u")
    v = b.vertex(Player.P2, "v")
    e1 = b.edge(u, v, (1, -1))
    e2 = b.edge(v, u, (3, 1))
    return b.build(u), e1, e2


def test_builder_and_lookups():
    g, e1, e2 = two_cycle()
    assert len(g) == 2
    assert g.owner(1) is Player.P2
    assert g.edge_between(0, 1).id == e1
    assert g.self_loop(0) is None
    assert g.exits(1) == [e2]


def test_dead_end_rejected():
    b = GraphBuilder(1)
    b.vertex(Player.P1)
    with pytest.raises(InvalidGraph):
        b.build(0)


def test_wrong_weight_length_rejected():
    b = GraphBuilder(2)
    u = b.vertex(Player.P1)
    b.edge(u, u, (1,))
    with pytest.raises(InvalidGraph):
        b.build(u)


def test_prefix_totals_and_average():
    g, e1, e2 = two_cycle()
    p = PlayPrefix(g, 0, [e1, e2, e1])
    assert p.totals == (5, -1)
    assert p.totals == p.recompute_totals()
    assert avg_prefix(p) == (Fraction(5, 3), Fraction(-1, 3))
    assert p.vertices == (0, 1, 0, 1)


def test_empty_prefix_average_errors():
    g, _, _ = two_cycle()
    with pytest.raises(EmptyPrefix):
        avg_prefix(PlayPrefix(g, 0))
    with pytest.raises(EmptyPrefix):
        PlayPrefix.from_vertices(g, [])


def test_lasso_limits_ignore_stem():
    g, e1, e2 = two_cycle()
    cycle = PlayPrefix(g, 0, [e1, e2])
    lv = lasso_limits(PlayPrefix(g, 0), cycle)
    assert lv.inf_avg == lv.sup_avg == (Fraction(2), Fraction(0))
    with pytest.raises(NotAClosedPath):
        lasso_limits(PlayPrefix(g, 0), PlayPrefix(g, 0, [e1]))
    with pytest.raises(DisconnectedStem):
        lasso_limits(PlayPrefix(g, 0, [e1]), cycle)


def test_limit_vector_order_checked():
    with pytest.raises(ValueError):
        LimitVector((Fraction(1),), (Fraction(0),))
    assert LimitVector.constant([1, 2]).k == 2


def test_estimates_and_checkpoints():
    g, e1, e2 = two_cycle()
    p = PlayPrefix(g, 0, [e1, e2] * 8)
    assert geometric_checkpoints(16) == [1, 2, 4, 8, 16]
    assert geometric_checkpoints(10, [3, 99]) == [1, 2, 3, 4, 8]
    est = estimate_limits(p, [2, 4, 16])
    assert est.averages == [(2, 0)] * 3
    assert estimate_limits(p, [1]).averages == [(1, -1)]
    with pytest.raises(CheckpointOutOfRange):
        estimate_limits(p, [17])
    with pytest.raises(CheckpointOutOfRange):
        estimate_limits(p, [4, 2])


def test_stem_offset_matters_for_convergence_constant():
    # zero-weight stem of length 6 into a weight-5 self-loop
    b = GraphBuilder(1)
    vs = [b.vertex(Player.P1) for _ in range(7)]
    stem = [b.edge(vs[i], vs[i + 1], (0,)) for i in range(6)]
    loop = b.edge(vs[6], vs[6], (5,))
    g = b.build(vs[0])
    play = PlayPrefix(g, vs[0], stem + [loop] * 10)
    n = len(play)
    mu = Fraction(5)
    gap = abs(avg_prefix(play)[0] - mu)
    stem_total_only = Fraction(0 + 1 * 5, n)
    assert gap > stem_total_only
    with_offset = Fraction(abs(0 - 6 * 5) + 1 * 5, n)
    assert gap <= with_offset
