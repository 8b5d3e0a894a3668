import pytest

from robustmp.conditions import eval_condition
from robustmp.game import LimitVector, Player
from robustmp.machine import FIXTURES, load_fixture, parse_machine
from robustmp.reduction import (L2R, R2L, DimensionLayout, InvalidMachine, blame_weights,
                                build_blame_gadget, build_condition, build_dec_gadget, build_game,
                                build_inc_gadget, build_nop_gadget, build_reset_gadget,
                                build_zero_test, expected_vertex_count, final_reachable,
                                machine_final_reachable, reset_weights, sim_loop_weights)

from conftest import compiled


def test_layout_names():
    assert DimensionLayout.for_counters(1).names == ("l", "r", "gs", "c+", "c-", "gc", "x", "y")
    two = DimensionLayout.for_counters(2)
    assert two.k == 10
    assert two.cminus(2) == two["c2-"]
    with pytest.raises(ValueError):
        DimensionLayout.for_counters(3)


@pytest.mark.parametrize("name,count", [("m_halt", 41), ("m_loop", 25), ("m_zero", 30),
                                        ("m_halt2", 47), ("m_loop2", 34)])
def test_vertex_counts(name, count):
    out = compiled(name)
    assert len(out.graph.vertices) == count == expected_vertex_count(out.machine)


def test_dimension_counts():
    assert compiled("m_halt").graph.dimension_count == 8
    assert compiled("m_halt2").graph.dimension_count == 10


def test_gadget_owners():
    out = compiled("m_halt")
    g = out.graph
    for v, t in enumerate(out.tags):
        if t.role in ("side", "c>0?", "c<0?") or t.gadget in ("blame", "final") or t.role == "A":
            assert g.owner(v) is Player.P2, t
        if t.is_sim_loop or t.role in ("B", "C", "decide"):
            assert g.owner(v) is Player.P1, t


def test_standalone_gadgets_have_the_loop_tables():
    L = DimensionLayout.for_counters(1)
    g = build_inc_gadget()
    assert g.graph.edges[g.gadget.loop_edge].weights == sim_loop_weights(L, "inc", R2L)
    g = build_dec_gadget()
    assert g.graph.edges[g.gadget.loop_edge].weights == sim_loop_weights(L, "dec", L2R)
    for d in (R2L, L2R):
        g = build_nop_gadget(d)
        assert g.graph.edges[g.gadget.loop_edge].weights == sim_loop_weights(L, "nop", d)


def test_blame_and_reset_gadgets():
    L = DimensionLayout.for_counters(1)
    for kind in (R2L, L2R, "pos", "neg"):
        g = build_blame_gadget(kind)
        loops = [e for e in g.graph.edges if e.is_loop and g.tags[e.src].gadget == "blame"]
        assert [e.weights for e in loops] == [blame_weights(L, kind)]
    g = build_reset_gadget()
    loops = sorted(e.weights for e in g.graph.edges if e.is_loop and g.tags[e.src].gadget == "reset")
    assert loops == sorted(reset_weights(L, r) for r in "ABC")


def test_zero_test_shape():
    g = build_zero_test()
    tags = [e.tag for e in g.graph.edges]
    assert tags.count("declare-zero") == 1 and tags.count("declare-pos") == 1
    assert tags.count("blame") >= 3


def test_invalid_machine_rejected():
    text = "counters: 1\nleft q0 qf\nright p0\ninit q0\nfinal qf\nq0: goto qf\np0: goto qf\n"
    with pytest.raises(InvalidMachine) as info:
        build_game(parse_machine(text))
    assert info.value.problems


def test_final_reachability_matches_machine():
    for name in FIXTURES:
        out = compiled(name)
        assert final_reachable(out) == machine_final_reachable(out.machine)


def test_condition_values():
    L = DimensionLayout.for_counters(1)
    phi = build_condition(L)
    assert eval_condition(phi, LimitVector.constant([0] * 8))
    assert not eval_condition(phi, LimitVector.constant([0, 0, 0, 0, 0, 0, -1, 0]))
    # negative l excused by the guard sup
    assert eval_condition(phi, LimitVector((-1,) + (0,) * 7, (0,) * 8))
    assert not eval_condition(phi, LimitVector((-1, 0, -1) + (0,) * 5, (0, 0, -1) + (0,) * 5))


def test_start_and_final_edges():
    out = compiled("m_halt")
    g = out.graph
    A, B, C = out.reset
    start = [e for e in g.edges if e.tag == "start"]
    assert len(start) == 1 and start[0].src == C and start[0].dst == out.prelude
    assert g.edges[g.self_loop(out.final)].weights == (0, 0, 0, 0, 0, 0, -1, 0)
    assert g.initial == A
