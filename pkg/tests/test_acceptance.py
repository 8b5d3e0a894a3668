"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL`` line (collected in the terminal
summary) together with its runtime against the budget.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction

from robustmp.conditions import And, Atom, Kind, Not, Op, Or, eval_condition
from robustmp.engine import run_play
from robustmp.expressions import check_equivalence
from robustmp.game import GraphBuilder, LimitVector, PlayPrefix, Player, estimate_limits, geometric_checkpoints, lasso_limits
from robustmp.machine import run
from robustmp.monitors import (check_L1, check_L2_L5, check_L3, check_L4, check_L6, check_P2,
                               lasso_limit, summarize_outcome)
from robustmp.reduction import R2L, L2R
from robustmp.strategies import (Cheat, LoopStretch, MixedBlame, NeverBlame, Referee, RefereeParams,
                                 SpuriousBlame, StuckAtReset, Tau)

from conftest import ACCEPTANCE_LINES, N, compiled, honest_play

@contextmanager
def criterion(n, title, budget):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        took = time.perf_counter() - start
        if ok and took >= budget:
            ok = False
            title += f" (over budget {budget}s)"
        status = "PASS" if ok else "FAIL"
        line = f"criterion {n}: {status} - {title} [{took:.2f}s]"
        ACCEPTANCE_LINES.append((n, line))
        print(line)
    assert took < budget, f"criterion {n} took {took:.2f}s, budget {budget}s"


# --- 1. gadget weight tables ---------------------------------------------------

def vec(layout, **named):
    """Figure label set -> weight vector; unnamed dimensions are 0."""
    w = [0] * layout.k
    for name, value in named.items():
        w[layout.names.index(name)] = value
    return tuple(w)


def expected_loop(layout, gadget, direction, counter):
    """Loop tables as drawn for nop/inc/dec; every other counter gets +1/+1."""
    side = {"r": -1, "l": 1} if direction == R2L else {"r": 1, "l": -1}
    named = dict(side, gc=-1)
    for j in range(1, layout.counter_count + 1):
        plus = "c+" if layout.counter_count == 1 else f"c{j}+"
        minus = "c-" if layout.counter_count == 1 else f"c{j}-"
        if j == counter and gadget == "inc":
            named[plus], named[minus] = 2, 0
        elif j == counter and gadget == "dec":
            named[plus], named[minus] = 0, 2
        else:
            named[plus], named[minus] = 1, 1
    return vec(layout, **named)


def loop_weights(out, v):
    return out.graph.edges[out.graph.self_loop(v)].weights


def test_criterion_1_gadget_conformance():
    with criterion(1, "gadget weight tables match the figures", 1.0):
        checked = set()
        for name in ("m_halt", "m_halt2"):
            out = compiled(name)
            L = out.layout
            cnt = [f"c{j}" if L.counter_count == 2 else "c" for j in range(1, L.counter_count + 1)]
            for v, t in enumerate(out.tags):
                if t.is_sim_loop:
                    assert loop_weights(out, v) == expected_loop(L, t.gadget, t.direction, t.counter or 1)
                    checked.add((t.gadget, t.direction))
            for (kind, j), v in out.blame.items():
                table = {
                    R2L: dict(l=-1, gs=1),
                    L2R: dict(r=-1, gs=1),
                    "pos": {cnt[(j or 1) - 1] + "-": -1, "gc": 1},
                    "neg": {cnt[(j or 1) - 1] + "+": -1, "gc": 1},
                }[kind]
                assert loop_weights(out, v) == vec(L, **table)
                checked.add(("blame", kind))
            counters = {d: 1 for d in (L.names[i] for i in L.counter_dims())}
            base = dict(r=1, l=0, gs=-1, gc=-1, **counters)
            A, B, C = out.reset
            assert loop_weights(out, A) == vec(L, **base)
            assert loop_weights(out, B) == vec(L, **base, x=-1, y=1)
            assert loop_weights(out, C) == vec(L, **base, x=1, y=-1)
            assert loop_weights(out, out.final) == vec(L, x=-1)
            checked.update({"reset A", "reset B", "reset C", "final"})
            # text-labelled transitions carry no weight
            assert all(e.weights == (0,) * L.k for e in out.graph.edges if not e.is_loop)
            checked.add("zero-weight wiring")
        assert len(checked) >= 12, checked


# --- 2. constants -----------------------------------------------------------------

def test_criterion_2_constants():
    with criterion(2, "exact constants and their ordering for N in 11, 20, 100", 1.0):
        for n in (11, 20, 100):
            check_constants(n)


def check_constants(n):
    p = RefereeParams(n)
    eps = Fraction(1, (n + 1) ** 2)
    delta = Fraction(1) / (Fraction(1, 2) + n * (1 + 2 * eps))
    g_side = min(eps * delta / 2, (eps / 4) / (1 + 1 / delta - eps / 4))
    g_counter = min(Fraction(1, 20 * n), delta / 8)
    assert (p.eps, p.delta, p.gamma_side, p.gamma_counter) == (eps, delta, g_side, g_counter)
    assert 0 < p.gamma_counter < p.delta < Fraction(1, 2)
    assert 0 < p.gamma_side < p.delta


# --- 3. honest play ---------------------------------------------------------------

def test_criterion_3_honest_monitors():
    with criterion(3, "tau vs referee on M_loop, 10^5 rounds: L1 L3 L4 L6 pass, no blame", 10.0):
        out, rec = honest_play("m_loop", 100_000)
        p = RefereeParams(N)
        assert rec.n == 100_000
        assert not rec.events_of("blame")
        for rep in (check_L1(rec, out, p), check_L3(rec, out, p), check_L4(rec, out, p), check_L6(rec, out)):
            assert rep.passed, rep.format()
            assert rep.checks


# --- 4. dishonest play ------------------------------------------------------------

def predicted_blame(out, rec, p1):
    if isinstance(p1, Cheat):
        return "pos" if p1.direction == "zero-when-positive" else "neg"
    start = [e for e in rec.events_of("loop-start") if e.info["phase"] == p1.phase][0]
    return out.tags[start.vertex].direction


def test_criterion_4_dishonest_blames():
    with criterion(4, "cheat fixtures trigger the predicted blame; L2/L5 hold at exit (4/4)", 10.0):
        out = compiled("m_halt")
        p = RefereeParams(N)
        L = out.layout
        fixtures = [Cheat(L, 1, "zero-when-positive"), Cheat(L, 0, "positive-when-zero"),
                    LoopStretch(L, 3, 2), LoopStretch(L, 3, Fraction(1, 2))]
        passed = 0
        for p1 in fixtures:
            rec = run_play(out.graph, p1, Referee(L, p), 100_000, out.tags)
            blames = rec.events_of("blame")
            assert len(blames) == 1
            assert blames[0].info["kind"] == predicted_blame(out, rec, p1)
            rep = check_L2_L5(rec, out, p)
            assert rep.passed and len(rep.checks) == 1 and not rep.vacuous, rep.format()
            passed += 1
        assert passed == 4


# --- 5. halting machine -------------------------------------------------------------

def test_criterion_5_halting_reaches_final():
    with criterion(5, "tau vs referee on M_halt reaches q_f within the bound; Sup x = -1", 10.0):
        out, rec = honest_play("m_halt", 10 ** 9)
        p = RefereeParams(N)
        steps = run(out.machine, 1000).steps_to_halt
        reset_loop = max(3 + 4 * N, 8 * (N + 1) ** 2)
        bound = reset_loop + 3 + (steps + 1) * (reset_loop + 4)
        assert rec.lasso is not None and rec.lasso.vertex == out.final
        assert rec.n <= bound
        lv = lasso_limit(rec)
        assert lv.sup_avg[out.layout.x] == -1
        assert not eval_condition(out.condition, lv)
        assert summarize_outcome(rec, out.condition).condition_value is False


# --- 6. round-level restatement against adversarial player 2 ------------------------

DELTAS = (Fraction(1, 11), Fraction(1, 20), Fraction(1, 40))


def test_criterion_6_adversarial_player2():
    with criterion(6, "P2 disjunction on M_loop vs never/spurious/mixed blame, 3 deltas", 30.0):
        out = compiled("m_loop")
        L = out.layout
        plays = [
            (NeverBlame(L), 100_000),
            (SpuriousBlame(L), 10 ** 500),
            (MixedBlame(L), 10 ** 500),
        ]
        for p2, horizon in plays:
            rec = run_play(out.graph, Tau(L), p2, horizon, out.tags, max_resets=35)
            if not isinstance(p2, NeverBlame):
                assert len(rec.events_of("blame")) >= 30
            for d in DELTAS:
                rep = check_P2(rec, out, d)
                assert rep.passed, rep.format()


# --- 7. expression equivalence --------------------------------------------------------

def lasso_lvs_two_counter():
    out = compiled("m_loop2")
    L = out.layout
    p = RefereeParams(N)
    runs = [
        run_play(*(lambda o: (o.graph, Tau(o.layout), Referee(o.layout, p), 10 ** 9, o.tags))(compiled("m_halt2"))),
        run_play(out.graph, StuckAtReset(L, "B"), Referee(L, p), 10 ** 9, out.tags),
        run_play(out.graph, StuckAtReset(L, "C"), Referee(L, p), 10 ** 9, out.tags),
        run_play(out.graph, Tau(L), SpuriousBlame(L, forever=True), 10 ** 9, out.tags),
    ]
    assert all(r.lasso is not None for r in runs)
    return [lasso_limit(r) for r in runs]


def test_criterion_7_expression_equivalence():
    with criterion(7, "phi <=> E >= 0 and not phi <=> F > 0 on 1000 random + lasso vectors", 5.0):
        layout = compiled("m_halt2").layout
        rng = random.Random(2024)
        vectors = []
        for _ in range(1000):
            inf = [Fraction(rng.randint(-6, 6), rng.randint(1, 6)) for _ in range(10)]
            # zero is the threshold; hit it often
            inf = [Fraction(0) if rng.random() < 0.2 else a for a in inf]
            sup = [a + (0 if rng.random() < 0.3 else Fraction(rng.randint(0, 6), rng.randint(1, 6))) for a in inf]
            vectors.append(LimitVector(tuple(inf), tuple(sup)))
        lassos = lasso_lvs_two_counter()
        assert len(lassos) == 4
        for lv in vectors + lassos:
            assert check_equivalence(lv, layout) == (True, True)


# --- 8. oracle for condition evaluation ----------------------------------------------

def random_condition(rng, k, depth):
    if depth == 0 or rng.random() < 0.3:
        return Atom(rng.choice(list(Kind)), rng.randrange(k), rng.choice(list(Op)),
                    Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
    roll = rng.random()
    if roll < 0.2:
        return Not(random_condition(rng, k, depth - 1))
    parts = tuple(random_condition(rng, k, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(parts) if roll < 0.6 else Or(parts)


def oracle_source(cond):
    """Translate the tree into Python source over lists ``inf`` and ``sup``."""
    if isinstance(cond, Atom):
        side = "inf" if cond.kind is Kind.INF else "sup"
        return f"({side}[{cond.dim}] {cond.op.value} Fraction({cond.threshold.numerator}, {cond.threshold.denominator}))"
    if isinstance(cond, Not):
        return f"(not {oracle_source(cond.part)})"
    joiner = " and " if isinstance(cond, And) else " or "
    return "(" + joiner.join(oracle_source(p) for p in cond.parts) + ")"


def test_criterion_8_condition_oracle():
    with criterion(8, "eval_condition agrees with an independent evaluator on 1000 pairs", 30.0):
        rng = random.Random(8)
        k = 4
        for _ in range(1000):
            cond = random_condition(rng, k, 6)
            inf = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(k)]
            sup = [a + Fraction(rng.randint(0, 3), rng.randint(1, 3)) for a in inf]
            expected = eval(oracle_source(cond), {"Fraction": Fraction, "inf": inf, "sup": sup})
            assert eval_condition(cond, LimitVector(tuple(inf), tuple(sup))) == expected


# --- 9. lasso convergence ---------------------------------------------------------------

def random_lasso(rng, k):
    """A path graph feeding a cycle; returns (graph, stem edges, cycle edges)."""
    b = GraphBuilder(k)
    stem_len, cyc_len = rng.randint(0, 6), rng.randint(1, 5)
    vs = [b.vertex(rng.choice(list(Player))) for _ in range(stem_len + cyc_len)]
    w = lambda: tuple(rng.randint(-5, 5) for _ in range(k))
    stem = [b.edge(vs[i], vs[i + 1], w()) for i in range(stem_len)]
    cyc_vs = vs[stem_len:]
    cycle = [b.edge(cyc_vs[i], cyc_vs[(i + 1) % cyc_len], w()) for i in range(cyc_len)]
    return b.build(vs[0]), stem, cycle


def test_criterion_9_lasso_convergence():
    with criterion(9, "checkpoint estimates within C/n of the lasso limits up to 10^5", 60.0):
        rng = random.Random(99)
        horizon = 100_000
        for _ in range(10):
            k = rng.randint(1, 4)
            g, stem, cycle = random_lasso(rng, k)
            stem_p = PlayPrefix(g, g.initial, stem)
            cyc_p = PlayPrefix(g, stem_p.end, cycle)
            mu = lasso_limits(stem_p, cyc_p).inf_avg
            edges = list(stem)
            while len(edges) < horizon:
                edges.extend(cycle)
            play = PlayPrefix(g, g.initial, edges[:horizon])
            s, length = len(stem), len(cycle)
            maxw = max(abs(x) for e in g.edges for x in e.weights)
            C = max(abs(stem_p.totals[d] - s * mu[d]) for d in range(k)) + length * maxw
            est = estimate_limits(play, geometric_checkpoints(horizon))
            for n, avg in zip(est.checkpoints, est.averages):
                for d in range(k):
                    assert abs(avg[d] - mu[d]) <= Fraction(C, n), (n, d)
