"""Compile a two-sided counter machine into a robust mean-payoff game.

Layout of the compiled graph:

* a reset gadget ``A -> B -> C`` (A belongs to player 2, B and C to player 1),
* a prelude nop r->l step that moves the reset's ``r ~ |g_s|`` balance over to
  ``l`` before the initial state is entered (left states carry ``l ~ |g_s|``),
* one simulation gadget per instruction: a player-1 self-loop vertex followed
  by a player-2 ``side?`` vertex that either continues or blames,
* zero tests: a player-1 ``decide`` vertex that declares ``c=0`` (checked by
  ``c>0?``, then a nop l->r step) or ``c>0`` (a dec l->r step, then ``c<0?``),
* shared blame gadgets (player-2 self-loops) that exit to the reset gadget,
* the final sink with self-loop ``x <- -1``.

Every non-loop edge carries the zero vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import conditions as C
from .game import GameGraph, GraphBuilder, Player
from .machine import (LRBranch, LRNop, RLInc, RLNop, TwoSidedMachine,
                      reachable_states, validate)


class InvalidMachine(Exception):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


L2R = "l2r"
R2L = "r2l"
BLAME_KINDS = (R2L, L2R, "pos", "neg")


@dataclass(frozen=True)
class DimensionLayout:
    counter_count: int
    names: tuple[str, ...]

    @classmethod
    def for_counters(cls, counter_count: int) -> "DimensionLayout":
        if counter_count == 1:
            middle = ("c+", "c-")
        elif counter_count == 2:
            middle = ("c1+", "c1-", "c2+", "c2-")
        else:
            raise ValueError("only one or two counters are supported")
        return cls(counter_count, ("l", "r", "gs") + middle + ("gc", "x", "y"))

    @property
    def k(self) -> int:
        return len(self.names)

    def __getitem__(self, name: str) -> int:
        return self.names.index(name)

    @property
    def l(self) -> int:
        return 0

    @property
    def r(self) -> int:
        return 1

    @property
    def gs(self) -> int:
        return 2

    @property
    def gc(self) -> int:
        return self["gc"]

    @property
    def x(self) -> int:
        return self["x"]

    @property
    def y(self) -> int:
        return self["y"]

    def cplus(self, j: int = 1) -> int:
        return self["c+" if self.counter_count == 1 else f"c{j}+"]

    def cminus(self, j: int = 1) -> int:
        return self["c-" if self.counter_count == 1 else f"c{j}-"]

    def counter_dims(self) -> list[int]:
        out = []
        for j in range(1, self.counter_count + 1):
            out += [self.cplus(j), self.cminus(j)]
        return out

    def vector(self, **named) -> tuple[int, ...]:
        """Weight vector from keyword components; ``cp1``/``cm1`` style names for counters."""
        w = [0] * self.k
        for key, value in named.items():
            w[self._key(key)] += value
        return tuple(w)

    def _key(self, key: str) -> int:
        if key in ("l", "r", "gs", "gc", "x", "y"):
            return self[key]
        if key.startswith("cp"):
            return self.cplus(int(key[2:] or 1))
        if key.startswith("cm"):
            return self.cminus(int(key[2:] or 1))
        raise KeyError(key)


# --- weight tables ------------------------------------------------------

def sim_loop_weights(layout: DimensionLayout, op: str, direction: str, counter: int = 1) -> tuple[int, ...]:
    """Self-loop weight of a nop / inc / dec gadget moving in ``direction``."""
    w = [0] * layout.k
    if direction == R2L:
        w[layout.r], w[layout.l] = -1, 1
    else:
        w[layout.r], w[layout.l] = 1, -1
    for j in range(1, layout.counter_count + 1):
        plus, minus = 1, 1
        if j == counter and op == "inc":
            plus, minus = 2, 0
        elif j == counter and op == "dec":
            plus, minus = 0, 2
        w[layout.cplus(j)], w[layout.cminus(j)] = plus, minus
    w[layout.gc] = -1
    return tuple(w)


def blame_weights(layout: DimensionLayout, kind: str, counter: int = 1) -> tuple[int, ...]:
    if kind == R2L:
        return layout.vector(l=-1, gs=1)
    if kind == L2R:
        return layout.vector(r=-1, gs=1)
    if kind == "pos":
        return layout.vector(**{f"cm{counter}": -1, "gc": 1})
    if kind == "neg":
        return layout.vector(**{f"cp{counter}": -1, "gc": 1})
    raise ValueError(f"unknown blame kind {kind!r}")


def reset_weights(layout: DimensionLayout, role: str) -> tuple[int, ...]:
    w = [0] * layout.k
    w[layout.r] = 1
    for d in layout.counter_dims():
        w[d] = 1
    w[layout.gs] = -1
    w[layout.gc] = -1
    if role == "B":
        w[layout.x], w[layout.y] = -1, 1
    elif role == "C":
        w[layout.x], w[layout.y] = 1, -1
    elif role != "A":
        raise ValueError(f"unknown reset role {role!r}")
    return tuple(w)


def final_weights(layout: DimensionLayout) -> tuple[int, ...]:
    return layout.vector(x=-1)


def build_condition(layout: DimensionLayout) -> C.Condition:
    counters = [C.inf(d) for d in layout.counter_dims()]
    return C.conj(
        C.disj(C.conj(C.inf(layout.l), C.inf(layout.r)), C.sup(layout.gs)),
        C.disj(C.conj(*counters), C.sup(layout.gc)),
        C.sup(layout.x),
        C.sup(layout.y),
    )


# --- graph assembly -----------------------------------------------------

@dataclass(frozen=True)
class VertexTag:
    gadget: str               # reset, nop, inc, dec, zero-test, blame, final, stub
    role: str                 # A/B/C, loop, side, decide, c>0?, c<0?
    state: str | None = None  # machine state whose instruction is being simulated
    target: str | None = None
    direction: str | None = None
    counter: int | None = None
    blame: str | None = None
    entry_of: str | None = None
    prelude: bool = False

    @property
    def is_sim_loop(self) -> bool:
        return self.gadget in ("nop", "inc", "dec") and self.role == "loop"


@dataclass
class Gadget:
    vertices: list[int]
    entry: int
    loop_edge: int | None = None
    side: int | None = None


class GadgetAssembler:
    """Adds gadgets to a :class:`GraphBuilder`, recording a tag per vertex."""

    def __init__(self, layout: DimensionLayout):
        self.layout = layout
        self.builder = GraphBuilder(layout.k)
        self.tags: list[VertexTag] = []

    def vertex(self, owner: Player, tag: VertexTag, label: str) -> int:
        v = self.builder.vertex(owner, label)
        self.tags.append(tag)
        return v

    def edge(self, src, dst, tag, weights=None) -> int:
        return self.builder.edge(src, dst, weights, tag)

    def sim_gadget(self, op: str, direction: str, blame_target: int, counter: int = 1,
                   loop_vertex: int | None = None, tag: VertexTag | None = None) -> Gadget:
        """Loop vertex (player 1) + ``side?`` check (player 2); the ok edge is left to the caller."""
        if tag is None:
            tag = VertexTag(op, "loop", direction=direction, counter=counter)
        if loop_vertex is None:
            loop_vertex = self.vertex(Player.P1, tag, _label(tag))
        side_tag = VertexTag(tag.gadget, "side", tag.state, tag.target, direction,
                             tag.counter, prelude=tag.prelude)
        side = self.vertex(Player.P2, side_tag, _label(side_tag))
        loop = self.edge(loop_vertex, loop_vertex, "loop",
                         sim_loop_weights(self.layout, op, direction, counter))
        self.edge(loop_vertex, side, "exit")
        self.edge(side, blame_target, "blame")
        return Gadget([loop_vertex, side], loop_vertex, loop, side)

    def blame_gadget(self, kind: str, reset_target: int, counter: int = 1) -> Gadget:
        tag = VertexTag("blame", "loop", counter=counter if kind in ("pos", "neg") else None, blame=kind)
        v = self.vertex(Player.P2, tag, _label(tag))
        loop = self.edge(v, v, "loop", blame_weights(self.layout, kind, counter))
        self.edge(v, reset_target, "reset")
        return Gadget([v], v, loop)

    def reset_gadget(self) -> tuple[Gadget, Gadget, Gadget]:
        """Create A, B, C with their self-loops and the A->B, B->C edges; C's exit is wired later."""
        out = []
        for role, owner in (("A", Player.P2), ("B", Player.P1), ("C", Player.P1)):
            tag = VertexTag("reset", role)
            v = self.vertex(owner, tag, f"reset {role}")
            loop = self.edge(v, v, "loop", reset_weights(self.layout, role))
            out.append(Gadget([v], v, loop))
        self.edge(out[0].entry, out[1].entry, "exit")
        self.edge(out[1].entry, out[2].entry, "exit")
        return out[0], out[1], out[2]

    def final_sink(self, state: str) -> Gadget:
        tag = VertexTag("final", "loop", state=state, entry_of=state)
        v = self.vertex(Player.P2, tag, f"final {state}")
        loop = self.edge(v, v, "loop", final_weights(self.layout))
        return Gadget([v], v, loop)


def _label(tag: VertexTag) -> str:
    parts = [tag.gadget]
    if tag.direction:
        parts.append("l->r" if tag.direction == L2R else "r->l")
    if tag.blame:
        parts.append({"r2l": "r->l", "l2r": "l->r", "pos": "c>0", "neg": "c<0"}[tag.blame])
    if tag.counter and tag.gadget in ("inc", "dec", "zero-test", "blame"):
        parts.append(f"c{tag.counter}")
    if tag.role not in ("loop",):
        parts.append(tag.role)
    if tag.prelude:
        parts.append("prelude")
    if tag.state:
        parts.append(f"@{tag.state}")
    if tag.target:
        parts.append(f"->{tag.target}")
    return " ".join(parts)


@dataclass
class ReductionOutput:
    graph: GameGraph
    condition: C.Condition
    layout: DimensionLayout
    tags: tuple[VertexTag, ...]
    machine: TwoSidedMachine
    reset: tuple[int, int, int]
    prelude: int
    final: int
    entry: dict = field(default_factory=dict)
    blame: dict = field(default_factory=dict)

    def vertices_with(self, **fields) -> list[int]:
        return [v for v, t in enumerate(self.tags)
                if all(getattr(t, k) == val for k, val in fields.items())]


def expected_vertex_count(m: TwoSidedMachine) -> int:
    """Closed-form size: reset 3, prelude 2, final 1, blames 2 + 2c, 7 per zero test, 2 per other step."""
    per_state = sum(7 if isinstance(ins, LRBranch) else 2 for ins in m.instructions.values())
    return 3 + 2 + 1 + 2 + 2 * m.counter_count + per_state


def build_game(m: TwoSidedMachine) -> ReductionOutput:
    problems = validate(m)
    if problems:
        raise InvalidMachine(problems)
    layout = DimensionLayout.for_counters(m.counter_count)
    asm = GadgetAssembler(layout)
    A, B, Cg = asm.reset_gadget()
    blame = {}
    for kind in (R2L, L2R):
        blame[(kind, None)] = asm.blame_gadget(kind, A.entry).entry
    for j in range(1, m.counter_count + 1):
        for kind in ("pos", "neg"):
            blame[(kind, j)] = asm.blame_gadget(kind, A.entry, j).entry
    final = asm.final_sink(m.final).entry

    entry = {m.final: final}
    plan = {}
    for s in m.left_states + m.right_states:
        ins = m.instructions.get(s)
        if ins is None:
            continue
        if isinstance(ins, LRBranch):
            tag = VertexTag("zero-test", "decide", state=s, counter=ins.counter, entry_of=s)
            entry[s] = asm.vertex(Player.P1, tag, _label(tag))
        else:
            op, direction = _plain_step(ins)
            counter = getattr(ins, "counter", None)
            tag = VertexTag(op, "loop", state=s, target=ins.target, direction=direction,
                            counter=counter, entry_of=s)
            entry[s] = asm.vertex(Player.P1, tag, _label(tag))
        plan[s] = ins

    prelude_tag = VertexTag("nop", "loop", target=m.init, direction=R2L, prelude=True)
    prelude = asm.sim_gadget("nop", R2L, blame[(R2L, None)], tag=prelude_tag)
    asm.edge(Cg.entry, prelude.entry, "start")
    asm.edge(prelude.side, entry[m.init], "ok")

    for s, ins in plan.items():
        if isinstance(ins, LRBranch):
            _zero_test(asm, s, ins, entry, blame)
            continue
        op, direction = _plain_step(ins)
        counter = getattr(ins, "counter", 1)
        g = asm.sim_gadget(op, direction, blame[(direction, None)], counter,
                           loop_vertex=entry[s], tag=asm.tags[entry[s]])
        asm.edge(g.side, entry[ins.target], "ok")

    graph = asm.builder.build(initial=A.entry)
    return ReductionOutput(graph, build_condition(layout), layout, tuple(asm.tags), m,
                           (A.entry, B.entry, Cg.entry), prelude.entry, final, entry, blame)


def _plain_step(ins):
    if isinstance(ins, LRNop):
        return "nop", L2R
    if isinstance(ins, RLNop):
        return "nop", R2L
    if isinstance(ins, RLInc):
        return "inc", R2L
    raise TypeError(ins)


def _zero_test(asm: GadgetAssembler, q: str, ins: LRBranch, entry, blame):
    j = ins.counter
    decide = entry[q]
    check_pos = asm.vertex(Player.P2, VertexTag("zero-test", "c>0?", q, ins.on_zero, counter=j),
                           f"c{j}>0? @{q}")
    asm.edge(decide, check_pos, "declare-zero")
    asm.edge(check_pos, blame[("pos", j)], "blame")
    nop = asm.sim_gadget("nop", L2R, blame[(L2R, None)], j,
                         tag=VertexTag("nop", "loop", q, ins.on_zero, L2R, j))
    asm.edge(check_pos, nop.entry, "ok")
    asm.edge(nop.side, entry[ins.on_zero], "ok")

    dec = asm.sim_gadget("dec", L2R, blame[(L2R, None)], j,
                         tag=VertexTag("dec", "loop", q, ins.on_pos, L2R, j))
    asm.edge(decide, dec.entry, "declare-pos")
    check_neg = asm.vertex(Player.P2, VertexTag("zero-test", "c<0?", q, ins.on_pos, counter=j),
                           f"c{j}<0? @{q}")
    asm.edge(dec.side, check_neg, "ok")
    asm.edge(check_neg, entry[ins.on_pos], "ok")
    asm.edge(check_neg, blame[("neg", j)], "blame")


# --- standalone gadgets ---------------------------------------------------

@dataclass
class GadgetGraph:
    """A single gadget closed off with stub vertices so it forms a valid graph."""
    graph: GameGraph
    tags: tuple[VertexTag, ...]
    gadget: Gadget
    stubs: dict


def _standalone(layout, make) -> GadgetGraph:
    asm = GadgetAssembler(layout)
    stubs = {}

    def stub(name):
        if name not in stubs:
            v = asm.vertex(Player.P1, VertexTag("stub", name), name)
            asm.edge(v, v, "loop")
            stubs[name] = v
        return stubs[name]

    g = make(asm, stub)
    return GadgetGraph(asm.builder.build(initial=g.entry), tuple(asm.tags), g, stubs)


def _sim_standalone(op, direction, counter, counter_count):
    layout = DimensionLayout.for_counters(counter_count)

    def make(asm, stub):
        blame_t = stub("blame")
        cont = stub("continuation")
        g = asm.sim_gadget(op, direction, blame_t, counter)
        asm.edge(g.side, cont, "ok")
        return g

    return _standalone(layout, make)


def build_nop_gadget(direction: str, counter_count: int = 1) -> GadgetGraph:
    return _sim_standalone("nop", direction, 1, counter_count)


def build_inc_gadget(counter: int = 1, counter_count: int = 1) -> GadgetGraph:
    return _sim_standalone("inc", R2L, counter, counter_count)


def build_dec_gadget(counter: int = 1, counter_count: int = 1) -> GadgetGraph:
    return _sim_standalone("dec", L2R, counter, counter_count)


def build_blame_gadget(kind: str, counter: int = 1, counter_count: int = 1) -> GadgetGraph:
    layout = DimensionLayout.for_counters(counter_count)
    return _standalone(layout, lambda asm, stub: asm.blame_gadget(kind, stub("reset"), counter))


def build_reset_gadget(counter_count: int = 1) -> GadgetGraph:
    layout = DimensionLayout.for_counters(counter_count)

    def make(asm, stub):
        a, b, c = asm.reset_gadget()
        asm.edge(c.entry, stub("sim-entry"), "start")
        return Gadget(a.vertices + b.vertices + c.vertices, a.entry)

    return _standalone(layout, make)


def build_zero_test(q: str = "q", p: str = "p", p_prime: str = "p'", counter: int = 1,
                    counter_count: int = 1) -> GadgetGraph:
    layout = DimensionLayout.for_counters(counter_count)

    def make(asm, stub):
        entry = {p: stub(p), p_prime: stub(p_prime)}
        blame = {(L2R, None): stub("blame l->r")}
        blame[("pos", counter)] = stub("blame c>0")
        blame[("neg", counter)] = stub("blame c<0")
        tag = VertexTag("zero-test", "decide", state=q, counter=counter, entry_of=q)
        entry[q] = asm.vertex(Player.P1, tag, _label(tag))
        _zero_test(asm, q, LRBranch(p, p_prime, counter), entry, blame)
        return Gadget([], entry[q])

    return _standalone(layout, make)


def final_reachable(out: ReductionOutput) -> bool:
    """Whether the final sink is reachable from the prelude (the simulation entry)."""
    seen = {out.prelude}
    todo = [out.prelude]
    g = out.graph
    while todo:
        v = todo.pop()
        for e in g.out_edges(v):
            d = g.edges[e].dst
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return out.final in seen


def machine_final_reachable(m: TwoSidedMachine) -> bool:
    return m.final in reachable_states(m)
