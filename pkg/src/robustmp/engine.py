"""Play two strategies against each other on a game graph.

Strategies answer with a :class:`Move`: an edge plus how many times to take
it.  Taking a self-loop ``k`` times costs O(1) regardless of ``k``, so plays
with astronomically many rounds (reset gadgets grow geometrically) stay cheap.
``times=None`` on a self-loop means "forever" and turns the play into a lasso.

The record keeps one :class:`Segment` per move (consecutive moves along the
same self-loop are merged) plus a list of gadget-boundary :class:`Event` s
derived from the reduction's vertex tags.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol, Sequence

from .game import GameGraph, Player, add_vectors


class EngineError(Exception):
    pass


class StrategyReturnedNonEdge(EngineError):
    pass


class EmptyPlay(EngineError):
    pass


@dataclass(frozen=True)
class Move:
    edge: int
    times: int | None = 1


class Strategy(Protocol):
    def choose(self, view: "PlayView") -> Move | int: ...


@dataclass(frozen=True)
class SegmentContext:
    reset_visit: int
    sim_index: int | None
    steps: int
    counters: tuple[int, ...]


@dataclass
class Segment:
    edge: int
    count: int
    start_round: int
    start_totals: tuple[int, ...]
    ctx: SegmentContext

    @property
    def end_round(self) -> int:
        return self.start_round + self.count


@dataclass
class Event:
    round: int
    kind: str
    vertex: int
    totals: tuple[int, ...]
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Lasso:
    vertex: int
    edge: int
    stem_rounds: int


class PlayView:
    """Everything a strategy may look at: totals, round count and simulation bookkeeping."""

    def __init__(self, graph: GameGraph, tags=None, counter_count: int = 1):
        self.graph = graph
        self.tags = tags
        self.vertex = graph.initial
        self.totals: tuple[int, ...] = (0,) * graph.dimension_count
        self.n = 0
        self.rounds_in_loop = 0
        self.arrival_totals = self.totals
        self.arrival_round = 0
        self.reset_visits = 0
        self.in_sim = False
        self.sim_index = 0
        self.sim_steps = 0
        self.checks_in_sim = 0
        self.counters: tuple[int, ...] = (0,) * counter_count
        self.machine_state: str | None = None
        self.zero_tests = 0
        self.loop_phases = 0
        self.sim_entry_totals: tuple[int, ...] | None = None
        self.sim_entry_round: int | None = None
        self.last_blame_exit: tuple[int, tuple[int, ...]] | None = None

    @property
    def tag(self):
        return self.tags[self.vertex] if self.tags is not None else None

    @property
    def owner(self) -> Player:
        return self.graph.owner(self.vertex)

    def avg(self, dim: int) -> Fraction:
        return Fraction(self.totals[dim], self.n) if self.n else Fraction(0)

    def context(self) -> SegmentContext:
        return SegmentContext(self.reset_visits, self.sim_index if self.in_sim else None,
                              self.sim_steps, self.counters)

    def self_loop(self) -> int | None:
        return self.graph.self_loop(self.vertex)

    def exits(self) -> list[int]:
        return self.graph.exits(self.vertex)

    def exit_tagged(self, tag: str) -> int:
        for e in self.graph.out_edges(self.vertex):
            if self.graph.edges[e].tag == tag and not self.graph.edges[e].is_loop:
                return e
        raise EngineError(f"vertex {self.vertex} has no {tag!r} edge")


@dataclass
class PlayRecord:
    graph: GameGraph
    tags: tuple | None
    horizon: int
    segments: list[Segment] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    n: int = 0
    totals: tuple[int, ...] = ()
    lasso: Lasso | None = None
    stop_reason: str = "horizon"
    _starts: list[int] = field(default_factory=list, repr=False)

    def totals_at(self, n: int) -> tuple[int, ...]:
        """Totals after ``n`` rounds; past the end of a lasso the loop is extended."""
        if n < 0:
            raise ValueError("negative round")
        if n > self.n:
            if self.lasso is None:
                raise ValueError(f"round {n} beyond the recorded {self.n} rounds")
            w = self.graph.edges[self.lasso.edge].weights
            return add_vectors(self.totals, w, n - self.n)
        if n == 0:
            return (0,) * self.graph.dimension_count
        i = bisect.bisect_left(self._starts, n) - 1
        seg = self.segments[i]
        w = self.graph.edges[seg.edge].weights
        return add_vectors(seg.start_totals, w, n - seg.start_round)

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    @property
    def moves(self) -> list[Move]:
        out = [Move(s.edge, s.count) for s in self.segments]
        if self.lasso is not None:
            out.append(Move(self.lasso.edge, None))
        return out


def _loop_or_none(tags, v):
    return tags[v] if tags is not None else None


def run_play(graph: GameGraph, p1, p2, horizon: int, tags=None, counter_count: int | None = None,
             max_resets: int | None = None, max_moves: int = 2_000_000) -> PlayRecord:
    """Alternate control by vertex owner for at most ``horizon`` rounds."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if counter_count is None:
        counter_count = _guess_counters(tags)
    view = PlayView(graph, tags, counter_count)
    rec = PlayRecord(graph, tags, horizon, totals=view.totals)
    tag0 = view.tag
    if tag0 is not None and tag0.gadget == "reset" and tag0.role == "A":
        view.reset_visits = 1
        rec.events.append(Event(0, "reset-enter", view.vertex, view.totals, {"i": 1}))
    moves = 0
    while view.n < horizon:
        if moves >= max_moves:
            rec.stop_reason = "max-moves"
            break
        moves += 1
        v = view.vertex
        strat = p1 if graph.owner(v) is Player.P1 else p2
        mv = strat.choose(view)
        if isinstance(mv, int):
            mv = Move(mv)
        if mv.edge not in graph.out_edges(v):
            raise StrategyReturnedNonEdge(f"edge {mv.edge} does not leave vertex {v}")
        e = graph.edges[mv.edge]
        if mv.times is None:
            if not e.is_loop:
                raise StrategyReturnedNonEdge("only a self-loop can be taken forever")
            rec.lasso = Lasso(v, e.id, view.n)
            rec.stop_reason = "lasso"
            break
        if mv.times < 1 or (not e.is_loop and mv.times != 1):
            raise StrategyReturnedNonEdge(f"bad repetition count {mv.times} for edge {e.id}")
        k = min(mv.times, horizon - view.n)
        _apply(view, rec, e, k)
        if max_resets is not None and view.reset_visits > max_resets:
            rec.stop_reason = "max-resets"
            break
    rec.n = view.n
    rec.totals = view.totals
    return rec


def _guess_counters(tags) -> int:
    if not tags:
        return 1
    return max([t.counter or 1 for t in tags] + [1])


def _apply(view: PlayView, rec: PlayRecord, e, k: int) -> None:
    segs = rec.segments
    if e.is_loop and segs and segs[-1].edge == e.id and segs[-1].end_round == view.n:
        segs[-1].count += k
    else:
        segs.append(Segment(e.id, k, view.n, view.totals, view.context()))
        rec._starts.append(view.n)
    view.totals = add_vectors(view.totals, e.weights, k)
    view.n += k
    if e.is_loop:
        view.rounds_in_loop += k
        return
    tags = view.tags
    src_tag = _loop_or_none(tags, e.src)
    loop_count = view.rounds_in_loop
    view.vertex = e.dst
    view.rounds_in_loop = 0
    view.arrival_totals = view.totals
    view.arrival_round = view.n
    if tags is None:
        return
    dst_tag = tags[e.dst]
    ev = rec.events

    def emit(event_kind, **info):
        ev.append(Event(view.n, event_kind, e.dst, view.totals, info))

    if src_tag.is_sim_loop and e.tag == "exit":
        if src_tag.gadget == "inc":
            c = list(view.counters)
            c[(src_tag.counter or 1) - 1] += 1
            view.counters = tuple(c)
        emit("loop-exit", count=loop_count, gadget=src_tag.gadget, vertex=e.src, sim=view.sim_index)
    if e.tag in ("declare-zero", "declare-pos"):
        view.zero_tests += 1
        j = src_tag.counter or 1
        if e.tag == "declare-pos":
            c = list(view.counters)
            c[j - 1] -= 1
            view.counters = tuple(c)
        emit("declare", zero=e.tag == "declare-zero", counter=j, index=view.zero_tests - 1,
             sim=view.sim_index)
    if e.tag == "blame":
        view.in_sim = False
        emit("blame", kind=dst_tag.blame, counter=dst_tag.counter, source=e.src,
             counters=view.counters, i=view.reset_visits, sim=view.sim_index, steps=view.sim_steps)
    if e.tag == "reset":
        view.last_blame_exit = (view.n, view.totals)
        emit("blame-exit", kind=src_tag.blame, counter=src_tag.counter, count=loop_count)
    if dst_tag.gadget == "reset" and dst_tag.role == "A":
        view.reset_visits += 1
        view.in_sim = False
        emit("reset-enter", i=view.reset_visits)
    if e.tag == "start":
        view.sim_index += 1
        view.in_sim = True
        view.sim_steps = 0
        view.checks_in_sim = 0
        view.counters = (0,) * len(view.counters)
        view.machine_state = None
        view.sim_entry_totals = view.totals
        view.sim_entry_round = view.n
        emit("sim-enter", sim=view.sim_index, i=view.reset_visits)
    if dst_tag.role in ("side", "c>0?", "c<0?") and view.in_sim:
        view.checks_in_sim += 1
    if dst_tag.is_sim_loop:
        view.loop_phases += 1
        emit("loop-start", phase=view.loop_phases - 1, gadget=dst_tag.gadget, sim=view.sim_index)
    if dst_tag.entry_of is not None and view.in_sim:
        view.sim_steps += 1
        view.machine_state = dst_tag.entry_of
        emit("state-enter", state=dst_tag.entry_of, steps=view.sim_steps, counters=view.counters,
             sim=view.sim_index, i=view.reset_visits)
        if dst_tag.gadget == "final":
            emit("final", state=dst_tag.entry_of)


class ScriptedStrategy:
    """Replays a fixed list of moves (both players can share one instance)."""

    def __init__(self, moves: Sequence[Move]):
        self.moves = list(moves)
        self.pos = 0

    def choose(self, view: PlayView) -> Move:
        if self.pos >= len(self.moves):
            raise EngineError("script exhausted")
        mv = self.moves[self.pos]
        self.pos += 1
        return mv


def replay(graph: GameGraph, moves: Sequence[Move], tags=None, counter_count: int | None = None,
           horizon: int | None = None) -> PlayRecord:
    total = sum(m.times for m in moves if m.times is not None)
    if any(m.times is None for m in moves):
        total += 1  # room to reach the final "forever" move
    script = ScriptedStrategy(moves)
    rec = run_play(graph, script, script, max(total, 1), tags, counter_count)
    if horizon is not None:
        rec.horizon = horizon
    return rec
