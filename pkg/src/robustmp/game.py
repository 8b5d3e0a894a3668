"""Game graphs, finite plays and their averages.

Weights are integers and every average is an exact ``Fraction``; limits are
only ever computed for lasso plays, everything else is a finite-horizon
estimate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class GameError(Exception):
    pass


class InvalidGraph(GameError):
    pass


class EmptyPrefix(GameError):
    pass


class NotAClosedPath(GameError):
    pass


class DisconnectedStem(GameError):
    pass


class DimensionOutOfRange(GameError):
    pass


class CheckpointOutOfRange(GameError):
    pass


class Player(enum.Enum):
    P1 = "P1"
    P2 = "P2"


@dataclass(frozen=True)
class Vertex:
    id: int
    owner: Player
    label: str = ""


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int
    weights: tuple[int, ...]
    tag: str = ""

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst


class GameGraph:
    """Finite directed graph with an owner per vertex and a weight vector per edge.

    Immutable once built; use :class:`GraphBuilder` to assemble one.
    """

    def __init__(self, vertices: Sequence[Vertex], edges: Sequence[Edge],
                 dimension_count: int, initial: int):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.dimension_count = dimension_count
        self.initial = initial
        out: list[list[int]] = [[] for _ in self.vertices]
        for i, v in enumerate(self.vertices):
            if v.id != i:
                raise InvalidGraph(f"vertex ids must be 0..n-1, got {v.id} at {i}")
        for i, e in enumerate(self.edges):
            if e.id != i:
                raise InvalidGraph(f"edge ids must be 0..m-1, got {e.id} at {i}")
            if not (0 <= e.src < len(out) and 0 <= e.dst < len(out)):
                raise InvalidGraph(f"edge {i} references a missing vertex")
            if len(e.weights) != dimension_count:
                raise InvalidGraph(
                    f"edge {i} has {len(e.weights)} weights, expected {dimension_count}")
            if any(not isinstance(w, int) or isinstance(w, bool) for w in e.weights):
                raise InvalidGraph(f"edge {i} has non-integer weights")
            out[e.src].append(i)
        for v, succ in zip(self.vertices, out):
            if not succ:
                raise InvalidGraph(f"vertex {v.id} ({v.label}) has no outgoing edge")
        if not 0 <= initial < len(self.vertices):
            raise InvalidGraph("initial vertex out of range")
        self._out = tuple(tuple(s) for s in out)
        self._loop = tuple(
            next((i for i in s if self.edges[i].is_loop), None) for s in self._out)

    def out_edges(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    def self_loop(self, v: int) -> int | None:
        return self._loop[v]

    def owner(self, v: int) -> Player:
        return self.vertices[v].owner

    def edge_between(self, src: int, dst: int) -> Edge:
        found = [self.edges[i] for i in self._out[src] if self.edges[i].dst == dst]
        if len(found) != 1:
            raise GameError(f"expected exactly one edge {src}->{dst}, found {len(found)}")
        return found[0]

    def exits(self, v: int) -> list[int]:
        return [i for i in self._out[v] if not self.edges[i].is_loop]

    def __len__(self) -> int:
        return len(self.vertices)


class GraphBuilder:
    def __init__(self, dimension_count: int):
        self.dimension_count = dimension_count
        self._vertices: list[Vertex] = []
        self._edges: list[Edge] = []

    def vertex(self, owner: Player, label: str = "") -> int:
        vid = len(self._vertices)
        self._vertices.append(Vertex(vid, owner, label))
        return vid

    def edge(self, src: int, dst: int, weights: Sequence[int] | None = None, tag: str = "") -> int:
        w = tuple(weights) if weights is not None else (0,) * self.dimension_count
        eid = len(self._edges)
        self._edges.append(Edge(eid, src, dst, w, tag))
        return eid

    def build(self, initial: int = 0) -> GameGraph:
        return GameGraph(self._vertices, self._edges, self.dimension_count, initial)


def add_vectors(a: Sequence[int], b: Sequence[int], times: int = 1) -> tuple[int, ...]:
    return tuple(x + times * y for x, y in zip(a, b))


class PlayPrefix:
    """A finite path ``v0 e1 v1 ... en vn`` with incrementally maintained totals."""

    def __init__(self, graph: GameGraph, start: int, edges: Iterable[int] = ()):
        self.graph = graph
        self.start = start
        self._edges: list[int] = []
        self._vertices: list[int] = [start]
        self.totals: tuple[int, ...] = (0,) * graph.dimension_count
        for e in edges:
            self.append(e)

    @classmethod
    def from_vertices(cls, graph: GameGraph, vertices: Sequence[int]) -> "PlayPrefix":
        if not vertices:
            raise EmptyPrefix("a play prefix needs a start vertex")
        p = cls(graph, vertices[0])
        for a, b in zip(vertices, vertices[1:]):
            p.append(graph.edge_between(a, b).id)
        return p

    def append(self, edge_id: int) -> None:
        e = self.graph.edges[edge_id]
        if e.src != self._vertices[-1]:
            raise GameError(f"edge {edge_id} does not leave vertex {self._vertices[-1]}")
        self._edges.append(edge_id)
        self._vertices.append(e.dst)
        self.totals = add_vectors(self.totals, e.weights)

    @property
    def edges(self) -> tuple[int, ...]:
        return tuple(self._edges)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(self._vertices)

    @property
    def end(self) -> int:
        return self._vertices[-1]

    def __len__(self) -> int:
        return len(self._edges)

    def recompute_totals(self) -> tuple[int, ...]:
        t = (0,) * self.graph.dimension_count
        for e in self._edges:
            t = add_vectors(t, self.graph.edges[e].weights)
        return t


def avg_prefix(prefix: PlayPrefix) -> tuple[Fraction, ...]:
    n = len(prefix)
    if n == 0:
        raise EmptyPrefix("average of an empty prefix is undefined")
    return tuple(Fraction(t, n) for t in prefix.totals)


@dataclass(frozen=True)
class LimitVector:
    inf_avg: tuple[Fraction, ...]
    sup_avg: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.inf_avg) != len(self.sup_avg):
            raise ValueError("inf and sup vectors differ in length")
        for i, (a, b) in enumerate(zip(self.inf_avg, self.sup_avg)):
            if a > b:
                raise ValueError(f"inf_avg[{i}] = {a} exceeds sup_avg[{i}] = {b}")

    @property
    def k(self) -> int:
        return len(self.inf_avg)

    @classmethod
    def constant(cls, values: Sequence) -> "LimitVector":
        v = tuple(Fraction(x) for x in values)
        return cls(v, v)


def lasso_limits(stem: PlayPrefix, cycle: PlayPrefix) -> LimitVector:
    """Limit vector of ``stem . cycle^omega``; the stem never matters."""
    if len(cycle) == 0 or cycle.start != cycle.end:
        raise NotAClosedPath("cycle must be a nonempty closed path")
    if stem.end != cycle.start:
        raise DisconnectedStem(f"stem ends at {stem.end}, cycle starts at {cycle.start}")
    avg = avg_prefix(cycle)
    return LimitVector(avg, avg)


@dataclass
class LimitEstimate:
    checkpoints: list[int]
    averages: list[tuple[Fraction, ...]]
    running_min: list[tuple[Fraction, ...]]
    running_max: list[tuple[Fraction, ...]]

    def dim_series(self, d: int) -> list[Fraction]:
        return [a[d] for a in self.averages]


def estimate_from_totals(points: Sequence[tuple[int, Sequence[int]]]) -> LimitEstimate:
    """Build a report from ``(round, totals)`` pairs in increasing round order."""
    est = LimitEstimate([], [], [], [])
    for n, totals in points:
        avg = tuple(Fraction(t, n) for t in totals)
        if est.averages:
            lo = tuple(min(a, b) for a, b in zip(est.running_min[-1], avg))
            hi = tuple(max(a, b) for a, b in zip(est.running_max[-1], avg))
        else:
            lo = hi = avg
        est.checkpoints.append(n)
        est.averages.append(avg)
        est.running_min.append(lo)
        est.running_max.append(hi)
    return est


def estimate_limits(trace: PlayPrefix, checkpoints: Sequence[int]) -> LimitEstimate:
    prev = 0
    for c in checkpoints:
        if not 1 <= c <= len(trace):
            raise CheckpointOutOfRange(f"checkpoint {c} outside 1..{len(trace)}")
        if c <= prev:
            raise CheckpointOutOfRange("checkpoints must be strictly increasing")
        prev = c
    wanted = set(checkpoints)
    points = []
    totals = (0,) * trace.graph.dimension_count
    for n, e in enumerate(trace.edges, start=1):
        totals = add_vectors(totals, trace.graph.edges[e].weights)
        if n in wanted:
            points.append((n, totals))
    return estimate_from_totals(points)


def geometric_checkpoints(limit: int, extra: Iterable[int] = ()) -> list[int]:
    """Rounds 1, 2, 4, ... up to ``limit`` plus any extra rounds in range."""
    pts = set(r for r in extra if 1 <= r <= limit)
    r = 1
    while r <= limit:
        pts.add(r)
        r *= 2
    return sorted(pts)
