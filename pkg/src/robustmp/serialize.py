"""File formats: compiled games, play traces and DOT export.

Graph and trace files are JSON lines.  Every line is an object with a
``type`` field; the first line is a header.  Integers are written exactly
(Python's json handles arbitrary size), rationals as ``"a/b"`` strings.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from typing import IO, Iterable

from .conditions import format_condition, format_fraction, parse_condition
from .engine import Move, PlayRecord, replay
from .game import Edge, GameGraph, Player, Vertex, geometric_checkpoints
from .machine import format_machine, parse_machine
from .reduction import DimensionLayout, ReductionOutput, VertexTag

GRAPH_FORMAT = "robustmp-graph"
TRACE_FORMAT = "robustmp-trace"
VERSION = 1


class FormatError(ValueError):
    pass


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if hasattr(value, "numerator") and not isinstance(value, (int, bool)):
        return format_fraction(value)
    return value


def game_lines(out: ReductionOutput) -> Iterable[dict]:
    g = out.graph
    yield {"type": "header", "format": GRAPH_FORMAT, "version": VERSION, "k": g.dimension_count,
           "dims": list(out.layout.names), "counters": out.layout.counter_count,
           "initial": g.initial, "vertices": len(g.vertices), "edges": len(g.edges),
           "reset": list(out.reset), "prelude": out.prelude, "final": out.final,
           "machine": format_machine(out.machine)}
    for v in g.vertices:
        yield {"type": "vertex", "id": v.id, "owner": v.owner.value, "label": v.label,
               "tag": {k: val for k, val in asdict(out.tags[v.id]).items() if val not in (None, False)}}
    for e in g.edges:
        yield {"type": "edge", "id": e.id, "src": e.src, "dst": e.dst,
               "weights": list(e.weights), "tag": e.tag}
    yield {"type": "condition", "text": format_condition(out.condition, out.layout.names)}


def write_game(out: ReductionOutput, fh: IO[str]) -> None:
    for line in game_lines(out):
        fh.write(json.dumps(line) + "\n")


def _read_lines(fh: IO[str], fmt: str) -> list[dict]:
    lines = []
    for i, raw in enumerate(fh, 1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            lines.append(json.loads(raw))
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {i}: {exc}") from None
    if not lines or lines[0].get("type") != "header" or lines[0].get("format") != fmt:
        raise FormatError(f"missing {fmt} header")
    if lines[0].get("version") != VERSION:
        raise FormatError(f"unsupported version {lines[0].get('version')}")
    return lines


def read_game(fh: IO[str]) -> ReductionOutput:
    lines = _read_lines(fh, GRAPH_FORMAT)
    head = lines[0]
    try:
        verts = sorted((d for d in lines if d["type"] == "vertex"), key=lambda d: d["id"])
        edges = sorted((d for d in lines if d["type"] == "edge"), key=lambda d: d["id"])
        cond = [d for d in lines if d["type"] == "condition"]
        layout = DimensionLayout(head["counters"], tuple(head["dims"]))
        graph = GameGraph([Vertex(d["id"], Player(d["owner"]), d.get("label", "")) for d in verts],
                          [Edge(d["id"], d["src"], d["dst"], tuple(d["weights"]), d.get("tag", ""))
                           for d in edges], head["k"], head["initial"])
        tags = tuple(VertexTag(**d["tag"]) for d in verts)
        condition = parse_condition(cond[0]["text"], layout.names)
        machine = parse_machine(head["machine"])
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed graph file: {exc}") from None
    entry = {t.entry_of: v for v, t in enumerate(tags) if t.entry_of is not None}
    blame = {(t.blame, t.counter): v for v, t in enumerate(tags) if t.gadget == "blame"}
    return ReductionOutput(graph, condition, layout, tags, machine, tuple(head["reset"]),
                           head["prelude"], head["final"], entry, blame)


def trace_lines(rec: PlayRecord, names=None) -> Iterable[dict]:
    yield {"type": "header", "format": TRACE_FORMAT, "version": VERSION, "horizon": rec.horizon,
           "rounds": rec.n, "stop": rec.stop_reason, "dims": list(names) if names else None}
    for m in rec.moves:
        yield {"type": "move", "edge": m.edge, "times": m.times}
    for ev in rec.events:
        yield {"type": "event", "round": ev.round, "kind": ev.kind, "vertex": ev.vertex,
               "totals": list(ev.totals), "info": _jsonable(ev.info)}
    if rec.n:
        for n in geometric_checkpoints(rec.n, [rec.n]):
            yield {"type": "checkpoint", "round": n, "totals": list(rec.totals_at(n))}


def write_trace(rec: PlayRecord, fh: IO[str], names=None) -> None:
    for line in trace_lines(rec, names):
        fh.write(json.dumps(line) + "\n")


def read_trace(fh: IO[str], out: ReductionOutput) -> PlayRecord:
    """Rebuild the full record by replaying the recorded moves on the game."""
    lines = _read_lines(fh, TRACE_FORMAT)
    head = lines[0]
    moves = [Move(d["edge"], d["times"]) for d in lines if d["type"] == "move"]
    if not moves:
        raise FormatError("trace has no moves")
    rec = replay(out.graph, moves, out.tags, out.layout.counter_count, head.get("horizon"))
    rec.stop_reason = head.get("stop", rec.stop_reason)
    if rec.n != head.get("rounds", rec.n):
        raise FormatError(f"trace replays to {rec.n} rounds, header says {head['rounds']}")
    return rec


def to_dot(out: ReductionOutput) -> str:
    """Graphviz source with one cluster per simulated state and per fixed gadget."""
    g = out.graph
    names = out.layout.names
    clusters: dict[str, list[int]] = {}
    for v, t in enumerate(out.tags):
        if t.prelude:
            key = "prelude"
        elif t.gadget in ("reset", "final"):
            key = t.gadget
        elif t.gadget == "blame":
            key = f"blame {t.blame}" + (f" c{t.counter}" if t.counter else "")
        else:
            key = f"state {t.state}"
        clusters.setdefault(key, []).append(v)
    lines = ["digraph game {", "  rankdir=LR;", '  node [fontname="Helvetica"];']
    for i, (key, vs) in enumerate(clusters.items()):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f'    label="{key}";')
        for v in vs:
            shape = "circle" if g.vertices[v].owner is Player.P1 else "box"
            lines.append(f'    v{v} [label="{g.vertices[v].label}", shape={shape}];')
        lines.append("  }")
    for e in g.edges:
        w = ", ".join(f"{names[d]}:{x:+d}" for d, x in enumerate(e.weights) if x)
        label = f"{e.tag} ({w})" if w else e.tag
        lines.append(f'  v{e.src} -> v{e.dst} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
