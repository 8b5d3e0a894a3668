"""Command-line front end.

Exit codes: 0 success, 1 domain failure (invalid machine, failed checks,
evaluation errors), 2 usage or I/O problems.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .conditions import format_fraction
from .engine import EngineError, run_play
from .expressions import ExpressionError, eval_expr, parse_expr
from .game import DimensionOutOfRange, LimitVector, Player
from .machine import FIXTURES, MachineError, fixture_text, parse_machine, validate
from .monitors import (check_L1, check_L2_L5, check_L3, check_L4, check_L6, check_L7,
                       check_P2, summarize_outcome)
from .reduction import DimensionLayout, InvalidMachine, ReductionOutput, build_game
from .serialize import FormatError, read_game, read_trace, to_dot, write_game, write_trace
from .strategies import RefereeParams, UnknownStrategy, strategy_from_spec

LEMMAS = ("L1", "L2", "L3", "L4", "L5", "L6", "L7", "P2")
DEFAULT_DELTAS = ("1/11", "1/20", "1/40")


class UsageError(Exception):
    """Bad flags or unreadable input: exit code 2."""


class DomainFailure(Exception):
    """Valid request whose answer is a failure: exit code 1."""


def _read_text(path: str) -> str:
    if path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
        return fixture_text(name)
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_machine(path: str):
    try:
        return parse_machine(_read_text(path))
    except MachineError as exc:
        raise DomainFailure(f"{path}: {exc}") from None


def _compile(path: str) -> ReductionOutput:
    try:
        return build_game(_load_machine(path))
    except InvalidMachine as exc:
        raise DomainFailure("invalid machine:\n" + "\n".join(f"  {p}" for p in exc.problems)) from None


def _load_game(path: str) -> ReductionOutput:
    """A compiled graph file, or a machine file / fixture compiled on the fly."""
    if path.startswith("fixture:") or path.endswith(".tsm"):
        return _compile(path)
    text = _read_text(path)
    import io
    try:
        return read_game(io.StringIO(text))
    except FormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _open_out(path: str):
    try:
        return open(path, "w")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


# --- subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        m = parse_machine(_read_text(args.machine))
    except MachineError as exc:
        print(f"{args.machine}: {exc}")
        return 1
    problems = validate(m)
    for p in problems:
        print(p)
    if problems:
        return 1
    print(f"ok: {len(m.states)} states, {m.counter_count} counter(s)")
    return 0


def cmd_compile(args) -> int:
    out = _compile(args.machine)
    with _open_out(args.out) as fh:
        write_game(out, fh)
    if args.dot:
        with _open_out(args.dot) as fh:
            fh.write(to_dot(out))
    g = out.graph
    print(f"k={g.dimension_count} vertices={len(g.vertices)} edges={len(g.edges)} -> {args.out}")
    return 0


def _play(args, out: ReductionOutput):
    try:
        p1 = strategy_from_spec(args.p1, Player.P1, out.layout, args.halt_bound)
        p2 = strategy_from_spec(args.p2, Player.P2, out.layout, args.halt_bound)
    except UnknownStrategy as exc:
        raise UsageError(str(exc)) from None
    try:
        return run_play(out.graph, p1, p2, args.horizon, out.tags, out.layout.counter_count,
                        max_resets=args.max_resets)
    except EngineError as exc:
        raise DomainFailure(f"play aborted: {exc}") from None


def cmd_simulate(args) -> int:
    out = _load_game(args.graph)
    rec = _play(args, out)
    if args.trace:
        with _open_out(args.trace) as fh:
            write_trace(rec, fh, out.layout.names)
    summary = summarize_outcome(rec, out.condition)
    print(f"rounds: {rec.n} (stopped: {rec.stop_reason})")
    print(f"blames: {summary.blames}, resets: {len(rec.events_of('reset-enter'))}")
    if summary.limit is not None:
        names = out.layout.names
        print("limit averages: " + ", ".join(f"{n}={format_fraction(v)}"
                                             for n, v in zip(names, summary.limit.inf_avg)))
    print(summary.message)
    return 0


def _wanted(text: str) -> list[str]:
    wanted = []
    for item in text.replace(" ", "").split(","):
        item = item.upper()
        if item in ("L2/L5", "L2_L5"):
            item = "L2"
        if item not in LEMMAS:
            raise UsageError(f"unknown lemma {item!r}; choose from {', '.join(LEMMAS)}")
        if item == "L5":
            item = "L2"
        if item not in wanted:
            wanted.append(item)
    return wanted


def cmd_monitor(args) -> int:
    out = _load_game(args.graph)
    wanted = _wanted(args.lemmas)
    if args.trace:
        try:
            with open(args.trace) as fh:
                rec = read_trace(fh, out)
        except OSError as exc:
            raise UsageError(f"cannot read {args.trace}: {exc.strerror or exc}") from None
        except FormatError as exc:
            raise UsageError(f"{args.trace}: {exc}") from None
    else:
        rec = _play(args, out)
    needs_params = {"L1", "L2", "L3", "L4"} & set(wanted)
    if needs_params and args.halt_bound is None:
        raise UsageError("--halt-bound is required for " + ", ".join(sorted(needs_params)))
    params = RefereeParams(args.halt_bound) if args.halt_bound is not None else None
    reports = []
    for lemma in wanted:
        if lemma == "L1":
            reports.append(check_L1(rec, out, params))
        elif lemma == "L2":
            reports.append(check_L2_L5(rec, out, params))
        elif lemma == "L3":
            reports.append(check_L3(rec, out, params))
        elif lemma == "L4":
            reports.append(check_L4(rec, out, params))
        elif lemma == "L6":
            reports.append(check_L6(rec, out))
        elif lemma == "L7":
            reports.append(check_L7(rec, out))
        elif lemma == "P2":
            reports.extend(check_P2(rec, out, d) for d in (args.delta or [Fraction(d) for d in DEFAULT_DELTAS]))
    ok = True
    for rep in reports:
        print(rep.format() if args.verbose else _short(rep))
        ok = ok and rep.passed
    return 0 if ok else 1


def _short(rep) -> str:
    status = "pass" if rep.passed else "FAIL"
    line = f"{rep.lemma}: {status} ({len(rep.checks)} checks, {len(rep.vacuous)} vacuous)"
    bad = rep.first_failure
    if bad is not None:
        line += f"\n  first violation at round {bad.round}: {bad.instance}"
    return line


def cmd_expr_eval(args) -> int:
    names = DimensionLayout.for_counters(args.counters).names if args.counters else None
    text = _read_text(args.expr_file)
    try:
        e = parse_expr(text, names)
    except ExpressionError as exc:
        print(f"{args.expr_file}: {exc}")
        return 1
    values = args.lv
    if len(values) % 2:
        raise UsageError("the limit vector needs 2k rationals (k LimInf values, then k LimSup values)")
    k = len(values) // 2
    try:
        lv = LimitVector(tuple(values[:k]), tuple(values[k:]))
        print(format_fraction(eval_expr(e, lv)))
    except (DimensionOutOfRange, ValueError) as exc:
        print(f"error: {exc}")
        return 1
    return 0


def cmd_export(args) -> int:
    out = _load_game(args.graph)
    fh = _open_out(args.out) if args.out else sys.stdout
    try:
        if args.format == "dot":
            fh.write(to_dot(out))
        else:
            write_game(out, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


# --- parser ---------------------------------------------------------------------

def _add_play_flags(p, required: bool) -> None:
    p.add_argument("--p1", default="tau" if not required else None, required=required,
                   help="player-1 strategy: tau, cheat:IDX:DIR, loop:PHASE:FACTOR, stuck:B|C, random:SEED")
    p.add_argument("--p2", default="referee" if not required else None, required=required,
                   help="player-2 strategy: referee, never-blame, spurious[:F], mixed, stuck-blame, random:SEED")
    p.add_argument("--halt-bound", type=_positive_int, help="step bound N used by the referee")
    p.add_argument("--horizon", type=_positive_int, default=100_000)
    p.add_argument("--max-resets", type=_positive_int, help="stop after this many reset visits")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robustmp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a two-sided counter machine")
    p.add_argument("machine", help="machine file, or fixture:NAME")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="compile a machine into a game graph")
    p.add_argument("machine")
    p.add_argument("--out", required=True, help="graph file (JSON lines)")
    p.add_argument("--dot", help="also write Graphviz source here")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="play two strategies on a compiled game")
    p.add_argument("graph", help="graph file, machine file (.tsm) or fixture:NAME")
    _add_play_flags(p, required=False)
    p.add_argument("--trace", help="write the play trace here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monitor", help="check the simulation invariants on a play")
    p.add_argument("graph")
    p.add_argument("--trace", help="trace file from simulate; otherwise the play is run here")
    _add_play_flags(p, required=False)
    p.add_argument("--lemmas", default=",".join(l for l in LEMMAS if l != "L5"),
                   help="comma-separated subset of " + ", ".join(LEMMAS))
    p.add_argument("--delta", type=_fraction, action="append",
                   help="tolerance for P2 (repeatable; default 1/11, 1/20, 1/40)")
    p.add_argument("-v", "--verbose", action="store_true", help="print every check")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("expr", help="mean-payoff expressions")
    esub = p.add_subparsers(dest="expr_command", required=True)
    q = esub.add_parser("eval", help="evaluate an expression on a limit vector")
    q.add_argument("expr_file", help="file holding one expression")
    q.add_argument("lv", nargs="+", type=_fraction, metavar="Q",
                   help="2k rationals: LimInf of dims 0..k-1, then LimSup of dims 0..k-1")
    q.add_argument("--counters", type=int, choices=(1, 2),
                   help="accept dimension names of the one- or two-counter layout")
    q.set_defaults(func=cmd_expr_eval)

    p = sub.add_parser("export", help="re-export a compiled game")
    p.add_argument("graph")
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainFailure as exc:
        print(exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
