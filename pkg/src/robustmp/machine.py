"""Two-sided counter machines.

States are split into a left set and a right set.  Left states test (and
decrement) a counter and move right; right states may increment a counter and
move left.  The final state is a left state without an instruction.

DSL example::

    counters: 1
    left q0 q1 qf
    right p0
    init q0
    final qf
    q0: goto p0
    p0: inc c goto q1
    q1: if c=0 goto p0 else dec goto p0
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Union


class MachineError(Exception):
    pass


class MachineSyntaxError(MachineError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownState(MachineError):
    pass


class DuplicateInstruction(MachineError):
    pass


class SideViolation(MachineError):
    pass


class FinalStateHasNoStep(MachineError):
    pass


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class LRBranch:
    """``if c=0 goto on_zero else c -= 1 goto on_pos`` (left state)."""
    on_zero: str
    on_pos: str
    counter: int = 1


@dataclass(frozen=True)
class LRNop:
    target: str


@dataclass(frozen=True)
class RLInc:
    target: str
    counter: int = 1


@dataclass(frozen=True)
class RLNop:
    target: str


Instruction = Union[LRBranch, LRNop, RLInc, RLNop]
LEFT_FORMS = (LRBranch, LRNop)
RIGHT_FORMS = (RLInc, RLNop)


def targets(ins: Instruction) -> tuple[str, ...]:
    if isinstance(ins, LRBranch):
        return (ins.on_zero, ins.on_pos)
    return (ins.target,)


@dataclass(frozen=True)
class TwoSidedMachine:
    left_states: tuple[str, ...]
    right_states: tuple[str, ...]
    instructions: dict
    init: str
    final: str
    counter_count: int = 1

    def side(self, state: str) -> Side:
        if state in self.left_states:
            return Side.LEFT
        if state in self.right_states:
            return Side.RIGHT
        raise UnknownState(state)

    @property
    def states(self) -> tuple[str, ...]:
        return self.left_states + self.right_states


@dataclass(frozen=True)
class MachineConfig:
    state: str
    counters: tuple[int, ...]


def initial_config(m: TwoSidedMachine) -> MachineConfig:
    return MachineConfig(m.init, (0,) * m.counter_count)


def step(m: TwoSidedMachine, cfg: MachineConfig) -> MachineConfig:
    if cfg.state == m.final:
        raise FinalStateHasNoStep(cfg.state)
    ins = m.instructions[cfg.state]
    counters = list(cfg.counters)
    if isinstance(ins, LRBranch):
        j = ins.counter - 1
        if counters[j] == 0:
            return MachineConfig(ins.on_zero, cfg.counters)
        counters[j] -= 1
        return MachineConfig(ins.on_pos, tuple(counters))
    if isinstance(ins, RLInc):
        counters[ins.counter - 1] += 1
        return MachineConfig(ins.target, tuple(counters))
    return MachineConfig(ins.target, cfg.counters)


@dataclass
class RunResult:
    halted: bool
    steps_to_halt: int | None
    trace: list[MachineConfig]
    # (first step index of the repeated configuration, period) when one was seen
    cycle: tuple[int, int] | None = None


def run(m: TwoSidedMachine, max_steps: int, detect_cycle: bool = True) -> RunResult:
    """Iterate from the initial configuration; ``trace`` holds the configurations after each step."""
    cfg = initial_config(m)
    if cfg.state == m.final:
        return RunResult(True, 0, [])
    trace: list[MachineConfig] = []
    seen = {cfg: 0}
    cycle = None
    for n in range(1, max_steps + 1):
        cfg = step(m, cfg)
        trace.append(cfg)
        if cfg.state == m.final:
            return RunResult(True, n, trace)
        if detect_cycle and cycle is None:
            if cfg in seen:
                cycle = (seen[cfg], n - seen[cfg])
            else:
                seen[cfg] = n
    return RunResult(False, None, trace, cycle)


def validate(m: TwoSidedMachine) -> list[str]:
    problems = []
    names = m.left_states + m.right_states
    dup = sorted({s for s in names if names.count(s) > 1})
    for s in dup:
        problems.append(f"state {s} is declared more than once")
    if m.counter_count not in (1, 2):
        problems.append(f"counter count must be 1 or 2, got {m.counter_count}")
    if m.init not in m.left_states:
        problems.append(f"initial state {m.init} must be a left state")
    if m.final not in m.left_states:
        problems.append(f"final state {m.final} must be a left state")
    if m.final in m.instructions:
        problems.append(f"final state {m.final} must not have an instruction")
    for s in names:
        if s != m.final and s not in m.instructions:
            problems.append(f"state {s} has no instruction")
    for s, ins in m.instructions.items():
        if s not in names:
            problems.append(f"instruction for undeclared state {s}")
            continue
        side = Side.LEFT if s in m.left_states else Side.RIGHT
        if side is Side.LEFT and not isinstance(ins, LEFT_FORMS):
            problems.append(f"{s}: right-to-left instruction on a left state")
        if side is Side.RIGHT and not isinstance(ins, RIGHT_FORMS):
            problems.append(f"{s}: left-to-right instruction on a right state")
        want = m.right_states if side is Side.LEFT else m.left_states
        for t in targets(ins):
            if t not in names:
                problems.append(f"{s}: unknown target {t}")
            elif t not in want:
                kind = "right" if side is Side.LEFT else "left"
                problems.append(f"{s}: target must be a {kind} state (got {t})")
        c = getattr(ins, "counter", 1)
        if not 1 <= c <= m.counter_count:
            problems.append(f"{s}: counter index {c} exceeds counter count {m.counter_count}")
    return problems


def reachable_states(m: TwoSidedMachine) -> set[str]:
    seen = {m.init}
    todo = [m.init]
    while todo:
        s = todo.pop()
        ins = m.instructions.get(s)
        if ins is None:
            continue
        for t in targets(ins):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


# --- DSL ---------------------------------------------------------------

_NAME = r"[A-Za-z_][\w']*"
_CTR = r"c(\d*)"
_FORMS = [
    ("branch", re.compile(rf"if\s+{_CTR}\s*=\s*0\s+goto\s+({_NAME})\s+else\s+dec\s+goto\s+({_NAME})$")),
    ("inc", re.compile(rf"inc\s+{_CTR}\s+goto\s+({_NAME})$")),
    ("dec", re.compile(rf"dec\s+{_CTR}\s+goto\s+({_NAME})$")),
    ("goto", re.compile(rf"goto\s+({_NAME})$")),
]


def _counter_index(digits: str, counters: int, line: int) -> int:
    if digits == "":
        if counters != 1:
            raise MachineSyntaxError(line, "counter index required when counters: 2")
        return 1
    j = int(digits)
    if not 1 <= j <= counters:
        raise MachineSyntaxError(line, f"counter c{j} out of range")
    return j


def parse_machine(text: str) -> TwoSidedMachine:
    counters = None
    left: list[str] = []
    right: list[str] = []
    init = final = None
    pending: list[tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if line.startswith("counters:"):
            value = line[len("counters:"):].strip()
            if value not in ("1", "2"):
                raise MachineSyntaxError(lineno, "counters must be 1 or 2")
            counters = int(value)
        elif head in ("left", "right") and ":" not in head:
            names = rest.split()
            for n in names:
                if not re.fullmatch(_NAME, n):
                    raise MachineSyntaxError(lineno, f"bad state name {n!r}")
                if n in left or n in right:
                    raise MachineSyntaxError(lineno, f"state {n} declared twice")
            (left if head == "left" else right).extend(names)
        elif head in ("init", "final"):
            if not re.fullmatch(_NAME, rest):
                raise MachineSyntaxError(lineno, f"bad state name {rest!r}")
            if head == "init":
                init = rest
            else:
                final = rest
        elif ":" in line:
            state, _, body = line.partition(":")
            pending.append((lineno, state.strip(), " ".join(body.split())))
        else:
            raise MachineSyntaxError(lineno, f"unrecognised line {line!r}")
    if counters is None:
        raise MachineSyntaxError(0, "missing 'counters:' header")
    if init is None or final is None:
        raise MachineSyntaxError(0, "missing init or final declaration")
    for s in (init, final):
        if s not in left and s not in right:
            raise UnknownState(s)
    instructions: dict[str, Instruction] = {}
    for lineno, state, body in pending:
        if state not in left and state not in right:
            raise UnknownState(f"line {lineno}: {state}")
        if state in instructions:
            raise DuplicateInstruction(f"line {lineno}: {state}")
        ins = _parse_instruction(lineno, body, counters)
        is_left = state in left
        if not is_left and isinstance(ins, LRNop):
            ins = RLNop(ins.target)
        if is_left and not isinstance(ins, LEFT_FORMS) or not is_left and not isinstance(ins, RIGHT_FORMS):
            side = "left" if is_left else "right"
            raise SideViolation(f"line {lineno}: {body!r} is not allowed on {side} state {state}")
        for t in targets(ins):
            if t not in left and t not in right:
                raise UnknownState(f"line {lineno}: {t}")
        instructions[state] = ins
    return TwoSidedMachine(tuple(left), tuple(right), instructions, init, final, counters)


def _parse_instruction(lineno: int, body: str, counters: int):
    for kind, pattern in _FORMS:
        m = pattern.match(body)
        if not m:
            continue
        if kind == "branch":
            return LRBranch(m.group(2), m.group(3), _counter_index(m.group(1), counters, lineno))
        if kind == "inc":
            return RLInc(m.group(2), _counter_index(m.group(1), counters, lineno))
        if kind == "dec":
            # a bare decrement has no two-sided form; report it as a side error
            raise SideViolation(f"line {lineno}: decrement is only allowed inside a left-state zero test")
        return LRNop(m.group(1))
    raise MachineSyntaxError(lineno, f"unrecognised instruction {body!r}")


def format_machine(m: TwoSidedMachine) -> str:
    def ctr(j):
        return "c" if m.counter_count == 1 else f"c{j}"

    lines = [f"counters: {m.counter_count}",
             "left " + " ".join(m.left_states),
             "right " + " ".join(m.right_states),
             f"init {m.init}",
             f"final {m.final}"]
    for s in m.left_states + m.right_states:
        ins = m.instructions.get(s)
        if ins is None:
            continue
        if isinstance(ins, LRBranch):
            body = f"if {ctr(ins.counter)}=0 goto {ins.on_zero} else dec goto {ins.on_pos}"
        elif isinstance(ins, RLInc):
            body = f"inc {ctr(ins.counter)} goto {ins.target}"
        else:
            body = f"goto {ins.target}"
        lines.append(f"{s}: {body}")
    return "\n".join(lines) + "\n"


FIXTURES = ("m_halt", "m_loop", "m_zero", "m_halt2", "m_loop2")


def fixture_text(name: str) -> str:
    return resources.files("robustmp.fixtures").joinpath(f"{name}.tsm").read_text()


def load_fixture(name: str) -> TwoSidedMachine:
    return parse_machine(fixture_text(name))


# --- standard machines -------------------------------------------------

@dataclass(frozen=True)
class Inc:
    counter: int
    next: str


@dataclass(frozen=True)
class JzDec:
    """``if c=0 goto on_zero else c -= 1 goto on_pos``."""
    counter: int
    on_zero: str
    on_pos: str


@dataclass(frozen=True)
class Goto:
    next: str


@dataclass
class StandardMachine:
    instructions: dict
    init: str
    halt: str
    counter_count: int = 2

    def successors(self, state: str) -> tuple[str, ...]:
        ins = self.instructions.get(state)
        if ins is None:
            return ()
        if isinstance(ins, JzDec):
            return (ins.on_zero, ins.on_pos)
        return (ins.next,)


def run_standard(sm: StandardMachine, max_steps: int) -> tuple[bool, int | None]:
    state, counters = sm.init, [0] * sm.counter_count
    for n in range(max_steps + 1):
        if state == sm.halt:
            return True, n
        if n == max_steps:
            break
        ins = sm.instructions[state]
        if isinstance(ins, Inc):
            counters[ins.counter - 1] += 1
            state = ins.next
        elif isinstance(ins, JzDec):
            if counters[ins.counter - 1] == 0:
                state = ins.on_zero
            else:
                counters[ins.counter - 1] -= 1
                state = ins.on_pos
        else:
            state = ins.next
    return False, None


def convert_minsky(sm: StandardMachine) -> TwoSidedMachine:
    """Alternate sides by inserting nop bridge states where two moves land on one side.

    Increments live on right states, zero tests and plain jumps on left states,
    and the halt state is left.  A transition that would stay on one side is
    routed through a fresh copy of its target on the other side
    (``name__l`` / ``name__r``) holding a single nop.
    """
    side: dict[str, Side] = {}
    for s, ins in sm.instructions.items():
        side[s] = Side.RIGHT if isinstance(ins, Inc) else Side.LEFT
    side[sm.halt] = Side.LEFT
    instructions: dict[str, Instruction] = {}
    bridges: dict[str, Side] = {}

    def route(src_side: Side, t: str) -> str:
        if side[t] is not src_side:
            return t
        bridge = t + ("__r" if src_side is Side.LEFT else "__l")
        if bridge not in bridges:
            bridges[bridge] = Side.RIGHT if src_side is Side.LEFT else Side.LEFT
            instructions[bridge] = RLNop(t) if src_side is Side.LEFT else LRNop(t)
        return bridge

    for s, ins in sm.instructions.items():
        if s == sm.halt:
            continue
        if isinstance(ins, Inc):
            instructions[s] = RLInc(route(Side.RIGHT, ins.next), ins.counter)
        elif isinstance(ins, JzDec):
            instructions[s] = LRBranch(route(Side.LEFT, ins.on_zero),
                                       route(Side.LEFT, ins.on_pos), ins.counter)
        else:
            instructions[s] = LRNop(route(Side.LEFT, ins.next))
    init = sm.init
    if side[init] is Side.RIGHT:
        init = route(Side.RIGHT, init)
    all_side = dict(side)
    all_side.update(bridges)
    order = list(sm.instructions) + [sm.halt] + list(bridges)
    seen = set()
    left, right = [], []
    for s in order:
        if s in seen:
            continue
        seen.add(s)
        (left if all_side[s] is Side.LEFT else right).append(s)
    return TwoSidedMachine(tuple(left), tuple(right), instructions, init, sm.halt, sm.counter_count)
