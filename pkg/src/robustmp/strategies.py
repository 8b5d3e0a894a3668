"""Player strategies for compiled games.

All strategies read the engine's :class:`~robustmp.engine.PlayView` (totals,
round count, reset-visit count, declared counter values) rather than the
raw history, and answer with a :class:`~robustmp.engine.Move`.  Loop lengths
are decided in one go: the strategy returns how many more traversals it
wants, and is asked again only when the engine needs a fresh decision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from . import linear as lin
from .engine import Move, PlayView
from .game import Player
from .reduction import L2R, R2L, DimensionLayout


class StrategyError(Exception):
    pass


class NotAPlayer1Vertex(StrategyError):
    pass


class NotAPlayer2Vertex(StrategyError):
    pass


class UnknownStrategy(StrategyError):
    pass


# --- constants ----------------------------------------------------------

@dataclass(frozen=True)
class RefereeParams:
    """Constants derived from the halting bound ``N`` of the simulated machine."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N <= 10:
            raise ValueError(f"halt bound must be an integer above 10, got {self.N!r}")

    @property
    def eps(self) -> Fraction:
        return Fraction(1, (self.N + 1) ** 2)

    @property
    def delta(self) -> Fraction:
        return 1 / (Fraction(1, 2) + self.N * (1 + 2 * self.eps))

    @property
    def l1_delta(self) -> Fraction:
        """Bound on Avg(g_s) during the first N steps.

        ``Avg(g_s) <= -1/2`` at entry bounds the earlier rounds by ``2|g_s|``,
        which gives ``1 / (2 + N(1 + 2 eps))``.
        """
        return 1 / (2 + self.N * (1 + 2 * self.eps))

    @property
    def gamma_side(self) -> Fraction:
        e, d = self.eps, self.delta
        return min(e * d / 2, (e / 4) / (1 + 1 / d - e / 4))

    @property
    def gamma_counter(self) -> Fraction:
        return min(Fraction(1, 20 * self.N), self.delta / 8)

    @property
    def min_scale(self) -> int:
        """Smallest |g_s| the referee accepts at reset; keeps blame loop counts integral."""
        return 8 * (self.N + 1) ** 2

    @property
    def wiring_lookahead(self) -> int:
        """Zero-weight rounds between leaving A and completing N steps (3 + 4 per step)."""
        return 3 + 4 * self.N


def eps_i(i: int) -> Fraction:
    return Fraction(1, i + 10)


# --- invariants -----------------------------------------------------------

def absg(totals, dim: int) -> int:
    return abs(totals[dim])


def reset_ratio_constraints(layout: DimensionLayout, tol: Fraction) -> list[lin.Ge]:
    """``r ~ |g_s|``, ``l ~ 0`` and every counter dim ``~ |g_c|`` within relative ``tol``.

    Written with ``|g| = -g``, which is exact whenever the guards are negative.
    """
    gs, gc = layout.gs, layout.gc
    out = [
        lin.ge({layout.r: 1, gs: 1 - tol}, label="r >= (1-t)|gs|"),
        lin.ge({layout.r: -1, gs: -(1 + tol)}, label="r <= (1+t)|gs|"),
        lin.ge({layout.l: 1, gs: -tol}, label="l >= -t|gs|"),
        lin.ge({layout.l: -1, gs: -tol}, label="l <= t|gs|"),
    ]
    for d in layout.counter_dims():
        name = layout.names[d]
        out.append(lin.ge({d: 1, gc: 1 - tol}, label=f"{name} >= (1-t)|gc|"))
        out.append(lin.ge({d: -1, gc: -(1 + tol)}, label=f"{name} <= (1+t)|gc|"))
    return out


def guard_constraints(layout: DimensionLayout) -> list[lin.Ge]:
    return [lin.avg_le(layout.gs, Fraction(-1, 2), label="Avg(gs) <= -1/2"),
            lin.avg_le(layout.gc, Fraction(-1, 2), label="Avg(gc) <= -1/2")]


def reset_invariants_hold(layout: DimensionLayout, totals, n: int, tol: Fraction) -> bool:
    if n == 0:
        return False
    cons = reset_ratio_constraints(layout, tol) + guard_constraints(layout)
    return all(c.holds(totals, n) for c in cons)


def lr_violations(layout: DimensionLayout, totals, left: bool, eps: Fraction) -> list[str]:
    """Which of the four side-invariant inequalities fail, in the order (i)..(iv).

    For a left state the own-side dimension is ``l`` and the other is ``r``;
    for a right state the roles swap.
    """
    G = absg(totals, layout.gs)
    own, other = (layout.l, layout.r) if left else (layout.r, layout.l)
    out = []
    if totals[own] < (1 - eps) * G:
        out.append("i")
    if totals[own] > (1 + eps) * G:
        out.append("ii")
    if totals[other] < -eps * G:
        out.append("iii")
    if totals[other] > eps * G:
        out.append("iv")
    return out


def side_blame_rounds(kind: str, layout: DimensionLayout, totals, eps: Fraction) -> int:
    """Loop count for a side blame, from the first violated inequality."""
    left = kind == R2L
    X = absg(totals, layout.gs)
    v = lr_violations(layout, totals, left, eps)
    if not v:
        return 2
    if v[0] == "i":
        return math.floor(X * (1 - eps / 2))
    if v[0] in ("ii", "iii"):
        return 2
    return math.floor(X * (1 - eps / 4))


def counter_blame_rounds(layout: DimensionLayout, totals, eps: Fraction) -> int:
    X = absg(totals, layout.gc)
    Y = absg(totals, layout.gs)
    return max(0, math.ceil(X * (1 + eps) - Fraction(Y, 4)))


# --- helpers --------------------------------------------------------------

def _loop_until(view: PlayView, want: int | None) -> Move:
    """Loop until ``want`` traversals of the current self-loop are done, then leave."""
    loop = view.self_loop()
    if want is not None and view.rounds_in_loop < want:
        return Move(loop, want - view.rounds_in_loop)
    return Move(view.exits()[0])


def _loop_min(view: PlayView, constraints, lookahead: int = 0) -> Move:
    loop = view.self_loop()
    w = view.graph.edges[loop].weights
    j = lin.min_loops(constraints, view.totals, view.n, w, lookahead)
    if j is None:
        raise StrategyError(f"constraints unreachable by looping at vertex {view.vertex}")
    if j > 0:
        return Move(loop, j)
    return Move(view.exits()[0])


# --- player 1 -------------------------------------------------------------

class Tau:
    """Honest simulation with per-visit tolerance ``eps_i = 1/(i+10)``."""

    def __init__(self, layout: DimensionLayout):
        self.layout = layout

    def choose(self, view: PlayView) -> Move:
        if view.owner is not Player.P1:
            raise NotAPlayer1Vertex(f"vertex {view.vertex} belongs to player 2")
        tag = view.tag
        if tag is None:
            raise StrategyError("tau needs the reduction's vertex tags")
        if tag.gadget == "reset":
            return self.reset_move(view, tag.role)
        if tag.is_sim_loop:
            return Move(*self.sim_move(view))
        if tag.role == "decide":
            return Move(view.exit_tagged(self.declare(view, tag.counter or 1)))
        return Move(view.exits()[0])

    def reset_move(self, view: PlayView, role: str) -> Move:
        L = self.layout
        if role == "B":
            return _loop_min(view, [lin.avg_ge(L.y, 0, label="Avg(y) >= 0")])
        tol = eps_i(max(view.reset_visits, 1)) / 4
        cons = reset_ratio_constraints(L, tol) + guard_constraints(L)
        cons.append(lin.avg_ge(L.x, 0, label="Avg(x) >= 0"))
        return _loop_min(view, cons, lookahead=1)

    def loop_length(self, view: PlayView) -> int:
        return absg(view.arrival_totals, self.layout.gs)

    def sim_move(self, view: PlayView) -> tuple[int, int]:
        want = self.loop_length(view)
        if view.rounds_in_loop < want:
            return view.self_loop(), want - view.rounds_in_loop
        return view.exits()[0], 1

    def declare(self, view: PlayView, counter: int) -> str:
        return "declare-zero" if view.counters[counter - 1] == 0 else "declare-pos"


class Cheat(Tau):
    """Tau, except that one zero test (global 0-based index) is answered dishonestly."""

    DIRECTIONS = ("zero-when-positive", "positive-when-zero")

    def __init__(self, layout: DimensionLayout, cheat_at: int, direction: str):
        super().__init__(layout)
        if direction not in self.DIRECTIONS:
            raise ValueError(f"direction must be one of {self.DIRECTIONS}")
        self.cheat_at = cheat_at
        self.direction = direction

    def declare(self, view: PlayView, counter: int) -> str:
        honest = super().declare(view, counter)
        if view.zero_tests != self.cheat_at:
            return honest
        if self.direction == "zero-when-positive" and honest == "declare-pos":
            return "declare-zero"
        if self.direction == "positive-when-zero" and honest == "declare-zero":
            return "declare-pos"
        return honest


class LoopStretch(Tau):
    """Tau, except that one simulation loop phase runs ``factor * |g_s|`` rounds."""

    def __init__(self, layout: DimensionLayout, phase: int, factor):
        super().__init__(layout)
        self.phase = phase
        self.factor = Fraction(factor)

    def loop_length(self, view: PlayView) -> int:
        base = super().loop_length(view)
        if view.loop_phases - 1 == self.phase:
            return math.floor(base * self.factor)
        return base


class StuckAtReset(Tau):
    """Tau until the given reset vertex (B or C), where it loops forever."""

    def __init__(self, layout: DimensionLayout, role: str = "B"):
        super().__init__(layout)
        self.role = role

    def reset_move(self, view: PlayView, role: str) -> Move:
        if role == self.role:
            return Move(view.self_loop(), None)
        return super().reset_move(view, role)


class RandomStrategy:
    """Uniform choice among outgoing edges, one round at a time."""

    def __init__(self, seed: int):
        self.seed = seed
        self.rng = random.Random(seed)

    def choose(self, view: PlayView) -> Move:
        out = view.graph.out_edges(view.vertex)
        if len(out) == 1:
            return Move(out[0])
        return Move(self.rng.choice(out))


# --- player 2 -------------------------------------------------------------

class Referee:
    """Keeps the reset invariants, blames every genuine violation, stays in the final sink."""

    def __init__(self, layout: DimensionLayout, params: RefereeParams):
        self.layout = layout
        self.params = params

    def reset_constraints(self) -> list[lin.Ge]:
        L, p = self.layout, self.params
        cons = reset_ratio_constraints(L, p.eps / 4) + guard_constraints(L)
        cons.append(lin.ge({L.gs: -1}, const=-p.min_scale, label="|gs| >= scale"))
        return cons

    def choose(self, view: PlayView) -> Move:
        if view.owner is not Player.P2:
            raise NotAPlayer2Vertex(f"vertex {view.vertex} belongs to player 1")
        tag = view.tag
        if tag is None:
            raise StrategyError("the referee needs the reduction's vertex tags")
        if tag.gadget == "final":
            return Move(view.self_loop(), None)
        if tag.gadget == "reset":
            return _loop_min(view, self.reset_constraints(), self.params.wiring_lookahead)
        if tag.gadget == "blame":
            return _loop_until(view, self.blame_rounds(view, tag))
        if tag.role == "side":
            left = tag.direction == R2L
            bad = lr_violations(self.layout, view.totals, left, self.params.eps)
            return Move(view.exit_tagged("blame" if bad else "ok"))
        if tag.role == "c>0?":
            return Move(view.exit_tagged("blame" if view.counters[tag.counter - 1] > 0 else "ok"))
        if tag.role == "c<0?":
            return Move(view.exit_tagged("blame" if view.counters[tag.counter - 1] < 0 else "ok"))
        return Move(view.exits()[0])

    def blame_rounds(self, view: PlayView, tag) -> int:
        t = view.arrival_totals
        if tag.blame in (R2L, L2R):
            return side_blame_rounds(tag.blame, self.layout, t, self.params.eps)
        return counter_blame_rounds(self.layout, t, self.params.eps)


class NeverBlame:
    """Never loops in A, never blames, stays in the final sink."""

    def __init__(self, layout: DimensionLayout):
        self.layout = layout

    def choose(self, view: PlayView) -> Move:
        tag = view.tag
        if tag.gadget == "final":
            return Move(view.self_loop(), None)
        if tag.role in ("side", "c>0?", "c<0?"):
            return Move(view.exit_tagged("ok"))
        return Move(view.exits()[0])


class SpuriousBlame:
    """Blames at the first check of every simulation and loops ``factor`` times the guard."""

    def __init__(self, layout: DimensionLayout, factor=2, forever: bool = False):
        self.layout = layout
        self.factor = Fraction(factor)
        self.forever = forever

    def blame_here(self, view: PlayView, tag, nth_check: int) -> bool:
        return nth_check == 0

    def reset_loops(self, view: PlayView) -> int:
        return 0

    def choose(self, view: PlayView) -> Move:
        tag = view.tag
        if tag.gadget == "final":
            return Move(view.self_loop(), None)
        if tag.gadget == "reset":
            return _loop_until(view, self.reset_loops(view))
        if tag.gadget == "blame":
            if self.forever:
                return Move(view.self_loop(), None)
            guard = self.layout.gs if tag.blame in (R2L, L2R) else self.layout.gc
            return _loop_until(view, math.floor(self.factor * absg(view.arrival_totals, guard)))
        if tag.role in ("side", "c>0?", "c<0?"):
            nth = view.checks_in_sim - 1
            return Move(view.exit_tagged("blame" if self.blame_here(view, tag, nth) else "ok"))
        return Move(view.exits()[0])


class MixedBlame(SpuriousBlame):
    """Rotates through three blame patterns by reset visit, with short A loops on even visits.

    visit % 3 == 1: blame the first check, loop 2x the guard
    visit % 3 == 2: blame the second check, loop half the guard
    visit % 3 == 0: blame the first counter check, loop 3x the guard
    """

    def __init__(self, layout: DimensionLayout):
        super().__init__(layout)

    def reset_loops(self, view: PlayView) -> int:
        return view.reset_visits if view.reset_visits % 2 == 0 else 0

    def blame_here(self, view, tag, nth_check):
        phase = view.reset_visits % 3
        if phase == 1:
            self.factor = Fraction(2)
            return nth_check == 0
        if phase == 2:
            self.factor = Fraction(1, 2)
            return nth_check == 1
        self.factor = Fraction(3)
        return tag.role in ("c>0?", "c<0?")


# --- construction by name ---------------------------------------------------

P1_NAMES = ("tau", "cheat:IDX:DIR", "loop:IDX:FACTOR", "random:SEED", "stuck:B|C")
P2_NAMES = ("referee", "never-blame", "spurious", "mixed", "stuck-blame", "random:SEED")


def strategy_from_spec(spec: str, player: Player, layout: DimensionLayout,
                       halt_bound: int | None = None):
    name, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    try:
        if name == "random":
            return RandomStrategy(int(args[0]) if args else 0)
        if player is Player.P1:
            if name == "tau" and not args:
                return Tau(layout)
            if name == "cheat" and len(args) == 2:
                return Cheat(layout, int(args[0]), args[1])
            if name == "loop" and len(args) == 2:
                return LoopStretch(layout, int(args[0]), Fraction(args[1]))
            if name == "stuck":
                return StuckAtReset(layout, args[0] if args else "B")
        else:
            if name == "referee" and not args:
                if halt_bound is None:
                    raise UnknownStrategy("the referee needs --halt-bound")
                return Referee(layout, RefereeParams(halt_bound))
            if name == "never-blame":
                return NeverBlame(layout)
            if name == "spurious":
                return SpuriousBlame(layout, Fraction(args[0]) if args else 2)
            if name == "mixed":
                return MixedBlame(layout)
            if name == "stuck-blame":
                return SpuriousBlame(layout, forever=True)
    except (ValueError, IndexError) as exc:
        raise UnknownStrategy(f"bad strategy spec {spec!r}: {exc}") from None
    raise UnknownStrategy(f"unknown strategy {spec!r} for {player.value}")
