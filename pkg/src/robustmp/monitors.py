"""Runtime checks of the simulation invariants on recorded plays.

Each ``check_*`` function returns a :class:`LemmaReport`.  A check instance
either covers a single round (step boundaries, blame exits) or a whole range
of rounds; range checks are exact because every inequality is affine along a
self-loop (see :mod:`robustmp.linear`).  Instances whose precondition does not
hold on the play are listed as vacuous instead of being checked.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

from . import linear as lin
from .conditions import Condition, eval_condition, format_fraction, relax
from .engine import EmptyPlay, Event, PlayRecord
from .game import LimitVector, estimate_from_totals, geometric_checkpoints
from .machine import Side
from .reduction import L2R, R2L, ReductionOutput
from .strategies import (RefereeParams, eps_i, lr_violations, reset_invariants_hold)

HALF = Fraction(1, 2)


@dataclass
class Check:
    round: int
    instance: str
    passed: bool
    values: dict = field(default_factory=dict)


@dataclass
class LemmaReport:
    lemma: str
    checks: list[Check] = field(default_factory=list)
    vacuous: list[str] = field(default_factory=list)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def first_failure(self) -> Check | None:
        bad = self.failures
        return min(bad, key=lambda c: c.round) if bad else None

    def format(self) -> str:
        status = "pass" if self.passed else "FAIL"
        lines = [f"{self.lemma}: {status} ({len(self.checks)} checks, {len(self.vacuous)} vacuous)"]
        for c in self.checks:
            vals = ", ".join(f"{k}={format_fraction(v) if isinstance(v, (int, Fraction)) else v}"
                             for k, v in c.values.items())
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  {mark} round {c.round}: {c.instance}" + (f" [{vals}]" if vals else ""))
        for v in self.vacuous:
            lines.append(f"  vacuous: {v}")
        return "\n".join(lines)


# --- scanning helpers -------------------------------------------------------

def scan(rec: PlayRecord, pred, lo: int, hi: int) -> int | None:
    """First round in ``(lo, hi]`` at which ``pred`` fails, or ``None``.

    Rounds past the recorded end are allowed for lasso plays.
    """
    if hi <= lo:
        return None
    starts = [s.start_round for s in rec.segments]
    i = max(bisect.bisect_right(starts, lo) - 1, 0)
    for seg in rec.segments[i:]:
        if seg.start_round >= hi:
            break
        jlo = max(1, lo - seg.start_round + 1)
        jhi = min(seg.count, hi - seg.start_round)
        if jlo > jhi:
            continue
        w = rec.graph.edges[seg.edge].weights
        j = lin.first_failure(pred, seg.start_totals, seg.start_round, w, jlo, jhi)
        if j is not None:
            return seg.start_round + j
    if hi > rec.n and rec.lasso is not None:
        w = rec.graph.edges[rec.lasso.edge].weights
        jlo = max(1, lo - rec.n + 1)
        j = lin.first_failure(pred, rec.totals, rec.n, w, jlo, hi - rec.n)
        if j is not None:
            return rec.n + j
    return None


def avg(totals, n: int, dim: int) -> Fraction:
    return Fraction(totals[dim], n)


@dataclass
class SimWindow:
    entry: Event
    steps: list[Event] = field(default_factory=list)
    blame: Event | None = None
    end: int = 0

    @property
    def sim(self) -> int:
        return self.entry.info["sim"]

    @property
    def visit(self) -> int:
        return self.entry.info["i"]


def sim_windows(rec: PlayRecord) -> list[SimWindow]:
    wins: dict[int, SimWindow] = {}
    order = []
    for ev in rec.events:
        if ev.kind == "sim-enter":
            wins[ev.info["sim"]] = SimWindow(ev)
            order.append(ev.info["sim"])
        elif ev.kind == "state-enter":
            wins[ev.info["sim"]].steps.append(ev)
        elif ev.kind == "blame" and ev.info.get("sim") in wins:
            wins[ev.info["sim"]].blame = ev
    for s in order:
        w = wins[s]
        w.end = w.blame.round if w.blame else rec.n
    return [wins[s] for s in order]


def _is_left(out: ReductionOutput, state: str) -> bool:
    return out.machine.side(state) is Side.LEFT


def _lr_ok_until(out: ReductionOutput, win: SimWindow, eps: Fraction, max_steps: int | None):
    """Step-boundary events with intact side invariants, and the event that broke them (if any)."""
    good = []
    for st in win.steps:
        if max_steps is not None and st.info["steps"] > max_steps:
            break
        if lr_violations(out.layout, st.totals, _is_left(out, st.info["state"]), eps):
            return good, st
        good.append(st)
    return good, None


def _entry_ok(out: ReductionOutput, win: SimWindow, tol: Fraction) -> bool:
    return reset_invariants_hold(out.layout, win.entry.totals, win.entry.round, tol)


def _blame_exits(rec: PlayRecord) -> list[tuple[Event, Event | None]]:
    pairs = []
    pending = None
    for ev in rec.events:
        if ev.kind == "blame":
            pending = ev
        elif ev.kind == "blame-exit" and pending is not None:
            pairs.append((pending, ev))
            pending = None
    if pending is not None:
        pairs.append((pending, None))
    return pairs


# --- the checks ------------------------------------------------------------------

def check_L1(rec: PlayRecord, out: ReductionOutput, params: RefereeParams,
             delta: Fraction | None = None) -> LemmaReport:
    """Avg(g_s) stays at most -delta through the first N steps of each simulation."""
    delta = params.l1_delta if delta is None else Fraction(delta)
    rep = LemmaReport("L1")
    rep.add(Check(0, "delta <= 1/2", delta <= HALF, {"delta": delta}))
    gs = out.layout.gs
    pred = lin.avg_le(gs, -delta)
    for win in sim_windows(rec):
        e = win.entry
        if e.round == 0 or avg(e.totals, e.round, gs) > -HALF:
            rep.vacuous.append(f"sim {win.sim}: Avg(gs) > -1/2 at entry (round {e.round})")
            continue
        end = win.end
        good, broken = _lr_ok_until(out, win, params.eps, params.N)
        if broken is not None:
            end = min(end, broken.round)
        elif good and good[-1].info["steps"] == params.N:
            end = min(end, good[-1].round)
        bad = scan(rec, pred, e.round - 1, end)
        at = bad if bad is not None else end
        rep.add(Check(at, f"sim {win.sim}: Avg(gs) <= -delta on rounds {e.round}..{end}",
                      bad is None, {"Avg(gs)": avg(rec.totals_at(at), at, gs), "delta": delta}))
    return rep


def check_L2_L5(rec: PlayRecord, out: ReductionOutput, params: RefereeParams) -> LemmaReport:
    """At the exit of every genuine blame the blamed dimension is pushed below -gamma."""
    L = out.layout
    rep = LemmaReport("L2/L5")
    wins = {w.sim: w for w in sim_windows(rec)}
    for b, ex in _blame_exits(rec):
        kind, j = b.info["kind"], b.info["counter"]
        win = wins.get(b.info["sim"])
        where = f"blame {kind} at round {b.round}"
        if ex is None:
            rep.vacuous.append(f"{where}: no exit recorded")
            continue
        if win is None or not _entry_ok(out, win, params.eps / 4):
            rep.vacuous.append(f"{where}: reset invariants did not hold at simulation entry")
            continue
        good, broken = _lr_ok_until(out, win, params.eps, None)
        if broken is not None and broken.round <= b.round and kind not in (R2L, L2R):
            rep.vacuous.append(f"{where}: side invariants already broken")
            continue
        if b.info["steps"] + 1 > params.N:
            rep.vacuous.append(f"{where}: beyond the first N steps")
            continue
        if kind in (R2L, L2R):
            genuine = bool(lr_violations(L, b.totals, kind == R2L, params.eps))
        elif kind == "pos":
            genuine = b.info["counters"][j - 1] > 0
        else:
            genuine = b.info["counters"][j - 1] < 0
        if not genuine:
            rep.vacuous.append(f"{where}: no violation (spurious blame)")
            continue
        n, T = ex.round, ex.totals
        vals = {name: avg(T, n, L[name]) for name in ("l", "r", "gs", "gc")}
        if kind in (R2L, L2R):
            g = params.gamma_side
            ok = (min(vals["l"], vals["r"]) <= -g) and vals["gs"] <= -g and vals["gc"] <= -g
            text = f"{where}: (Avg(r) or Avg(l) <= -gamma) and Avg(gs), Avg(gc) <= -gamma"
        else:
            g = params.gamma_counter
            d = L.cminus(j) if kind == "pos" else L.cplus(j)
            vals[L.names[d]] = avg(T, n, d)
            ok = vals[L.names[d]] <= -g and vals["gs"] <= -g and vals["gc"] <= -g
            text = f"{where}: Avg({L.names[d]}), Avg(gs), Avg(gc) <= -gamma"
        vals["gamma"] = g
        rep.add(Check(n, text, ok, vals))
    return rep


def check_L3(rec: PlayRecord, out: ReductionOutput, params: RefereeParams) -> LemmaReport:
    """Every simulation loop phase lasts between (1-2eps)|g_s| and (1+2eps)|g_s| rounds."""
    eps = params.eps
    gs = out.layout.gs
    rep = LemmaReport("L3")
    starts = None
    for ev in rec.events:
        if ev.kind == "loop-start":
            starts = ev
        elif ev.kind == "loop-exit" and starts is not None:
            _band(rep, starts, ev.info["count"], abs(starts.totals[gs]), eps, ev.round)
            starts = None
    if starts is not None:
        G = abs(starts.totals[gs])
        running = rec.n - starts.round
        if rec.lasso is not None and rec.lasso.vertex == starts.vertex:
            rep.add(Check(starts.round, f"phase {starts.info['phase']}: loops forever", False, {"|gs|": G}))
        elif running > (1 + 2 * eps) * G:
            _band(rep, starts, running, G, eps, rec.n)
        else:
            rep.vacuous.append(f"phase {starts.info['phase']}: cut off by the horizon")
    return rep


def _band(rep, start, count, G, eps, at):
    lo, hi = (1 - 2 * eps) * G, (1 + 2 * eps) * G
    ok = lo <= count <= hi
    rep.add(Check(start.round if ok else at,
                  f"phase {start.info['phase']} ({start.info['gadget']}): loop count in band",
                  ok, {"count": count, "|gs|": G, "low": lo, "high": hi}))


def check_L4(rec: PlayRecord, out: ReductionOutput, params: RefereeParams) -> LemmaReport:
    """Counter dimensions stay below |g_c|(1+eps) +/- c|g_s| + |g_s|/2 during the first N steps."""
    L = out.layout
    eps = params.eps
    rep = LemmaReport("L4")
    for win in sim_windows(rec):
        if not _entry_ok(out, win, eps / 4):
            rep.vacuous.append(f"sim {win.sim}: reset invariants did not hold at entry")
            continue
        good, broken = _lr_ok_until(out, win, eps, params.N)
        if broken is not None:
            rep.vacuous.append(f"sim {win.sim}: side invariants broken at round {broken.round}")
        zero = (0,) * L.counter_count
        points = [(win.entry.round, win.entry.totals, zero, "entry")]
        points += [(st.round, st.totals, st.info["counters"], f"step {st.info['steps']}") for st in good]
        b = win.blame
        if b is not None and b.info["kind"] in ("pos", "neg") and broken is None and b.info["steps"] < params.N:
            # the dishonest counter value is visible here, before the next step boundary
            points.append((b.round, b.totals, b.info["counters"], f"blame {b.info['kind']}"))
        for n, T, counters, label in points:
            G, K = abs(T[L.gs]), abs(T[L.gc])
            for j in range(1, L.counter_count + 1):
                c = counters[j - 1]
                up = K * (1 + eps) + c * G + Fraction(G, 2)
                down = K * (1 + eps) - c * G + Fraction(G, 2)
                cp, cm = T[L.cplus(j)], T[L.cminus(j)]
                rep.add(Check(n, f"sim {win.sim} {label}: counter {j} bounds",
                              cp <= up and cm <= down,
                              {"c": c, "|gs|": G, "|gc|": K, "c+": cp, "bound+": up,
                               "c-": cm, "bound-": down}))
    return rep


def check_L6(rec: PlayRecord, out: ReductionOutput) -> LemmaReport:
    """Lower bounds kept by the honest strategy at every step boundary of every simulation."""
    L = out.layout
    rep = LemmaReport("L6")
    for win in sim_windows(rec):
        e = eps_i(win.visit)
        zero = (0,) * L.counter_count
        # at entry the reset has just loaded r, so the entry behaves like a right state
        points = [(win.entry.round, win.entry.totals, zero, False, "entry")]
        points += [(st.round, st.totals, st.info["counters"], _is_left(out, st.info["state"]),
                    f"step {st.info['steps']} ({st.info['state']})") for st in win.steps]
        for n, T, counters, left, label in points:
            G, K = abs(T[L.gs]), abs(T[L.gc])
            own, other = (L.l, L.r) if left else (L.r, L.l)
            ok = T[own] >= (1 - e) * G and T[other] >= -e * G
            vals = {"eps_i": e, "own": T[own], "other": T[other], "|gs|": G}
            for j in range(1, L.counter_count + 1):
                c = counters[j - 1]
                ok = ok and T[L.cplus(j)] >= (1 - e) * K + c * G
                ok = ok and T[L.cminus(j)] >= (1 - e) * K - c * G
            rep.add(Check(n, f"sim {win.sim} {label}: side and counter lower bounds", ok, vals))
    return rep


def _l7_pred(out: ReductionOutput, kind: str, counter, e: Fraction):
    L = out.layout
    if kind == R2L:
        dim, guard = L.l, L.gs
    elif kind == L2R:
        dim, guard = L.r, L.gs
    elif kind == "neg":
        dim, guard = L.cplus(counter), L.gc
    else:
        dim, guard = L.cminus(counter), L.gc
    # "Avg(dim) <= -e implies Avg(guard) >= -e"
    return lin.AnyOf((lin.avg_ge(dim, -e, strict=True), lin.avg_ge(guard, -e))), dim, guard


def check_L7(rec: PlayRecord, out: ReductionOutput, lasso_reach: int = 10 ** 6) -> LemmaReport:
    """Inside blame gadgets: whenever the blamed average is <= -eps_i, its guard average is >= -eps_i."""
    rep = LemmaReport("L7")
    for b, ex in _blame_exits(rec):
        e = eps_i(b.info["i"])
        pred, dim, guard = _l7_pred(out, b.info["kind"], b.info["counter"], e)
        if ex is not None:
            end = ex.round
        elif rec.lasso is not None:
            end = rec.n + lasso_reach * (rec.n + 1)
        else:
            end = rec.n
        bad = scan(rec, pred, b.round - 1, end)
        at = bad if bad is not None else end
        T = rec.totals_at(at)
        names = out.layout.names
        rep.add(Check(at, f"blame {b.info['kind']} at round {b.round}: rounds {b.round}..{end}",
                      bad is None, {"eps_i": e, f"Avg({names[dim]})": avg(T, at, dim),
                                    f"Avg({names[guard]})": avg(T, at, guard)}))
    if not rep.checks:
        rep.vacuous.append("no blame gadget visited")
    return rep


def check_L6_L7(rec: PlayRecord, out: ReductionOutput) -> tuple[LemmaReport, LemmaReport]:
    return check_L6(rec, out), check_L7(rec, out)


def first_visit_within(delta: Fraction) -> int:
    """Least reset visit ``i`` with ``eps_i <= delta``."""
    i = 1
    while eps_i(i) > delta:
        i += 1
    return i


def check_P2(rec: PlayRecord, out: ReductionOutput, delta) -> LemmaReport:
    """Round-level disjunction used against arbitrary player-2 behaviour.

    From the first simulation entered with ``eps_i <= delta`` (or the last
    simulation if the play never gets that far), at every round:

    * ``Avg(l) >= -delta and Avg(r) >= -delta``, or ``Avg(g_s) >= -delta`` now
      or at the most recent blame exit;
    * every counter average ``>= -delta``, or the same for ``g_c``.
    """
    delta = Fraction(delta)
    L = out.layout
    rep = LemmaReport(f"P2 delta={format_fraction(delta)}")
    wins = sim_windows(rec)
    if not wins:
        rep.vacuous.append("no simulation entered")
        return rep
    want = first_visit_within(delta)
    start = next((w for w in wins if w.visit >= want), None)
    if start is None:
        start = wins[-1]
        rep.vacuous.append(f"visit {want} not reached; checking from the last simulation (visit {start.visit})")
    side = lin.AllOf((lin.avg_ge(L.l, -delta), lin.avg_ge(L.r, -delta)))
    counters = lin.AllOf(tuple(lin.avg_ge(d, -delta) for d in L.counter_dims()))
    gs_ok = lin.avg_ge(L.gs, -delta)
    gc_ok = lin.avg_ge(L.gc, -delta)
    exits = [ev for ev in rec.events if ev.kind == "blame-exit"]
    lo = start.entry.round - 1
    bounds = [ev.round for ev in exits if ev.round > lo] + [rec.n]
    failures = {}
    prev_s = prev_c = False
    prior = [ev for ev in exits if ev.round <= lo]
    if prior:
        n, T = prior[-1].round, prior[-1].totals
        prev_s, prev_c = avg(T, n, L.gs) >= -delta, avg(T, n, L.gc) >= -delta
    cursor = lo
    for b in bounds:
        if b <= cursor:
            continue
        for label, pred, flag in (("side", lin.AnyOf((side, gs_ok)), prev_s),
                                  ("counter", lin.AnyOf((counters, gc_ok)), prev_c)):
            if flag or label in failures:
                continue
            bad = scan(rec, pred, cursor, b)
            if bad is not None:
                failures[label] = bad
        T = rec.totals_at(b)
        if b > 0:
            prev_s, prev_c = avg(T, b, L.gs) >= -delta, avg(T, b, L.gc) >= -delta
        cursor = b
    for label in ("side", "counter"):
        bad = failures.get(label)
        at = bad if bad is not None else rec.n
        rep.add(Check(at, f"{label} disjunction from round {start.entry.round} (visit {start.visit})",
                      bad is None, {"delta": delta}))
    return rep


# --- outcome summary ------------------------------------------------------

@dataclass
class Outcome:
    kind: str                       # "lasso" or "estimate"
    message: str
    limit: LimitVector | None = None
    condition_value: bool | None = None
    checkpoints: list[int] = field(default_factory=list)
    averages: list[tuple[Fraction, ...]] = field(default_factory=list)
    checkpoint_ok: list[bool] = field(default_factory=list)
    blames: int = 0


def lasso_limit(rec: PlayRecord) -> LimitVector:
    w = rec.graph.edges[rec.lasso.edge].weights
    return LimitVector.constant(w)


def summarize_outcome(rec: PlayRecord, condition: Condition, tolerance=Fraction(1, 100),
                      estimate_from: int | None = None) -> Outcome:
    """Exact verdict for lasso plays, checkpoint estimates otherwise.

    Estimates evaluate the condition with every threshold relaxed by
    ``tolerance`` on the constant limit vector given by the current averages,
    at checkpoints from the first simulation entry on (or ``estimate_from``).
    """
    blames = len(rec.events_of("blame"))
    if rec.lasso is not None:
        lv = lasso_limit(rec)
        value = eval_condition(condition, lv)
        tag = rec.tags[rec.lasso.vertex] if rec.tags else None
        where = "q_f" if tag is not None and tag.gadget == "final" else rec.graph.vertices[rec.lasso.vertex].label
        msg = f"lasso at {where}; condition: {'true' if value else 'false'}"
        return Outcome("lasso", msg, lv, value, blames=blames)
    if rec.n == 0:
        raise EmptyPlay("the play has no rounds")
    if estimate_from is None:
        entries = rec.events_of("sim-enter")
        estimate_from = entries[0].round if entries else 1
    extra = [ev.round for ev in rec.events]
    points = [p for p in geometric_checkpoints(rec.n, extra + [rec.n]) if p >= max(estimate_from, 1)]
    est = estimate_from_totals([(p, rec.totals_at(p)) for p in points])
    relaxed = relax(condition, Fraction(tolerance))
    ok = [eval_condition(relaxed, LimitVector.constant(a)) for a in est.averages]
    head = "no blame" if blames == 0 else f"{blames} blame{'s' if blames != 1 else ''}"
    if all(ok):
        tail = "satisfied at all checkpoints"
    else:
        tail = f"violated at {ok.count(False)} of {len(ok)} checkpoints"
    return Outcome("estimate", f"{head}; condition estimate: {tail}", None, None,
                   est.checkpoints, est.averages, ok, blames)


def halting_round_bound(params: RefereeParams, machine_steps: int) -> int:
    """Rounds until the final sink when both sides simulate honestly from a zero start.

    The referee's first reset loop is ``max(3 + 4N, 8(N+1)^2)`` long, every
    simulated step (the prelude included) loops that many rounds plus at most
    four wiring rounds, and three wiring rounds join A to the simulation.
    """
    g = max(params.wiring_lookahead, params.min_scale)
    return g + 3 + (machine_steps + 1) * (g + 4)
