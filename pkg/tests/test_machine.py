import pytest

from robustmp.machine import (FIXTURES, DuplicateInstruction, FinalStateHasNoStep, Goto, Inc, JzDec,
                              LRBranch, MachineConfig, MachineSyntaxError, RLInc, RLNop, Side,
                              SideViolation, StandardMachine, UnknownState, convert_minsky,
                              format_machine, initial_config, load_fixture, parse_machine, run,
                              run_standard, step, validate)

HEADER = "counters: 1\nleft q0 qf\nright p0\ninit q0\nfinal qf\n"


def test_fixtures_are_valid():
    for name in FIXTURES:
        m = load_fixture(name)
        assert validate(m) == [], name


@pytest.mark.parametrize("name,steps", [("m_halt", 6), ("m_zero", 4), ("m_halt2", 8)])
def test_halting_fixtures(name, steps):
    res = run(load_fixture(name), 1000)
    assert res.halted and res.steps_to_halt == steps
    assert len(res.trace) == steps


@pytest.mark.parametrize("name,cycle", [("m_loop", (2, 2)), ("m_loop2", (1, 4))])
def test_looping_fixtures(name, cycle):
    res = run(load_fixture(name), 200)
    assert not res.halted and res.steps_to_halt is None
    assert res.cycle == cycle


def test_run_zero_steps_has_empty_trace():
    res = run(load_fixture("m_halt"), 0)
    assert res.trace == [] and not res.halted


def test_step_semantics():
    m = parse_machine(HEADER + "q0: if c=0 goto p0 else dec goto p0\np0: inc c goto q0\n")
    cfg = initial_config(m)
    cfg = step(m, cfg)
    assert cfg == MachineConfig("p0", (0,))
    cfg = step(m, cfg)
    assert cfg == MachineConfig("q0", (1,))
    assert step(m, cfg) == MachineConfig("p0", (0,))
    with pytest.raises(FinalStateHasNoStep):
        step(m, MachineConfig("qf", (0,)))


def test_right_goto_is_right_nop():
    m = parse_machine(HEADER + "q0: goto p0\np0: goto qf\n")
    assert isinstance(m.instructions["p0"], RLNop)
    assert m.side("p0") is Side.RIGHT


@pytest.mark.parametrize("body,exc", [
    ("q0: inc c goto p0\np0: goto qf\n", SideViolation),
    ("q0: goto p0\np0: if c=0 goto qf else dec goto qf\n", SideViolation),
    ("q0: dec c goto p0\np0: goto qf\n", SideViolation),
    ("q0: goto p9\np0: goto qf\n", UnknownState),
    ("q0: goto p0\nq0: goto p0\np0: goto qf\n", DuplicateInstruction),
    ("q0: jump p0\n", MachineSyntaxError),
])
def test_parse_errors(body, exc):
    with pytest.raises(exc):
        parse_machine(HEADER + body)


def test_validate_reports_wrong_target_side():
    m = parse_machine(HEADER + "q0: goto qf\np0: goto qf\n")
    problems = validate(m)
    assert len(problems) == 1 and "right state" in problems[0]


def test_format_roundtrip():
    for name in FIXTURES:
        m = load_fixture(name)
        assert parse_machine(format_machine(m)) == m


def test_convert_minsky_preserves_halting():
    # c1 := 2; move c1 into c2; halt
    sm = StandardMachine({
        "a": Inc(1, "b"), "b": Inc(1, "t"),
        "t": JzDec(1, "h", "u"), "u": Inc(2, "t"),
    }, init="a", halt="h")
    halted, steps = run_standard(sm, 100)
    assert halted and steps == 7
    m = convert_minsky(sm)
    assert validate(m) == []
    res = run(m, 100)
    assert res.halted
    assert res.trace[-1].counters == (0, 2)
    assert m.init.endswith("__l")


def test_convert_minsky_keeps_divergence():
    sm = StandardMachine({"a": Inc(1, "b"), "b": Goto("a")}, init="a", halt="h")
    assert run_standard(sm, 50) == (False, None)
    assert not run(convert_minsky(sm), 50).halted


def random_standard(rng, size):
    names = [f"s{i}" for i in range(size)]
    targets = names + ["h"]
    ins = {}
    for s in names:
        roll = rng.random()
        if roll < 0.4:
            ins[s] = Inc(rng.randint(1, 2), rng.choice(targets))
        elif roll < 0.8:
            ins[s] = JzDec(rng.randint(1, 2), rng.choice(targets), rng.choice(targets))
        else:
            ins[s] = Goto(rng.choice(targets))
    return StandardMachine(ins, "s0", "h")


def test_convert_minsky_corpus():
    import random
    rng = random.Random(17)
    T = 60
    checked = 0
    while checked < 12:
        sm = random_standard(rng, rng.randint(2, 6))
        m = convert_minsky(sm)
        assert validate(m) == []
        # each standard step takes one or two two-sided steps
        for bound in (T, 2 * T):
            halted, _ = run_standard(sm, bound)
            if halted:
                assert run(m, 2 * bound).halted
            else:
                assert not run(m, bound).halted
        checked += 1
