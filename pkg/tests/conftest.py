import functools

import pytest

from robustmp.engine import run_play
from robustmp.machine import load_fixture
from robustmp.reduction import build_game
from robustmp.strategies import Referee, RefereeParams, Tau

N = 11


@functools.lru_cache(maxsize=None)
def compiled(name):
    return build_game(load_fixture(name))


def honest_play(name, horizon=100_000):
    out = compiled(name)
    return out, run_play(out.graph, Tau(out.layout), Referee(out.layout, RefereeParams(N)),
                         horizon, out.tags)


@pytest.fixture
def params():
    return RefereeParams(N)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
