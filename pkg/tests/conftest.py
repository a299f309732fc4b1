import math
from functools import partial

import pytest

from selfgoal.backend import ScriptedBackend
from selfgoal.environments.base import Observation, parse_action
from selfgoal.events import EventSink

# criterion number -> (passed, description); filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")


class StubGame:
    """Just enough of a game for agents driven directly by a test."""

    kind = "public_goods"
    setting = "game"
    goal = "Maximize your total token count."
    framing = "You play a repeated contribution game."

    def description(self):
        return self.framing


def pg_obs(t: int, text: str | None = None) -> Observation:
    return Observation(
        env="public_goods",
        round=t,
        text=text or f"Round {t}: the pot is open.",
        instruction="End with 'contribute <amount>'.",
        state={"endowment": 100.0},
        parse=partial(parse_action, "public_goods", endowment=100.0),
        default=0.0,
    )


def unit(*pairs, dim=8):
    """Vector with given (index, weight) entries, normalised."""
    v = [0.0] * dim
    for i, w in pairs:
        v[i] = w
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def scripted(replies, vectors=None, fallback="error", **kw):
    return ScriptedBackend(replies, embeddings=vectors, embedding_fallback=fallback, **kw)


def bind(agent, game=None, sink=None):
    sink = sink if sink is not None else EventSink()
    agent.bind(game or StubGame(), sink)
    agent.prepare()
    return sink


@pytest.fixture
def sink():
    return EventSink()
