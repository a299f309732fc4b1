"""Guess 2/3 of the average: one simultaneous choice per repeat."""

from __future__ import annotations

import math
from functools import partial
from typing import Sequence

from ..errors import InvalidArgument
from .base import DEFAULT_ACTIONS, GameOutcome, Observation, fmt_number, load_framing, parse_action

GOAL = (
    "Choose a number that you believe will be closest to 2/3 of the average of all numbers "
    "chosen by players, including your selection."
)


def g23_winners(choices: Sequence[float]) -> tuple[list[int], float]:
    """Indices closest to two-thirds of the mean (ties all win), and that target."""
    if not choices:
        raise InvalidArgument("need at least one choice")
    clamped = [min(max(float(c), 0.0), 100.0) for c in choices]
    target = 2.0 / 3.0 * (math.fsum(clamped) / len(clamped))
    dist = [abs(c - target) for c in clamped]
    best = min(dist)
    return [i for i, d in enumerate(dist) if d == best], target


def level_k_choice(k: int) -> float:
    if k < 0:
        raise InvalidArgument("level k must be >= 0")
    return (2.0 / 3.0) ** k * 50.0


class GuessTwoThirdsGame:
    kind = "guess_two_thirds"
    setting = "game"
    goal = GOAL

    def __init__(self, n_players: int = 5):
        self.n_players = n_players
        self.framing = load_framing(self.kind)
        self.history: list[dict] = []

    def description(self) -> str:
        return f"{self.framing}\nThere are {self.n_players} players."

    def render(self, viewer: str, labels: Sequence[str]) -> str:
        lines = [
            f"Round {len(self.history) + 1} of the guessing game. Players: {', '.join(labels)}. You are {viewer}.",
            "Choose a number between 0 and 100. The player closest to two-thirds of the average wins.",
        ]
        if self.history:
            lines.append("Results of previous rounds:")
            for h in self.history:
                picks = ", ".join(f"{k}={fmt_number(v)}" for k, v in h["choices"].items())
                lines.append(
                    f"Round {h['round']}: choices {picks}; two-thirds of the average was "
                    f"{h['target']:.2f}; winners: {', '.join(h['winners'])}."
                )
        return "\n".join(lines)

    def observation(self, viewer: str, labels: Sequence[str], sink) -> Observation:
        on_clamp = lambda raw, c: sink.emit("warning", f"choice {raw} clamped to {c}", viewer)
        return Observation(
            env=self.kind,
            round=len(self.history) + 1,
            text=self.render(viewer, labels),
            instruction="End your reply with a line of the form 'choose <number>' with a number between 0 and 100.",
            state={"round": len(self.history) + 1, "history": [dict(h["choices"]) for h in self.history]},
            parse=partial(parse_action, self.kind, on_clamp=on_clamp),
            default=DEFAULT_ACTIONS[self.kind],
        )

    def play(self, agents, repeat: int, rng, sink) -> GameOutcome:
        labels = [a.label for a in agents]
        if len(labels) != self.n_players:
            raise InvalidArgument(f"guessing game expects {self.n_players} players, got {len(labels)}")
        sink.set_position(repeat=repeat, round=1)
        choices = {a.label: float(a.decide(self.observation(a.label, labels, sink))) for a in agents}
        idx, target = g23_winners(list(choices.values()))
        winners = [labels[i] for i in idx]
        record = {"round": len(self.history) + 1, "choices": choices, "target": target, "winners": winners}
        self.history.append(record)
        sink.emit(
            "env_announcement",
            f"Round {record['round']}: two-thirds of the average is {target:.2f}; winners: {', '.join(winners)}.",
        )
        # announcement only; the score uses the choices themselves
        return GameOutcome(
            payoffs={k: 0.0 for k in labels},
            rounds=[record],
            winners=winners,
            extra={"choices": choices},
        )
