"""Repeated public goods game: one simultaneous contribution round per repeat."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Sequence

from ..errors import InvalidArgument
from .base import DEFAULT_ACTIONS, GameOutcome, Observation, fmt_number, load_framing, parse_action

log = logging.getLogger(__name__)

GOAL = "Maximize your total token count by the end of the game."


@dataclass(frozen=True)
class PublicGoodsParams:
    multiplier: float = 2.0
    endowment: float = 100.0


def pg_payoffs(contributions: Sequence[float], R: float, N: int, E: float) -> list[float]:
    """payoff_i = (E - c_i) + (R / N) * sum(c); out-of-range contributions are clamped."""
    if len(contributions) != N:
        raise InvalidArgument(f"expected {N} contributions, got {len(contributions)}")
    if not 1 <= R <= N:
        raise InvalidArgument(f"multiplier R={R} must satisfy 1 <= R <= N={N}")
    clamped = []
    for i, c in enumerate(contributions):
        cc = min(max(float(c), 0.0), float(E))
        if cc != c:
            log.warning("player %d contribution %s clamped to %s", i, c, cc)
        clamped.append(cc)
    share = R / N * math.fsum(clamped)
    return [(E - c) + share for c in clamped]


def pg_best_response_oracle(opponent_contribs: Sequence[float], R: float, N: int, E: int) -> int:
    """Brute-force best own contribution in {0..E}; lowest index wins ties."""
    best, best_payoff = 0, -math.inf
    for c in range(int(E) + 1):
        payoff = pg_payoffs([c, *opponent_contribs], R, N, E)[0]
        if payoff > best_payoff:
            best, best_payoff = c, payoff
    return best


class PublicGoodsGame:
    kind = "public_goods"
    setting = "game"
    goal = GOAL

    def __init__(self, n_players: int = 5, params: PublicGoodsParams | None = None):
        self.n_players = n_players
        self.params = params or PublicGoodsParams()
        if not 1 <= self.params.multiplier <= n_players:
            raise InvalidArgument("public goods multiplier must satisfy 1 <= R <= N")
        self.framing = load_framing(self.kind)
        # public record of earlier repeats; each repeat is one round of the repeated game
        self.history: list[dict] = []
        self.totals: dict[str, float] = {}

    def description(self) -> str:
        p = self.params
        return (
            f"{self.framing}\nThere are {self.n_players} players. Each round every player receives "
            f"{fmt_number(p.endowment)} tokens; the pot is multiplied by {fmt_number(p.multiplier)}."
        )

    def render(self, viewer: str, labels: Sequence[str]) -> str:
        p = self.params
        rnd = len(self.history) + 1
        lines = [
            f"Round {rnd} of the public goods game. Players: {', '.join(labels)}. You are {viewer}.",
            f"This round you receive {fmt_number(p.endowment)} tokens and may contribute any amount "
            f"from 0 to {fmt_number(p.endowment)} to the public pot. The pot is multiplied by "
            f"{fmt_number(p.multiplier)} and split evenly among all {len(labels)} players.",
        ]
        if self.history:
            lines.append("Results of previous rounds:")
            for h in self.history:
                contribs = ", ".join(f"{k}={fmt_number(v)}" for k, v in h["contributions"].items())
                lines.append(
                    f"Round {h['round']}: contributions {contribs}; pot total {fmt_number(h['pot'])}, "
                    f"each player received {h['share']:.2f}; your payoff {h['payoffs'][viewer]:.2f}."
                )
        lines.append(f"Your total tokens so far: {self.totals.get(viewer, 0.0):.2f}.")
        return "\n".join(lines)

    def observation(self, viewer: str, labels: Sequence[str], sink) -> Observation:
        p = self.params
        on_clamp = lambda raw, c: sink.emit("warning", f"contribution {raw} clamped to {c}", viewer)
        return Observation(
            env=self.kind,
            round=len(self.history) + 1,
            text=self.render(viewer, labels),
            instruction=(
                f"State how many tokens (0-{fmt_number(p.endowment)}) you contribute, ending your reply "
                f"with a line of the form 'contribute <amount>'."
            ),
            state={
                "round": len(self.history) + 1,
                "endowment": p.endowment,
                "multiplier": p.multiplier,
                "n_players": len(labels),
                "history": [dict(h["contributions"]) for h in self.history],
            },
            parse=partial(parse_action, self.kind, endowment=p.endowment, on_clamp=on_clamp),
            default=DEFAULT_ACTIONS[self.kind],
        )

    def play(self, agents, repeat: int, rng, sink) -> GameOutcome:
        labels = [a.label for a in agents]
        if len(labels) != self.n_players:
            raise InvalidArgument(f"public goods game expects {self.n_players} players, got {len(labels)}")
        sink.set_position(repeat=repeat, round=1)
        contributions = {}
        for agent in agents:
            contributions[agent.label] = float(agent.decide(self.observation(agent.label, labels, sink)))
        p = self.params
        payoffs = pg_payoffs(list(contributions.values()), p.multiplier, len(labels), p.endowment)
        pot = math.fsum(contributions.values())
        by_label = dict(zip(labels, payoffs))
        for k, v in by_label.items():
            self.totals[k] = self.totals.get(k, 0.0) + v
        record = {
            "round": len(self.history) + 1,
            "contributions": contributions,
            "pot": pot,
            "share": p.multiplier * pot / len(labels),
            "payoffs": by_label,
        }
        self.history.append(record)
        sink.emit(
            "env_announcement",
            f"Round {record['round']}: contributions "
            + ", ".join(f"{k}={fmt_number(v)}" for k, v in contributions.items())
            + f"; each player received {record['share']:.2f}.",
        )
        return GameOutcome(payoffs=by_label, rounds=[record], extra={"contributions": contributions})
