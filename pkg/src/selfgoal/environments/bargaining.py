"""Two-party multi-issue bargaining over a pool of items with private valuations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import partial
from typing import Mapping

from ..errors import InvalidArgument
from .base import DEFAULT_ACTIONS, GameOutcome, Observation, load_framing, parse_action

GOAL = "Minimize the profit gap between yourself and your partner in this negotiation, regardless of your own profit."

ITEM_TYPES = ("book", "hat", "ball")


@dataclass(frozen=True)
class BargainParams:
    round_cap: int = 10
    total_value: int = 10
    max_count: int = 4
    item_types: tuple[str, ...] = ITEM_TYPES


@dataclass(frozen=True)
class BargainSession:
    item_counts: Mapping[str, int]
    valuations: Mapping[str, Mapping[str, int]]  # agent label -> item -> unit value
    round_cap: int = 10
    total_cap: int = 10

    def __post_init__(self):
        for label, vals in self.valuations.items():
            if set(vals) != set(self.item_counts):
                raise InvalidArgument(f"{label} values items {sorted(vals)}, pool has {sorted(self.item_counts)}")
            if any(not 0 <= v <= 10 for v in vals.values()):
                raise InvalidArgument(f"{label} unit values must lie in 0..10")
            if total_value(self.item_counts, vals) > self.total_cap:
                raise InvalidArgument(f"{label} values the full pool above {self.total_cap}")
        if any(c < 0 for c in self.item_counts.values()):
            raise InvalidArgument("item counts must be non-negative")

    def to_dict(self) -> dict:
        return {
            "item_counts": dict(self.item_counts),
            "valuations": {k: dict(v) for k, v in self.valuations.items()},
            "round_cap": self.round_cap,
        }


def total_value(counts: Mapping[str, int], values: Mapping[str, int]) -> int:
    return sum(counts[k] * values[k] for k in counts)


def sample_session(labels, rng, params: BargainParams | None = None) -> BargainSession:
    """Counts in 1..max_count; each agent's unit values drawn uniformly among those totalling ``total_value``.

    Some pools admit no such valuation (all counts 3 with a total of 10, say); those are redrawn.
    """
    p = params or BargainParams()
    for _ in range(1000):
        counts = {k: rng.randint(1, p.max_count) for k in p.item_types}
        ranges = [range(min(10, p.total_value // counts[k]) + 1) for k in p.item_types]
        options = [
            dict(zip(p.item_types, combo))
            for combo in itertools.product(*ranges)
            if sum(c * v for c, v in zip(counts.values(), combo)) == p.total_value
        ]
        if options:
            valuations = {label: dict(rng.choice(options)) for label in labels}
            return BargainSession(counts, valuations, p.round_cap, p.total_value)
    raise InvalidArgument(f"no pool with counts up to {p.max_count} reaches a total value of {p.total_value}")


def all_splits(pool: Mapping[str, int]):
    keys = list(pool)
    for combo in itertools.product(*(range(pool[k] + 1) for k in keys)):
        yield dict(zip(keys, combo))


def _fmt_alloc(alloc: Mapping[str, int]) -> str:
    return " ".join(f"{k}={v}" for k, v in alloc.items())


class BargainingGame:
    kind = "bargaining"
    setting = "negotiation"
    goal = GOAL

    def __init__(self, n_players: int = 2, params: BargainParams | None = None, sessions=None):
        if n_players != 2:
            raise InvalidArgument("bargaining is a two-party game")
        self.n_players = 2
        self.params = params or BargainParams()
        self.framing = load_framing(self.kind)
        self.sessions = sessions  # optional fixed sessions, one per repeat

    def description(self) -> str:
        return (
            f"{self.framing}\nProposals name how many of each item the proposer keeps; the partner gets the rest. "
            f"There are at most {self.params.round_cap} rounds of proposals."
        )

    def render(self, viewer: str, partner: str, session: BargainSession, dialogue, turn: int) -> str:
        vals = session.valuations[viewer]
        lines = [
            f"You are {viewer}, negotiating with {partner}.",
            "Item pool: " + ", ".join(f"{c} {k}(s)" for k, c in session.item_counts.items()) + ".",
            "Your private value per item: " + ", ".join(f"{k}={v}" for k, v in vals.items())
            + f" (the whole pool is worth {total_value(session.item_counts, vals)} to you).",
        ]
        if dialogue:
            lines.append("Dialogue so far:")
            lines.extend(dialogue)
        lines.append(f"This is round {turn} of at most {session.round_cap}.")
        return "\n".join(lines)

    def _observation(self, me, partner, session, dialogue, turn, standing, proposals, history, sink) -> Observation:
        can_propose = turn <= session.round_cap
        offered = None
        if standing is not None and standing[0] != me:
            offered = {k: session.item_counts[k] - v for k, v in standing[1].items()}
        if can_propose:
            instruction = (
                "End your reply with exactly one action line: "
                + ("'accept' to take the partner's proposal, " if offered else "")
                + "'propose " + " ".join(f"{k}=<n>" for k in session.item_counts)
                + "' naming how many of each item YOU keep (your partner gets the rest), or 'reject'."
            )
        else:
            instruction = "No more proposals are allowed. End your reply with 'accept' or 'reject'."
        text = self.render(me, partner, session, dialogue, min(turn, session.round_cap))
        if offered:
            text += f"\n{partner}'s standing proposal gives you: {_fmt_alloc(offered)}."
        return Observation(
            env=self.kind,
            round=turn,
            text=text,
            instruction=instruction,
            state={
                "pool": dict(session.item_counts),
                "values": dict(session.valuations[me]),
                "offered": offered,
                "can_propose": can_propose,
                "turn": turn,
                "round_cap": session.round_cap,
                # earlier proposals, as the allocation they would give this viewer
                "proposals_seen": [
                    dict(keep) if who == me else {k: session.item_counts[k] - v for k, v in keep.items()}
                    for who, keep in history
                ],
            },
            parse=partial(
                parse_action, self.kind, pool=dict(session.item_counts), can_accept=offered is not None,
                can_propose=can_propose,
            ),
            default=DEFAULT_ACTIONS[self.kind],
        )

    def play(self, agents, repeat: int, rng, sink, session: BargainSession | None = None) -> GameOutcome:
        if len(agents) != 2:
            raise InvalidArgument("bargaining needs exactly two agents")
        labels = [a.label for a in agents]
        if session is None:
            if self.sessions:
                session = self.sessions[repeat % len(self.sessions)]
            else:
                p = self.params
                session = sample_session(labels, rng, p)
        cap = session.round_cap
        standing = None  # (proposer, kept counts)
        history: list[tuple[str, dict]] = []
        dialogue: list[str] = []
        rounds = []
        deal = None
        for turn in range(1, cap + 2):
            if turn > cap and standing is None:
                break
            sink.set_position(repeat=repeat, round=turn)
            actor = agents[(turn - 1) % 2]
            me, partner = actor.label, labels[turn % 2]
            obs = self._observation(me, partner, session, dialogue, turn, standing, len(history), history, sink)
            action = actor.decide(obs)
            rounds.append({"turn": turn, "agent": me, "action": list(action[:1]) + ([action[1]] if len(action) > 1 else [])})
            if action[0] == "accept" and standing is not None and standing[0] != me:
                deal = standing
                dialogue.append(f"Round {turn}: {me} accepts.")
                sink.emit("env_announcement", f"{me} accepts {standing[0]}'s proposal.", me)
                break
            if action[0] == "propose" and turn <= cap:
                standing = (me, dict(action[1]))
                history.append(standing)
                line = f"Round {turn}: {me} proposes to keep {_fmt_alloc(action[1])}."
            else:
                standing = None
                line = f"Round {turn}: {me} rejects" + (" and passes." if turn <= cap else ".")
            dialogue.append(line)
            sink.emit("env_announcement", line, me)
            if turn > cap:
                break
        payoffs = {k: 0.0 for k in labels}
        allocation = None
        if deal is not None:
            proposer, keep = deal
            other = labels[1] if proposer == labels[0] else labels[0]
            allocation = {proposer: dict(keep), other: {k: session.item_counts[k] - v for k, v in keep.items()}}
            for label in labels:
                payoffs[label] = float(total_value(allocation[label], session.valuations[label]))
            sink.emit("env_announcement", "Deal: " + "; ".join(f"{k} gets {_fmt_alloc(v)}" for k, v in allocation.items()))
        else:
            sink.emit("env_announcement", "No agreement was reached; neither party profits.")
        return GameOutcome(
            payoffs=payoffs,
            rounds=rounds,
            extra={"deal": deal is not None, "allocation": allocation, "session": session.to_dict()},
        )
