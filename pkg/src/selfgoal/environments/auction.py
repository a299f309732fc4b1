"""Open ascending (English) auction over a shuffled sequence of items.

The winner pays their own final bid. A withdrawal is permanent for the item
being sold. Budgets shrink at the hammer; profit is true value minus price.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

from ..errors import InvalidArgument
from .base import DEFAULT_ACTIONS, GameOutcome, Observation, fmt_number, load_framing, parse_action

GOAL = "Secure the highest profit at the end of this auction, compared to all other bidders."

MAX_PASSES = 10_000


def default_item_values() -> list[float]:
    return [float(v) for v in range(2000, 10001, 2000)] * 3


@dataclass(frozen=True)
class AuctionParams:
    item_values: tuple[float, ...] = field(default_factory=lambda: tuple(default_item_values()))
    budget: float = 20000.0
    min_increment: float = 100.0
    starting_price_fraction: float = 0.5
    estimate_noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "item_values", tuple(float(v) for v in self.item_values))
        if self.budget <= 0:
            raise InvalidArgument("auction budget must be positive")
        if self.min_increment <= 0:
            raise InvalidArgument("min_increment must be positive")
        if not self.item_values:
            raise InvalidArgument("auction needs at least one item")


@dataclass
class _Item:
    name: str
    value: float
    start: float


class AuctionGame:
    kind = "auction"
    setting = "auction"
    goal = GOAL

    def __init__(self, n_players: int = 4, params: AuctionParams | None = None):
        self.n_players = n_players
        self.params = params or AuctionParams()
        self.framing = load_framing(self.kind)

    def description(self) -> str:
        p = self.params
        return (
            f"{self.framing}\nThere are {self.n_players} bidders and {len(p.item_values)} items, auctioned "
            f"one at a time in random order. Each bidder starts with a budget of ${fmt_number(p.budget)}. "
            f"Bids must exceed the current highest bid by at least ${fmt_number(p.min_increment)}."
        )

    # -- per-repeat state ---------------------------------------------------------

    def _setup(self, labels: Sequence[str], rng):
        p = self.params
        values = list(p.item_values)
        rng.shuffle(values)
        items = [
            _Item(f"Item {i + 1}", v, round(v * p.starting_price_fraction, 2))
            for i, v in enumerate(values)
        ]
        estimates = {
            label: [round(it.value * (1 + rng.uniform(-p.estimate_noise, p.estimate_noise)), 2) for it in items]
            if p.estimate_noise
            else [it.value for it in items]
            for label in labels
        }
        return items, estimates

    def render(self, viewer: str, st: dict) -> str:
        p = self.params
        item = st["item"]
        lines = [f"You are {viewer}. Bidders: {', '.join(st['labels'])}."]
        if st["log"]:
            lines.append("Results of earlier items:")
            lines.extend(st["log"])
        lines.append(
            f"Now auctioning {item.name} ({st['index'] + 1} of {st['n_items']}); starting price "
            f"${fmt_number(item.start)}. Your estimated value for it: ${fmt_number(st['estimate'])}."
        )
        if st["bids"]:
            lines.append("Bids so far on this item: " + "; ".join(f"{b} bid ${fmt_number(a)}" for b, a in st["bids"]))
            lines.append(f"Current highest bid: ${fmt_number(st['current'])} by {st['leader']}.")
        else:
            lines.append("No bids yet on this item.")
        if st["withdrawn"]:
            lines.append("Withdrawn from this item: " + ", ".join(st["withdrawn"]) + ".")
        lines.append(
            f"Your remaining budget: ${fmt_number(st['budget'])}. Your profit so far: ${fmt_number(st['profit'])}."
        )
        lines.append(f"The minimum acceptable bid now is ${fmt_number(st['required'])}.")
        return "\n".join(lines)

    def _observation(self, viewer: str, st: dict) -> Observation:
        return Observation(
            env=self.kind,
            round=st["index"] + 1,
            text=self.render(viewer, st),
            instruction=(
                f"End your reply with either 'bid <amount>' (at least ${fmt_number(st['required'])} and "
                f"within your budget) or 'withdraw'."
            ),
            state={
                "item": st["item"].name,
                "estimate": st["estimate"],
                "current_bid": st["current"],
                "leader": st["leader"],
                "required": st["required"],
                "min_increment": self.params.min_increment,
                "starting_price": st["item"].start,
                "budget": st["budget"],
                "profit": st["profit"],
            },
            parse=partial(parse_action, self.kind),
            default=DEFAULT_ACTIONS[self.kind],
        )

    def play(self, agents, repeat: int, rng, sink) -> GameOutcome:
        labels = [a.label for a in agents]
        if len(labels) != self.n_players:
            raise InvalidArgument(f"auction expects {self.n_players} bidders, got {len(labels)}")
        p = self.params
        items, estimates = self._setup(labels, rng)
        budget = {k: p.budget for k in labels}
        profit = {k: 0.0 for k in labels}
        public_log: list[str] = []
        rounds = []
        for index, item in enumerate(items):
            sink.set_position(repeat=repeat, round=index + 1)
            active = list(labels)
            leader, current = None, None
            bids: list[tuple[str, float]] = []
            withdrawn: list[str] = []
            for _ in range(MAX_PASSES):
                raised = False
                for agent in agents:
                    me = agent.label
                    if me not in active or me == leader:
                        continue
                    if leader is not None and active == [leader]:
                        break
                    required = item.start if current is None else current + p.min_increment
                    if budget[me] < required:
                        active.remove(me)
                        withdrawn.append(me)
                        sink.emit("env_announcement", f"{me} cannot afford ${fmt_number(required)} and withdraws from {item.name}.", me)
                        continue
                    st = {
                        "labels": labels, "log": public_log, "item": item, "index": index,
                        "n_items": len(items), "estimate": estimates[me][index], "bids": bids,
                        "current": current, "leader": leader, "withdrawn": withdrawn,
                        "budget": budget[me], "profit": profit[me], "required": required,
                    }
                    action = agent.decide(self._observation(me, st))
                    if action[0] == "bid":
                        amount = float(action[1])
                        if amount < required or amount > budget[me]:
                            sink.emit(
                                "warning",
                                f"invalid bid ${fmt_number(amount)} (required ${fmt_number(required)}, "
                                f"budget ${fmt_number(budget[me])}); treated as withdrawal",
                                me,
                            )
                            action = ("withdraw",)
                        else:
                            leader, current = me, amount
                            bids.append((me, amount))
                            raised = True
                            sink.emit("env_announcement", f"{me} bids ${fmt_number(amount)} on {item.name}.", me)
                    if action[0] == "withdraw":
                        active.remove(me)
                        withdrawn.append(me)
                        sink.emit("env_announcement", f"{me} withdraws from {item.name}.", me)
                if not raised or (leader is not None and active == [leader]) or not active:
                    break
            if leader is None:
                msg = f"{item.name} went unsold."
                rounds.append({"item": item.name, "value": item.value, "winner": None, "price": None, "bids": bids})
            else:
                budget[leader] -= current
                profit[leader] += item.value - current
                msg = (
                    f"{item.name} was sold to {leader} for ${fmt_number(current)} "
                    f"(true value ${fmt_number(item.value)})."
                )
                rounds.append({"item": item.name, "value": item.value, "winner": leader, "price": current, "bids": bids})
            public_log.append(msg)
            sink.emit("env_announcement", msg)
        best = max(profit.values())
        return GameOutcome(
            payoffs=dict(profit),
            rounds=rounds,
            winners=[k for k in labels if profit[k] == best],
            extra={"budgets": dict(budget)},
        )
