"""Deterministic rule agents used as opponents and as test oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..environments.bargaining import all_splits, total_value
from ..environments.base import Observation
from ..environments.guess import level_k_choice
from ..errors import ConfigError
from .base import Agent

VARIANTS = {
    "level_k": ("k",),
    "fixed_contribution": ("c",),
    "fixed_number": ("x",),
    "budget_capped_truthful_bidder": ("margin",),
    "threshold_negotiator": ("accept_floor",),
    "uniform_random": ("seed",),
}


@dataclass(frozen=True)
class RuleAgentParams:
    variant: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown rule variant {self.variant!r}; expected one of {sorted(VARIANTS)}")
        missing = [k for k in VARIANTS[self.variant] if k not in self.values and k != "seed"]
        if missing:
            raise ConfigError(f"rule variant {self.variant} needs {missing}")
        if self.variant == "level_k" and int(self.values["k"]) < 0:
            raise ConfigError("level k must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "RuleAgentParams":
        data = dict(data)
        return cls(data.pop("variant", ""), data)

    def to_dict(self) -> dict:
        return {"variant": self.variant, **self.values}


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def rule_action(params: RuleAgentParams, obs: Observation, rng: random.Random | None = None) -> str:
    """The rule's reply, phrased in the environment's action grammar."""
    v = params.values
    kind = params.variant
    env = obs.env
    st = obs.state
    if kind == "level_k":
        return f"choose {_fmt(level_k_choice(int(v['k'])))}"
    if kind == "fixed_contribution":
        return f"contribute {_fmt(v['c'])}"
    if kind == "fixed_number":
        return f"choose {_fmt(v['x'])}"
    if kind == "budget_capped_truthful_bidder":
        cap = min(st["estimate"] * float(v["margin"]), st["budget"])
        if st["required"] <= cap:
            return f"bid {_fmt(st['required'])}"
        return "withdraw"
    if kind == "threshold_negotiator":
        return _threshold_reply(float(v["accept_floor"]), st)
    rng = rng or random.Random(v.get("seed", 0))
    return _random_reply(env, st, rng)


def _threshold_reply(floor: float, st: dict) -> str:
    values, pool = st["values"], st["pool"]
    own_total = total_value(pool, values)
    offered = st["offered"]
    if offered is not None and total_value(offered, values) >= floor * own_total:
        return "accept"
    if not st["can_propose"]:
        return "reject"
    seen = [tuple(sorted(p.items())) for p in st["proposals_seen"]]
    options = sorted(all_splits(pool), key=lambda keep: (-total_value(keep, values), tuple(keep.values())))
    for keep in options:
        if tuple(sorted(keep.items())) not in seen:
            return "propose " + " ".join(f"{k}={n}" for k, n in keep.items())
    return "reject"


def _random_reply(env: str, st: dict, rng: random.Random) -> str:
    if env == "public_goods":
        return f"contribute {rng.randint(0, int(st['endowment']))}"
    if env == "guess_two_thirds":
        return f"choose {rng.uniform(0, 100)!r}"
    if env == "auction":
        if st["required"] <= st["budget"] and rng.random() < 0.5:
            return f"bid {_fmt(st['required'])}"
        return "withdraw"
    if st["offered"] is not None and rng.random() < 0.5:
        return "accept"
    if not st["can_propose"]:
        return "reject"
    keep = {k: rng.randint(0, n) for k, n in st["pool"].items()}
    return "propose " + " ".join(f"{k}={n}" for k, n in keep.items())


class RuleAgent(Agent):
    kind = "rule"

    def __init__(self, label: str, params: RuleAgentParams, seed: int = 0):
        super().__init__(label)
        self.params = params
        self.rng = random.Random(params.values.get("seed", seed))

    def act(self, obs: Observation) -> str:
        reply = rule_action(self.params, obs, self.rng)
        return reply
