"""Shared environment types: observations handed to agents, outcomes, action parsing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable, Mapping

from ..errors import InvalidArgument

_NUMBER = re.compile(r"-?\d+(?:,\d{3})*(?:\.\d+)?")

# action returned when a reply stays unparseable after one re-ask
DEFAULT_ACTIONS = {
    "public_goods": 0.0,
    "guess_two_thirds": 50.0,
    "auction": ("withdraw",),
    "bargaining": ("reject",),
}


@dataclass
class Observation:
    """What an agent sees when it must act.

    ``text`` is the rendering fed to language models; ``state`` is the same
    viewer-restricted information in structured form for rule agents.
    """

    env: str
    round: int
    text: str
    instruction: str
    state: dict
    parse: Callable[[str], Any]
    default: Any
    reminder: str = ""

    def __post_init__(self):
        if not self.reminder:
            self.reminder = (
                "Your previous reply could not be understood. " + self.instruction
            )


@dataclass
class GameOutcome:
    payoffs: dict[str, float]
    rounds: list[dict] = field(default_factory=list)
    winners: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "payoffs": dict(self.payoffs),
            "rounds": self.rounds,
            "winners": list(self.winners),
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameOutcome":
        return cls(dict(data["payoffs"]), list(data.get("rounds", [])), list(data.get("winners", [])), dict(data.get("extra", {})))


def _numbers(text: str) -> list[float]:
    return [float(m.replace(",", "")) for m in _NUMBER.findall(text or "")]


def _last_number(text: str) -> float | None:
    nums = _numbers(text)
    return nums[-1] if nums else None


def parse_bargain(reply: str, pool: Mapping[str, int], can_accept: bool = True, can_propose: bool = True):
    """``("accept",)``, ``("reject",)`` or ``("propose", {item: kept_count})``; None when unusable.

    Proposal counts are what the proposer keeps; items left unnamed count as 0.
    """
    text = (reply or "").lower()
    names = "|".join(re.escape(k) for k in sorted(pool, key=len, reverse=True))
    hits = []
    for m in re.finditer(r"\b(accept|reject|propose)\b", text):
        hits.append((m.start(), m.group(1), m.end()))
    if not hits:
        return None
    _, word, end = hits[-1]
    if word == "accept":
        return ("accept",) if can_accept else None
    if word == "reject":
        return ("reject",)
    if not can_propose:
        return ("reject",)
    tail = text[end:].split("\n", 1)[0]
    keep = {k: 0 for k in pool}
    found = False
    for m in re.finditer(rf"\b({names})s?\s*[=:]\s*(-?\d+)", tail):
        keep[m.group(1)] = int(m.group(2))
        found = True
    if not found:
        return None
    if any(v < 0 or v > pool[k] for k, v in keep.items()):
        return None
    return ("propose", keep)


def parse_action(env_kind: str, reply: str, **ctx):
    """Extract an environment action from free text, or None when there is none.

    Numeric games take the last number and clamp it into range; the caller is
    told about clamping through ``ctx['on_clamp']`` when given.
    """
    if env_kind == "public_goods":
        value = _last_number(reply)
        if value is None:
            return None
        return _clamp(value, 0.0, float(ctx.get("endowment", 100)), ctx.get("on_clamp"))
    if env_kind == "guess_two_thirds":
        value = _last_number(reply)
        if value is None:
            return None
        return _clamp(value, 0.0, 100.0, ctx.get("on_clamp"))
    if env_kind == "auction":
        text = (reply or "").lower()
        bid = None
        for m in re.finditer(r"\bbid\w*\b[^\d\n]{0,20}?\$?\s*(\d[\d,]*(?:\.\d+)?)", text):
            bid = (m.start(), float(m.group(1).replace(",", "")))
        wd = None
        for m in re.finditer(r"\b(withdraw\w*|pass|fold)\b", text):
            wd = m.start()
        if bid is None and wd is None:
            return None
        if bid is not None and (wd is None or bid[0] > wd):
            return ("bid", bid[1])
        return ("withdraw",)
    if env_kind == "bargaining":
        return parse_bargain(reply, ctx["pool"], ctx.get("can_accept", True), ctx.get("can_propose", True))
    raise InvalidArgument(f"unknown environment kind {env_kind!r}")


def format_action(env_kind: str, action) -> str:
    """Canonical text for a parsed action, written in the game's own grammar."""
    if env_kind == "public_goods":
        return f"contribute {fmt_number(action)}"
    if env_kind == "guess_two_thirds":
        return f"choose {fmt_number(action)}"
    if env_kind == "auction":
        return f"bid {fmt_number(action[1])}" if action[0] == "bid" else "withdraw"
    if env_kind == "bargaining":
        if action[0] == "propose":
            return "propose " + " ".join(f"{k}={v}" for k, v in action[1].items())
        return action[0]
    raise InvalidArgument(f"unknown environment kind {env_kind!r}")


def _clamp(value: float, lo: float, hi: float, on_clamp=None) -> float:
    clamped = min(max(value, lo), hi)
    if clamped != value and on_clamp is not None:
        on_clamp(value, clamped)
    return clamped


def load_framing(kind: str) -> str:
    return resources.files(__package__).joinpath("framing", f"{kind}.txt").read_text(encoding="utf-8").strip()


def fmt_number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.2f}"
