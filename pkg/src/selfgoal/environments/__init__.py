"""The four turn-based games behind one interface.

Every game exposes ``kind``, ``goal``, ``setting``, ``description()`` and
``play(agents, repeat, rng, sink) -> GameOutcome``. Agents only need a
``label`` and ``decide(observation) -> action``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from .auction import AuctionGame, AuctionParams
from .bargaining import BargainingGame, BargainParams, BargainSession, sample_session
from .base import DEFAULT_ACTIONS, GameOutcome, Observation, format_action, parse_action
from .guess import GuessTwoThirdsGame, g23_winners, level_k_choice
from .public_goods import PublicGoodsGame, PublicGoodsParams, pg_best_response_oracle, pg_payoffs

KINDS = ("public_goods", "guess_two_thirds", "auction", "bargaining")

DEFAULTS = {
    "public_goods": {"n_players": 5, "repeats": 20},
    "guess_two_thirds": {"n_players": 5, "repeats": 20},
    "auction": {"n_players": 4, "repeats": 10},
    # one negotiation session per repeat; M = 50 sessions
    "bargaining": {"n_players": 2, "repeats": 50},
}

# repeated single-round games keep public history across repeats
STATEFUL_KINDS = ("public_goods", "guess_two_thirds")


@dataclass
class EnvSpec:
    kind: str
    n_players: int | None = None
    repeats: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown environment kind {self.kind!r}; expected one of {KINDS}")
        d = DEFAULTS[self.kind]
        if self.n_players is None:
            self.n_players = d["n_players"]
        if self.repeats is None:
            self.repeats = d["repeats"]
        if self.n_players < 1 or self.repeats < 1:
            raise ConfigError("n_players and repeats must be positive")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_players": self.n_players, "repeats": self.repeats, "params": dict(self.params)}


def make_game(spec: EnvSpec):
    p = dict(spec.params)
    try:
        if spec.kind == "public_goods":
            return PublicGoodsGame(spec.n_players, PublicGoodsParams(**p))
        if spec.kind == "guess_two_thirds":
            if p:
                raise TypeError(f"unexpected params {sorted(p)}")
            return GuessTwoThirdsGame(spec.n_players)
        if spec.kind == "auction":
            return AuctionGame(spec.n_players, AuctionParams(**p))
        return BargainingGame(spec.n_players, BargainParams(**{k: tuple(v) if k == "item_types" else v for k, v in p.items()}))
    except TypeError as exc:
        raise ConfigError(f"bad params for {spec.kind}: {exc}") from exc


__all__ = [
    "AuctionGame",
    "AuctionParams",
    "BargainParams",
    "BargainSession",
    "BargainingGame",
    "DEFAULT_ACTIONS",
    "EnvSpec",
    "GameOutcome",
    "GuessTwoThirdsGame",
    "KINDS",
    "Observation",
    "PublicGoodsGame",
    "PublicGoodsParams",
    "g23_winners",
    "level_k_choice",
    "format_action",
    "make_game",
    "parse_action",
    "pg_best_response_oracle",
    "pg_payoffs",
    "sample_session",
]
