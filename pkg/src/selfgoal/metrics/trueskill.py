"""TrueSkill ratings by Gaussian density filtering over ranked free-for-all matches.

Each match is split into adjacent pairs in rank order. Every pair applies the
truncated-Gaussian moment-matching correction for a win (difference above the
draw margin) or a draw (difference within the margin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import log_ndtr, ndtri

from ..errors import InvalidArgument, NotFound

MU0 = 25.0
SIGMA0 = 25.0 / 3.0
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class Rating:
    mu: float = MU0
    sigma: float = SIGMA0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)) or not math.isfinite(self.mu):
            raise InvalidArgument(f"invalid rating mu={self.mu} sigma={self.sigma}")

    @property
    def conservative(self) -> float:
        return self.mu - 3.0 * self.sigma

    def __str__(self) -> str:
        return f"{self.mu:.2f} ± {self.sigma:.2f}"


@dataclass(frozen=True)
class TrueSkillParams:
    beta: float = SIGMA0 / 2
    gamma: float = SIGMA0 / 100
    draw_probability: float = 0.10

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidArgument("beta must be positive")
        if self.gamma < 0:
            raise InvalidArgument("gamma must be non-negative")
        if not 0.0 <= self.draw_probability < 1.0:
            raise InvalidArgument("draw_probability must lie in [0, 1)")

    def draw_margin(self, n_players: int = 2) -> float:
        return float(ndtri((self.draw_probability + 1) / 2)) * math.sqrt(n_players) * self.beta


@dataclass(frozen=True)
class MatchResult:
    participants: tuple[str, ...]
    ranks: tuple[int, ...]

    def __init__(self, participants: Sequence[str], ranks: Sequence[int]):
        object.__setattr__(self, "participants", tuple(participants))
        object.__setattr__(self, "ranks", tuple(int(r) for r in ranks))
        if not self.ranks:
            raise InvalidArgument("a match needs at least one participant")
        if len(self.ranks) != len(self.participants):
            raise InvalidArgument(f"{len(self.participants)} participants but {len(self.ranks)} ranks")
        if min(self.ranks) < 1:
            raise InvalidArgument("ranks must be positive")
        if len(set(self.participants)) != len(self.participants):
            raise InvalidArgument("participants must be distinct")

    def to_dict(self) -> dict:
        return {"participants": list(self.participants), "ranks": list(self.ranks)}

    @classmethod
    def from_dict(cls, data: dict) -> "MatchResult":
        return cls(data["participants"], data["ranks"])


def _log_pdf(x: float) -> float:
    return -0.5 * x * x - _LOG_SQRT_2PI


def v_win(t: float, eps: float) -> float:
    x = t - eps
    return math.exp(_log_pdf(x) - float(log_ndtr(x)))


def w_win(t: float, eps: float) -> float:
    v = v_win(t, eps)
    return v * (v + t - eps)


def _log_diff(la: float, lb: float) -> float:
    """log(exp(la) - exp(lb)) for la > lb."""
    return la + math.log1p(-math.exp(lb - la))


def v_draw(t: float, eps: float) -> float:
    # odd in t; evaluate on |t| where both CDF tails are small and well conditioned
    s = abs(t)
    a, b = eps - s, -eps - s
    log_z = _log_diff(float(log_ndtr(a)), float(log_ndtr(b)))
    v = math.exp(_log_pdf(b) - log_z) - math.exp(_log_pdf(a) - log_z)
    return v if t >= 0 else -v


def w_draw(t: float, eps: float) -> float:
    s = abs(t)
    a, b = eps - s, -eps - s
    log_z = _log_diff(float(log_ndtr(a)), float(log_ndtr(b)))
    v = v_draw(s, eps)
    return v * v + a * math.exp(_log_pdf(a) - log_z) + (eps + s) * math.exp(_log_pdf(b) - log_z)


def _pair_update(winner: Rating, loser: Rating, draw: bool, params: TrueSkillParams) -> tuple[Rating, Rating]:
    eps = params.draw_margin(2)
    var_w, var_l = winner.sigma ** 2, loser.sigma ** 2
    c2 = 2 * params.beta ** 2 + var_w + var_l
    c = math.sqrt(c2)
    t = (winner.mu - loser.mu) / c
    e = eps / c
    if draw:
        v, w = v_draw(t, e), w_draw(t, e)
    else:
        v, w = v_win(t, e), w_win(t, e)
    # w lies in (0, 1); the clamp guards against rounding at extreme t
    w = min(max(w, 0.0), 1.0 - 1e-12)
    new_w = Rating(winner.mu + var_w / c * v, math.sqrt(var_w * (1 - var_w / c2 * w)))
    new_l = Rating(loser.mu - var_l / c * v, math.sqrt(var_l * (1 - var_l / c2 * w)))
    return new_w, new_l


def trueskill_update(
    ratings: Sequence[Rating], result: MatchResult, params: TrueSkillParams | None = None
) -> list[Rating]:
    """Posterior ratings for ``result.participants`` (aligned with ``ratings``)."""
    params = params or TrueSkillParams()
    n = len(result.participants)
    if len(ratings) != n:
        raise InvalidArgument(f"{len(ratings)} ratings for {n} participants")
    g2 = params.gamma ** 2
    current = [Rating(r.mu, math.sqrt(r.sigma ** 2 + g2)) for r in ratings]
    # order by (rank, label) so results do not depend on participant listing order
    order = sorted(range(n), key=lambda i: (result.ranks[i], result.participants[i]))
    for hi, lo in zip(order, order[1:]):
        draw = result.ranks[hi] == result.ranks[lo]
        current[hi], current[lo] = _pair_update(current[hi], current[lo], draw, params)
    return current


def leaderboard(
    history: Iterable[MatchResult],
    params: TrueSkillParams | None = None,
    labels: Sequence[str] | None = None,
) -> list[tuple[str, Rating]]:
    """Fold updates over ``history``; sorted by mu - 3 sigma, ties keep first-seen order."""
    params = params or TrueSkillParams()
    table: dict[str, Rating] = {k: Rating() for k in labels} if labels is not None else {}
    for result in history:
        for p in result.participants:
            if p not in table:
                if labels is not None:
                    raise NotFound(f"match mentions unknown agent {p!r}")
                table[p] = Rating()
        updated = trueskill_update([table[p] for p in result.participants], result, params)
        table.update(zip(result.participants, updated))
    return sorted(table.items(), key=lambda kv: -kv[1].conservative)


def ranks_from_scores(scores: Sequence[float], higher_is_better: bool = True) -> list[int]:
    """Competition ranks (1 = best, ties share a rank)."""
    arr = np.asarray(scores, dtype=float)
    key = -arr if higher_is_better else arr
    return [1 + int(np.sum(key < k)) for k in key]
