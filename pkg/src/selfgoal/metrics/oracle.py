"""Slow reference posterior for two-player TrueSkill, by direct 2-D integration.

Used to validate the closed-form update. The prior (with dynamics variance
added) is multiplied by the outcome likelihood on a dense grid, then projected
to Gaussians. Each axis spans six prior standard deviations beyond both means,
since an upset drags a player's posterior toward the opponent's mean.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .trueskill import Rating, TrueSkillParams


def trueskill_oracle_2p(
    r1: Rating,
    r2: Rating,
    outcome: str,
    params: TrueSkillParams | None = None,
    points: int = 801,
) -> tuple[Rating, Rating]:
    """``outcome`` is ``"win"`` (player 1 beats player 2), ``"loss"`` or ``"draw"``."""
    params = params or TrueSkillParams()
    if outcome not in ("win", "loss", "draw"):
        raise ValueError(f"outcome must be win, loss or draw, got {outcome!r}")
    g2 = params.gamma ** 2
    sd1 = math.sqrt(r1.sigma ** 2 + g2)
    sd2 = math.sqrt(r2.sigma ** 2 + g2)
    lo, hi = min(r1.mu, r2.mu), max(r1.mu, r2.mu)
    x1 = np.linspace(lo - 6 * sd1, hi + 6 * sd1, points)
    x2 = np.linspace(lo - 6 * sd2, hi + 6 * sd2, points)
    s1, s2 = np.meshgrid(x1, x2, indexing="ij")
    log_prior = -0.5 * ((s1 - r1.mu) / sd1) ** 2 - 0.5 * ((s2 - r2.mu) / sd2) ** 2
    # performance difference p1 - p2 ~ N(s1 - s2, 2 beta^2)
    scale = math.sqrt(2) * params.beta
    eps = params.draw_margin(2)
    d = s1 - s2
    if outcome == "win":
        like = ndtr((d - eps) / scale)
    elif outcome == "loss":
        like = ndtr((-d - eps) / scale)
    else:
        like = ndtr((eps - d) / scale) - ndtr((-eps - d) / scale)
    weight = np.exp(log_prior - log_prior.max()) * like
    z = weight.sum()
    m1 = float((weight * s1).sum() / z)
    m2 = float((weight * s2).sum() / z)
    v1 = float((weight * (s1 - m1) ** 2).sum() / z)
    v2 = float((weight * (s2 - m2) ** 2).sum() / z)
    return Rating(m1, math.sqrt(v1)), Rating(m2, math.sqrt(v2))
