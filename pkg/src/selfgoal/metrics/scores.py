"""Per-game scores. S3 is the TrueSkill mean and lives in :mod:`.trueskill`."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidArgument


def _matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise InvalidArgument(f"{name} needs at least one entry")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} entries must be finite")
    return arr


def score_s1(contributions, endowment: float = 100.0) -> float:
    """Mean contribution as a percentage of the endowment (lower is better)."""
    if endowment <= 0:
        raise InvalidArgument("endowment must be positive")
    c = _matrix(contributions, "S1")
    if c.min() < 0 or c.max() > endowment:
        raise InvalidArgument(f"contributions must lie in [0, {endowment}]")
    return float(c.mean() / endowment * 100.0)


def score_s2(choices) -> float:
    """100 minus the mean chosen number (higher is better)."""
    c = _matrix(choices, "S2")
    if c.min() < 0 or c.max() > 100:
        raise InvalidArgument("choices must lie in [0, 100]")
    return float(100.0 - c.mean())


def score_s4(session_profits: Iterable[Sequence[float]]) -> float:
    """Mean absolute profit gap between the two negotiators over all sessions."""
    gaps = []
    for pair in session_profits:
        if len(pair) != 2:
            raise InvalidArgument(f"each session needs exactly two profits, got {pair!r}")
        gaps.append(abs(float(pair[0]) - float(pair[1])))
    if not gaps:
        raise InvalidArgument("S4 needs at least one session")
    return math.fsum(gaps) / len(gaps)
