from .oracle import trueskill_oracle_2p
from .scores import score_s1, score_s2, score_s4
from .trueskill import MatchResult, Rating, TrueSkillParams, leaderboard, ranks_from_scores, trueskill_update

__all__ = [
    "MatchResult",
    "Rating",
    "TrueSkillParams",
    "leaderboard",
    "ranks_from_scores",
    "score_s1",
    "score_s2",
    "score_s4",
    "trueskill_oracle_2p",
    "trueskill_update",
]
