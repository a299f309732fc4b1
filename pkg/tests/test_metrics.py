import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfgoal.errors import InvalidArgument, NotFound
from selfgoal.metrics import (
    MatchResult,
    Rating,
    TrueSkillParams,
    leaderboard,
    ranks_from_scores,
    score_s1,
    score_s2,
    score_s4,
    trueskill_oracle_2p,
    trueskill_update,
)
from selfgoal.metrics.trueskill import v_draw, v_win, w_draw, w_win


# -- scores -----------------------------------------------------------------------------------


def test_s1_examples():
    assert score_s1([[0, 0], [0, 0]]) == 0
    assert score_s1([[100] * 3] * 2) == 100
    assert score_s1([[10, 30]], endowment=40) == 50
    with pytest.raises(InvalidArgument):
        score_s1([])
    with pytest.raises(InvalidArgument):
        score_s1([[120]])


def test_s2_examples():
    assert score_s2([[0] * 4] * 5) == 100
    assert score_s2([[100] * 4] * 5) == 0
    assert score_s2([[100 / 3] * 4] * 5) == pytest.approx(66.67, abs=0.01)
    with pytest.raises(InvalidArgument):
        score_s2([[]])


def test_s4_examples():
    assert score_s4([(8, 2)]) == 6.0
    assert score_s4([(10, 4), (5, 5)]) == 3.0
    assert score_s4([(0, 0)] * 3) == 0.0
    with pytest.raises(InvalidArgument):
        score_s4([])
    with pytest.raises(InvalidArgument):
        score_s4([(1, 2, 3)])


@given(st.lists(st.lists(st.floats(0, 100), min_size=1, max_size=4), min_size=1, max_size=4).filter(lambda m: len({len(r) for r in m}) == 1))
def test_score_bounds(matrix):
    assert 0 <= score_s1(matrix) <= 100
    assert 0 <= score_s2(matrix) <= 100


def test_ranks_from_scores_uses_competition_ranks():
    assert ranks_from_scores([5, 9, 5, 1]) == [2, 1, 2, 4]
    assert ranks_from_scores([5, 9, 1], higher_is_better=False) == [2, 3, 1]


# -- TrueSkill ----------------------------------------------------------------------------------


def test_defaults():
    r = Rating()
    assert (r.mu, r.sigma) == (25.0, 25 / 3)
    p = TrueSkillParams()
    assert p.beta == pytest.approx(25 / 6) and p.gamma == pytest.approx(25 / 300)
    assert str(Rating(29.594, 1.987)) == "29.59 ± 1.99"
    with pytest.raises(InvalidArgument):
        Rating(25, 0)
    with pytest.raises(InvalidArgument):
        TrueSkillParams(beta=0)


def test_win_is_symmetric_and_contracts():
    a, b = trueskill_update([Rating(), Rating()], MatchResult(["a", "b"], [1, 2]))
    assert a.mu > 25 > b.mu
    assert a.mu - 25 == pytest.approx(25 - b.mu, abs=1e-12)
    assert a.sigma < 25 / 3 and b.sigma < 25 / 3


def test_draw_between_equals_moves_no_mean():
    a, b = trueskill_update([Rating(), Rating()], MatchResult(["a", "b"], [1, 1]))
    assert a.mu == pytest.approx(25) and b.mu == pytest.approx(25)
    assert a.sigma < 25 / 3 and b.sigma < 25 / 3


def test_equal_defaults_match_oracle():
    a, b = trueskill_update([Rating(), Rating()], MatchResult(["a", "b"], [1, 2]))
    oa, ob = trueskill_oracle_2p(Rating(), Rating(), "win")
    assert abs(a.mu - oa.mu) < 1e-3 and abs(a.sigma - oa.sigma) < 1e-3
    assert abs(b.mu - ob.mu) < 1e-3 and abs(b.sigma - ob.sigma) < 1e-3


def test_length_mismatch():
    with pytest.raises(InvalidArgument):
        MatchResult(["a", "b"], [1])
    with pytest.raises(InvalidArgument):
        MatchResult(["a"], [0])
    with pytest.raises(InvalidArgument):
        trueskill_update([Rating()], MatchResult(["a", "b"], [1, 2]))


def test_correction_functions_stay_finite_far_in_tails():
    for t in (-40.0, -10.0, 0.0, 10.0, 40.0):
        for f in (v_win, w_win, v_draw, w_draw):
            assert math.isfinite(f(t, 0.3))
    assert v_draw(1.3, 0.2) == pytest.approx(-v_draw(-1.3, 0.2))
    assert w_draw(1.3, 0.2) == pytest.approx(w_draw(-1.3, 0.2))
    assert 0 < w_win(-5.0, 0.1) < 1


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0, 50), st.floats(0.5, 10), st.floats(0, 50), st.floats(0.5, 10),
    st.sampled_from([(1, 2), (2, 1), (1, 1)]),
)
def test_sigma_never_grows_and_means_move_right_way(m1, s1, m2, s2, ranks):
    params = TrueSkillParams(gamma=0.0)
    a, b = trueskill_update([Rating(m1, s1), Rating(m2, s2)], MatchResult(["a", "b"], ranks), params)
    assert a.sigma <= s1 + 1e-12 and b.sigma <= s2 + 1e-12
    if ranks == (1, 2):
        assert a.mu >= m1 and b.mu <= m2
    if ranks == (2, 1):
        assert a.mu <= m1 and b.mu >= m2


def test_permutation_equivariance():
    rng = random.Random(3)
    labels = ["a", "b", "c", "d"]
    ratings = [Rating(rng.uniform(15, 35), rng.uniform(2, 8)) for _ in labels]
    ranks = [2, 1, 2, 3]
    base = dict(zip(labels, trueskill_update(ratings, MatchResult(labels, ranks))))
    for _ in range(10):
        perm = rng.sample(range(4), 4)
        out = trueskill_update([ratings[i] for i in perm], MatchResult([labels[i] for i in perm], [ranks[i] for i in perm]))
        for i, r in zip(perm, out):
            assert r == base[labels[i]]


# -- oracle -------------------------------------------------------------------------------------


def test_oracle_grid_refinement_converges():
    r1, r2 = Rating(27, 4), Rating(22, 6)
    coarse = trueskill_oracle_2p(r1, r2, "win", points=401)
    fine = trueskill_oracle_2p(r1, r2, "win", points=801)
    for c, f in zip(coarse, fine):
        assert abs(c.mu - f.mu) < 1e-4 and abs(c.sigma - f.sigma) < 1e-4


def test_oracle_swap_symmetry():
    r1, r2 = Rating(27, 4), Rating(22, 6)
    a, b = trueskill_oracle_2p(r1, r2, "win")
    b2, a2 = trueskill_oracle_2p(r2, r1, "loss")
    assert a.mu == pytest.approx(a2.mu, abs=1e-9) and b.sigma == pytest.approx(b2.sigma, abs=1e-9)


def test_oracle_upset_with_tiny_beta():
    params = TrueSkillParams(beta=0.05, gamma=0.0, draw_probability=0.0)
    low, high = Rating(20, 3), Rating(30, 3)
    win_low, _ = trueskill_oracle_2p(low, high, "win", params)
    # s1 > s2 truncation: 20 + (9 / sqrt(18)) * v(-10 / sqrt(18)) is about 25.7
    assert win_low.mu > 25
    closed, _ = trueskill_update([low, high], MatchResult(["low", "high"], [1, 2]), params)
    assert closed.mu == pytest.approx(win_low.mu, abs=1e-3)


def test_oracle_rejects_bad_outcome():
    with pytest.raises(ValueError):
        trueskill_oracle_2p(Rating(), Rating(), "tie")


# -- leaderboard ------------------------------------------------------------------------------


def test_empty_leaderboard_keeps_input_order():
    board = leaderboard([], labels=["z", "a", "m"])
    assert [k for k, _ in board] == ["z", "a", "m"]
    assert all(r == Rating() for _, r in board)
    assert leaderboard([]) == []


def test_unknown_label():
    with pytest.raises(NotFound):
        leaderboard([MatchResult(["a", "x"], [1, 2])], labels=["a", "b"])


def test_dominant_agent_ranks_first():
    labels = ["champ", "b", "c", "d", "e"]
    history = []
    for _ in range(2):
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                history.append(MatchResult([labels[i], labels[j]], [1, 2]))
    history = history[:20]
    board = leaderboard(history, labels=labels)
    assert board[0][0] == "champ"


def test_match_result_round_trip():
    m = MatchResult(["a", "b"], [1, 1])
    assert MatchResult.from_dict(m.to_dict()) == m
