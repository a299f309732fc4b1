import random

import pytest

from selfgoal.agents import RuleAgent, RuleAgentParams
from selfgoal.agents.base import Agent
from selfgoal.environments import (
    AuctionGame,
    AuctionParams,
    BargainingGame,
    BargainSession,
    EnvSpec,
    GuessTwoThirdsGame,
    PublicGoodsGame,
    format_action,
    g23_winners,
    make_game,
    parse_action,
    pg_best_response_oracle,
    pg_payoffs,
    sample_session,
)
from selfgoal.environments.bargaining import BargainParams, total_value
from selfgoal.errors import ConfigError, InvalidArgument
from selfgoal.events import EventSink


class Say(Agent):
    """Replies from a fixed list (last one repeats); records what it saw."""

    def __init__(self, label, *replies):
        super().__init__(label)
        self.replies = list(replies)
        self.seen = []

    def act(self, obs):
        self.seen.append(obs)
        return self.replies[min(len(self.seen) - 1, len(self.replies) - 1)]


def rule(label, variant, **values):
    return RuleAgent(label, RuleAgentParams(variant, values))


# -- public goods -------------------------------------------------------------------------


def test_pg_payoff_examples():
    assert pg_payoffs([0] * 5, 2, 5, 100) == [100] * 5
    assert pg_payoffs([100] * 5, 2, 5, 100) == [200] * 5
    assert pg_payoffs([50, 0, 0, 0, 0], 2, 5, 100) == [70, 120, 120, 120, 120]


def test_pg_clamps_out_of_range(caplog):
    assert pg_payoffs([-5, 150, 0, 0, 0], 2, 5, 100) == pg_payoffs([0, 100, 0, 0, 0], 2, 5, 100)
    assert "clamped" in caplog.text
    with pytest.raises(InvalidArgument):
        pg_payoffs([0] * 4, 2, 5, 100)
    with pytest.raises(InvalidArgument):
        pg_payoffs([0] * 5, 6, 5, 100)


def test_pg_best_response_boundary():
    assert pg_best_response_oracle([30, 40, 50, 60], 2, 5, 100) == 0
    # R = N: payoff flat in own contribution, lowest index wins
    assert pg_best_response_oracle([30, 40, 50, 60], 5, 5, 100) == 0
    assert len(set(pg_payoffs([c, 1, 2, 3, 4], 5, 5, 10)[0] for c in range(11))) == 1


def test_pg_game_history_and_totals_carry_over():
    game = PublicGoodsGame(3)
    agents = [Say("a", "contribute 10"), Say("b", "I keep it all: 0"), Say("c", "gibberish")]
    sink = EventSink()
    for a in agents:
        a.bind(game, sink)
    o1 = game.play(agents, 0, random.Random(0), sink)
    assert o1.extra["contributions"] == {"a": 10.0, "b": 0.0, "c": 0.0}
    assert o1.payoffs["b"] == pytest.approx(100 + 2 / 3 * 10)
    game.play(agents, 1, random.Random(1), sink)
    second = agents[0].seen[-1].text
    assert "Round 1: contributions a=10, b=0, c=0" in second
    assert game.totals["b"] == pytest.approx(2 * (100 + 2 / 3 * 10))
    kinds = [e.kind for e in sink.events]
    assert "env_announcement" in kinds and "warning" in kinds  # c fell back to the default


def test_pg_render_is_deterministic():
    game = PublicGoodsGame(2)
    assert game.render("a", ["a", "b"]) == game.render("a", ["a", "b"])


# -- guess 2/3 ------------------------------------------------------------------------------


def test_g23_examples():
    assert g23_winners([40, 40, 40]) == ([0, 1, 2], pytest.approx(80 / 3))
    assert g23_winners([0, 30, 60]) == ([1], 20.0)
    winners, target = g23_winners([50, 50, 50, 50, 2])
    assert winners == [0, 1, 2, 3] and target == pytest.approx(26.9333, abs=1e-3)


def test_guess_game_payoffs_are_announcement_only():
    game = GuessTwoThirdsGame(3)
    out = game.play([Say("a", "choose 0"), Say("b", "choose 30"), Say("c", "My number is 60")], 0, random.Random(0), EventSink())
    assert out.winners == ["b"]
    assert out.payoffs == {"a": 0.0, "b": 0.0, "c": 0.0}
    assert out.extra["choices"] == {"a": 0.0, "b": 30.0, "c": 60.0}


# -- auction ----------------------------------------------------------------------------------


def one_item(value=10000.0, **kw):
    return AuctionParams(item_values=(value,), **kw)


def test_single_truthful_bidder_wins_at_start():
    game = AuctionGame(1, one_item())
    out = game.play([rule("a", "budget_capped_truthful_bidder", margin=1.0)], 0, random.Random(0), EventSink())
    assert out.rounds[0]["price"] == 5000 and out.payoffs["a"] == 5000


def test_two_truthful_bidders_drive_price_to_value():
    game = AuctionGame(2, one_item())
    agents = [rule("a", "budget_capped_truthful_bidder", margin=1.0), rule("b", "budget_capped_truthful_bidder", margin=1.0)]
    out = game.play(agents, 0, random.Random(0), EventSink())
    price = out.rounds[0]["price"]
    assert 10000 - 100 <= price <= 10000
    winner = out.rounds[0]["winner"]
    assert 0 <= out.payoffs[winner] <= 100


def test_forced_withdrawal_when_budget_is_short():
    # start price 9900; the second bidder would need 10000 but only has 9950
    params = AuctionParams(item_values=(20000.0,), starting_price_fraction=0.495, budget=9950.0)
    a, b = Say("a", "bid 9900"), Say("b", "bid 10000")
    sink = EventSink()
    out = AuctionGame(2, params).play([a, b], 0, random.Random(0), sink)
    assert out.rounds[0]["winner"] == "a" and out.rounds[0]["price"] == 9900
    assert b.seen == []  # never asked
    assert any("cannot afford" in e.payload for e in sink.events)


def test_invalid_bid_becomes_withdrawal():
    sink = EventSink()
    out = AuctionGame(2, one_item()).play([Say("a", "bid 5000"), Say("b", "bid 5050")], 0, random.Random(0), sink)
    assert out.rounds[0]["winner"] == "a"
    assert any(e.kind == "warning" and "invalid bid" in e.payload for e in sink.events)


def test_gibberish_in_auction_defaults_to_withdraw():
    out = AuctionGame(1, one_item()).play([Say("a", "la la la")], 0, random.Random(0), EventSink())
    assert out.rounds[0]["winner"] is None and out.payoffs == {"a": 0.0}


def test_auction_render_shows_earlier_hammer_prices_and_hides_nothing_private():
    game = AuctionGame(2, AuctionParams(item_values=(4000.0, 6000.0, 8000.0)))
    a = Say("a", "bid 99999999")  # invalid: above budget, so it withdraws
    b = rule("b", "budget_capped_truthful_bidder", margin=0.8)
    game.play([a, b], 0, random.Random(3), EventSink())
    third = [o for o in a.seen if o.round == 3][0].text
    assert "was sold to b for" in third
    assert third.count("Your remaining budget") == 1


def test_auction_items_shuffled_by_seed():
    game = AuctionGame(1)
    order = lambda seed: [it.value for it in game._setup(["a"], random.Random(seed))[0]]
    assert order(1) == order(1)
    assert sorted(order(1)) == sorted(AuctionParams().item_values)
    assert any(order(s) != order(1) for s in range(2, 6))


# -- bargaining ------------------------------------------------------------------------------


SESSION = BargainSession(
    {"book": 1, "hat": 2, "ball": 3},
    {"alice": {"book": 4, "hat": 0, "ball": 2}, "bob": {"book": 2, "hat": 4, "ball": 0}},
)


def test_hand_dot_product_deal():
    alice = Say("alice", "propose book=1 hat=0 ball=2")
    bob = rule("bob", "threshold_negotiator", accept_floor=0.5)
    out = BargainingGame().play([alice, bob], 0, random.Random(0), EventSink(), session=SESSION)
    assert out.extra["deal"]
    assert out.extra["allocation"] == {"alice": {"book": 1, "hat": 0, "ball": 2}, "bob": {"book": 0, "hat": 2, "ball": 1}}
    assert out.payoffs == {"alice": 8.0, "bob": 8.0}
    assert len(out.rounds) == 2  # proposal, then acceptance


def test_threshold_negotiator_accepts_in_round_one():
    alice = Say("alice", "propose book=1 hat=0 ball=3")  # bob gets hats worth 8 of his 10
    bob = rule("bob", "threshold_negotiator", accept_floor=0.5)
    out = BargainingGame().play([alice, bob], 0, random.Random(0), EventSink(), session=SESSION)
    assert out.rounds[1] == {"turn": 2, "agent": "bob", "action": ["accept"]}


def test_endless_counters_time_out_with_zero_profit():
    alice = Say("alice", "propose book=1 hat=2 ball=3")
    bob = Say("bob", "propose book=1 hat=2 ball=3")
    out = BargainingGame().play([alice, bob], 0, random.Random(0), EventSink(), session=SESSION)
    assert out.payoffs == {"alice": 0.0, "bob": 0.0}
    assert not out.extra["deal"]
    assert len(out.rounds) == 11  # ten proposals, then one final accept/reject turn


def test_malformed_proposal_falls_back_to_reject():
    alice = Say("alice", "propose book=5 hat=0 ball=0")
    bob = Say("bob", "reject")
    sink = EventSink()
    game = BargainingGame(params=BargainParams(round_cap=2))
    alice.bind(game, sink)
    out = game.play([alice, bob], 0, random.Random(0), sink, session=SESSION)
    assert out.rounds[0]["action"] == ["reject"]
    assert any(e.kind == "warning" for e in sink.events)


def test_bob_never_sees_alice_values():
    alice = Say("alice", "propose book=1 hat=0 ball=2")
    bob = Say("bob", "reject")
    BargainingGame().play([alice, bob], 0, random.Random(0), EventSink(), session=SESSION)
    for obs in bob.seen:
        assert "book=4" not in obs.text and "ball=2 (" not in obs.text
        assert "book=2, hat=4, ball=0" in obs.text


def test_session_sampling_hits_exact_totals():
    rng = random.Random(5)
    for _ in range(50):
        s = sample_session(["a", "b"], rng)
        for label in ("a", "b"):
            assert total_value(s.item_counts, s.valuations[label]) == 10
        assert all(1 <= c <= 4 for c in s.item_counts.values())


def test_session_validation():
    with pytest.raises(InvalidArgument):
        BargainSession({"book": 3}, {"a": {"book": 4}})
    with pytest.raises(InvalidArgument):
        BargainSession({"book": 1}, {"a": {"hat": 1}})


# -- parsing and specs ------------------------------------------------------------------------


def test_parse_action_examples():
    assert parse_action("public_goods", "I will contribute 25 tokens.") == 25
    assert parse_action("guess_two_thirds", "My number is 33.33") == 33.33
    assert parse_action("auction", "hmm, gibberish") is None
    assert parse_action("auction", "I bid $5,000 now") == ("bid", 5000.0)
    assert parse_action("auction", "I could bid 900 but I withdraw") == ("withdraw",)
    assert parse_action("public_goods", "contribute 250", endowment=100) == 100


def test_format_action_round_trips_through_parse():
    pool = {"book": 1, "hat": 2, "ball": 3}
    cases = [
        ("public_goods", 12.5, {}),
        ("guess_two_thirds", 33.0, {}),
        ("auction", ("bid", 5100.0), {}),
        ("auction", ("withdraw",), {}),
        ("bargaining", ("propose", {"book": 1, "hat": 0, "ball": 2}), {"pool": pool}),
        ("bargaining", ("accept",), {"pool": pool}),
    ]
    for kind, action, ctx in cases:
        assert parse_action(kind, format_action(kind, action), **ctx) == action


def test_env_spec_defaults_and_errors():
    assert (EnvSpec("public_goods").n_players, EnvSpec("public_goods").repeats) == (5, 20)
    assert (EnvSpec("auction").n_players, EnvSpec("auction").repeats) == (4, 10)
    assert (EnvSpec("bargaining").n_players, EnvSpec("bargaining").repeats) == (2, 50)
    assert len(make_game(EnvSpec("auction")).params.item_values) == 15
    with pytest.raises(ConfigError):
        EnvSpec("poker")
    with pytest.raises(ConfigError):
        make_game(EnvSpec("public_goods", params={"tax": 1}))
