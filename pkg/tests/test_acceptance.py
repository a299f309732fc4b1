"""Acceptance criteria 1-10, each timed against its budget and logged to the summary."""

import itertools
import json
import math
import os
import random
import time
from contextlib import contextmanager

import pytest

from selfgoal.agents import AdaptAgent, ClinAgent, ReflexionAgent, RuleAgent, RuleAgentParams, SelfGoalAgent, rule_action
from selfgoal.agents.base import Agent
from selfgoal.agents.baselines import is_causal_learning
from selfgoal.backend import FixtureEmbedder
from selfgoal.environments import (
    AuctionGame,
    AuctionParams,
    BargainingGame,
    EnvSpec,
    GuessTwoThirdsGame,
    g23_winners,
    level_k_choice,
    make_game,
    pg_best_response_oracle,
    pg_payoffs,
    sample_session,
)
from selfgoal.events import EventSink
from selfgoal.goaltree import GoalTree, TreeConfig
from selfgoal.metrics import (
    MatchResult,
    Rating,
    TrueSkillParams,
    leaderboard,
    score_s1,
    score_s2,
    score_s4,
    trueskill_oracle_2p,
    trueskill_update,
)
from selfgoal.runner import ExperimentConfig, RunRecord, run_experiment, sweep_xi
from selfgoal.runner.cli import demo_config_path

from conftest import ACCEPTANCE, StubGame, bind, pg_obs, scripted, unit


@contextmanager
def criterion(n, text, budget_s):
    start = time.perf_counter()
    passed = False
    try:
        yield
        passed = True
    finally:
        took = time.perf_counter() - start
        in_time = took < budget_s
        ACCEPTANCE[n] = (passed and in_time, f"{text} [{took:.2f}s of {budget_s:g}s]")
    assert in_time, f"criterion {n} took {took:.2f}s, budget {budget_s}s"


# 1 ------------------------------------------------------------------------------------------


def test_criterion_1_goaltree_mechanics():
    vecs = {"goal": unit((0, 1)), "a": unit((1, 1)), "b": unit((2, 1)), "a2": unit((1, 0.9), (3, 0.19 ** 0.5))}
    emb = FixtureEmbedder(vecs)
    with criterion(1, "GoalTree filter, stopping, pruning, ids, round trip", 1.0):
        t = GoalTree.new("goal", TreeConfig(xi=0.8))
        kept = t.filter_candidates(["a", "a2", "b", "b"], emb)
        assert kept == ["a", "b"]
        t.insert_children("root", kept, 0)
        assert t.filter_candidates(kept, emb) == []
        for xi in (0.0, 0.25, 0.5, 0.8, 0.99, 1.0):
            tx = GoalTree.new("goal", TreeConfig(xi=xi))
            tx.insert_children("root", ["a"], 0)
            assert tx.filter_candidates(["a"], emb) == []
        for stop_n in (1, 3, 5):
            ts = GoalTree.new("goal", TreeConfig(stop_n=stop_n))
            ts.insert_children("root", ["a"], 4)
            assert [ts.stopping_met(c) for c in range(4, 12)] == [c - 4 >= stop_n for c in range(4, 12)]
        tp = GoalTree.new("goal")
        tp.insert_children("root", ["a", "b"], 0)
        tp.insert_children("root-0", ["a2"], 0)
        tp.mark_selected(["root-1"], 2)
        assert tp.prune(5) == [] and tp.prune(6) == ["root-0", "root-0-0"]
        assert tp.prune(7) == [] and tp.prune(8) == ["root-1"]
        assert tp.insert_children("root", ["a"], 9) == ["root-2"]
        assert GoalTree.loads(t.dumps()) == t and GoalTree.loads(tp.dumps()).dumps() == tp.dumps()


# 2 ------------------------------------------------------------------------------------------

TRACE_VECS = {
    StubGame.goal: unit((0, 1)),
    "A": unit((1, 1)),
    "B": unit((2, 1)),
    "C": unit((3, 1)),
    "A1": unit((4, 1)),
    "A1 variant": unit((4, 0.9), (5, 0.19 ** 0.5)),
}
TRACE_SCRIPT = {
    "sg/decompose/0": "1. A\n2. B\n3. C",
    "sg/search/1": '{"IDs": [0, 2]}',
    "sg/decompose/1/root-0": "1. A1",
    "sg/decompose/1/root-2": "1. A",
    "sg/search/2": '{"IDs": [0]}',
    "sg/decompose/2/root-0-0": "1. A1 variant",
    "sg/search/3": '{"IDs": [0, 1]}',
    "sg/decompose/3/root-0-0": "1. A",
    "sg/decompose/3/root-1": "",
    "sg/search/4": '{"IDs": [0]}',
    "sg/search/5": '{"IDs": [1]}',
    # no decompose entries for steps 4 and 5: reaching one would raise ScriptExhausted
    **{f"sg/act/{t}": f"contribute {10 * t}" for t in range(1, 6)},
}
# (selected ids, action, inserted ids, pruned ids), derived by stepping the loop by hand:
# stop_n = 2 freezes growth once round 3 passes with no insertion since round 1;
# prune_after = 2 then removes root-2 (last selected at round 1) at round 4.
EXPECTED_TRACE = [
    (["root-0", "root-2"], "contribute 10", ["root-0-0"], []),
    (["root-0-0"], "contribute 20", [], []),
    (["root-0-0", "root-1"], "contribute 30", [], []),
    (["root-0-0"], "contribute 40", [], ["root-2"]),
    (["root-1"], "contribute 50", [], []),
]


def _split(payload):
    return [x.strip() for x in payload.split(",") if x.strip()]


def test_criterion_2_algorithm_trace():
    with criterion(2, "5-round SelfGoal trace matches the hand-derived sequence", 1.0):
        agent = SelfGoalAgent(
            "sg", scripted(TRACE_SCRIPT, TRACE_VECS),
            tree_config=TreeConfig(xi=0.8, search_k=2, stop_n=2, prune_after=2),
        )
        sink = bind(agent)
        trace, init_ids = [], None
        for t in range(1, 6):
            start = len(sink.events)
            agent.decide(pg_obs(t))
            events = sink.events[start:]
            sel_at = next(i for i, e in enumerate(events) if e.kind == "search_selection")
            if t == 1:
                init = [e for e in events[:sel_at] if e.kind == "tree_insert"]
                init_ids = [p.split(":")[0] for e in init for p in e.payload.split("; ")]
            after = events[sel_at:]
            trace.append((
                _split(after[0].payload),
                next(e.payload for e in after if e.kind == "action"),
                [p.split(":")[0] for e in after if e.kind == "tree_insert" for p in e.payload.split("; ")],
                [x for e in after if e.kind == "tree_prune" for x in _split(e.payload)],
            ))
        assert init_ids == ["root-0", "root-1", "root-2"]
        assert trace == EXPECTED_TRACE
        assert [n.id for n in agent.tree.nodes()] == ["root", "root-0", "root-0-0", "root-1"]


# 3 ------------------------------------------------------------------------------------------


def brute_g23(choices):
    target = 2 / 3 * sum(choices) / len(choices)
    dist = [abs(c - target) for c in choices]
    best = min(dist)
    return [i for i, d in enumerate(dist) if d == best], target


def test_criterion_3_game_accounting():
    rng = random.Random(2024)
    with criterion(3, "payoff closed form, conservation, g23 oracle, auction and bargaining identities", 10.0):
        for _ in range(200):
            c = [rng.uniform(0, 100) for _ in range(5)]
            pay = pg_payoffs(c, 2, 5, 100)
            pot = 2 / 5 * sum(c)
            assert all(math.isclose(p, 100 - ci + pot, rel_tol=0, abs_tol=1e-9) for p, ci in zip(pay, c))
            assert math.isclose(sum(pay), 5 * 100 + (2 - 1) * sum(c), rel_tol=1e-15, abs_tol=1e-9)
        for _ in range(500):
            n = rng.randint(2, 8)
            choices = [rng.choice([rng.uniform(0, 100), float(rng.randint(0, 100))]) for _ in range(n)]
            winners, target = g23_winners(choices)
            b_winners, b_target = brute_g23(choices)
            assert winners == b_winners and math.isclose(target, b_target)
        variants = [
            ("budget_capped_truthful_bidder", {"margin": 1.0}),
            ("budget_capped_truthful_bidder", {"margin": 1.3}),
            ("uniform_random", {}),
        ]
        for g in range(100):
            game = AuctionGame(4, AuctionParams(budget=15000.0))
            agents = []
            for i in range(4):
                variant, values = variants[(g + i) % 3]
                agents.append(RuleAgent(f"b{i}", RuleAgentParams(variant, {**values, "seed": g * 10 + i} if variant == "uniform_random" else values)))
            sink = EventSink()
            for a in agents:
                a.bind(game, sink)
            out = game.play(agents, 0, random.Random(g), sink)
            spent = {a.label: 0.0 for a in agents}
            profit = {a.label: 0.0 for a in agents}
            for rnd in out.rounds:
                left = {k: 15000.0 - spent[k] for k in spent}
                assert all(price <= left[who] for who, price in rnd["bids"])
                if rnd["winner"] is not None:
                    spent[rnd["winner"]] += rnd["price"]
                    profit[rnd["winner"]] += rnd["value"] - rnd["price"]
            for k in spent:
                assert spent[k] <= 15000.0 and out.extra["budgets"][k] == pytest.approx(15000.0 - spent[k])
                assert out.payoffs[k] == pytest.approx(profit[k])
            assert sum(out.payoffs.values()) == pytest.approx(
                sum(r["value"] - r["price"] for r in out.rounds if r["winner"] is not None)
            )
        brng = random.Random(7)
        for m in range(100):
            session = sample_session(["alice", "bob"], brng)
            floors = (0.3 + 0.05 * (m % 8), 0.3 + 0.05 * ((m // 8) % 8))
            agents = [RuleAgent(l, RuleAgentParams("threshold_negotiator", {"accept_floor": f})) for l, f in zip(("alice", "bob"), floors)]
            game = BargainingGame()
            sink = EventSink()
            for a in agents:
                a.bind(game, sink)
            out = game.play(agents, m, brng, sink, session=session)
            if out.extra["deal"]:
                alloc = out.extra["allocation"]
                for item, n in session.item_counts.items():
                    assert alloc["alice"][item] + alloc["bob"][item] == n
                    assert alloc["alice"][item] >= 0 and alloc["bob"][item] >= 0
                for who in ("alice", "bob"):
                    assert out.payoffs[who] == sum(alloc[who][i] * session.valuations[who][i] for i in alloc[who])
            else:
                assert out.payoffs == {"alice": 0.0, "bob": 0.0}


# 4 ------------------------------------------------------------------------------------------


def test_criterion_4_dominance_oracle():
    rng = random.Random(4)
    with criterion(4, "zero contribution is the best response; payoff falls with own contribution", 5.0):
        for _ in range(1000):
            others = [rng.uniform(0, 100) for _ in range(4)]
            assert pg_best_response_oracle(others, 2, 5, 100) == 0
        for others in itertools.product(range(11), repeat=4):
            own = [pg_payoffs([c, *others], 2, 5, 10)[0] for c in range(11)]
            assert all(a > b for a, b in zip(own, own[1:]))


# 5 ------------------------------------------------------------------------------------------


class ClimbingLevelK(Agent):
    """Level-k reasoner whose k equals the repeat index."""

    def act(self, obs):
        return rule_action(RuleAgentParams("level_k", {"k": self.repeat}), obs)


def test_criterion_5_level_k():
    with criterion(5, "level-k values and a climbing-k population's S2", 5.0):
        for k in range(7):
            assert abs(level_k_choice(k) - (2 / 3) ** k * 50) < 0.01
        game = GuessTwoThirdsGame(5)
        agents = [ClimbingLevelK(f"p{i}") for i in range(5)]
        sink = EventSink()
        for a in agents:
            a.bind(game, sink)
        s2 = []
        for r in range(15):
            for a in agents:
                a.begin_repeat(r)
            out = game.play(agents, r, random.Random(r), sink)
            s2.append(score_s2([[out.extra["choices"][a.label]] for a in agents]))
        assert all(x < y for x, y in zip(s2, s2[1:]))
        assert s2[0] == pytest.approx(50) and 100 - s2[-1] < 0.5


# 6 ------------------------------------------------------------------------------------------


def test_criterion_6_scores():
    with criterion(6, "S1-S4 boundary cases and fixtures", 5.0):
        assert score_s1([[0] * 5] * 5) == 0 and score_s1([[100] * 5] * 5) == 100
        assert score_s2([[0] * 5] * 5) == 100 and score_s2([[100] * 5] * 5) == 0
        game = GuessTwoThirdsGame(5)
        agents = [RuleAgent(f"p{i}", RuleAgentParams("level_k", {"k": 1})) for i in range(5)]
        sink = EventSink()
        for a in agents:
            a.bind(game, sink)
        rows = {a.label: [] for a in agents}
        for r in range(3):
            out = game.play(agents, r, random.Random(r), sink)
            for k, v in out.extra["choices"].items():
                rows[k].append(v)
        assert abs(score_s2(list(rows.values())) - 66.67) <= 0.01
        assert score_s4([(8, 2)]) == 6.0
        assert score_s4([(8, 2), (5, 5)]) == 3.0
        assert score_s4([(0, 0), (0, 0)]) == 0.0


# 7 ------------------------------------------------------------------------------------------


def round_robin(seed):
    rng = random.Random(seed)
    labels = ["dominant", "w1", "w2", "w3"]
    matches = []
    for a, b in itertools.combinations(labels, 2):
        for _ in range(5):
            if a == "dominant":
                ranks = [1, 2]
            else:
                ranks = rng.choice([[1, 2], [2, 1], [1, 1]])
            matches.append(MatchResult([a, b], ranks))
    rng.shuffle(matches)
    return leaderboard(matches, labels=labels)


def test_criterion_7_trueskill():
    rng = random.Random(77)
    with criterion(7, "TrueSkill vs oracle (50 cases), 1000-update properties, round-robin dominance", 60.0):
        worst = 0.0
        for _ in range(50):
            r1 = Rating(rng.uniform(10, 40), rng.uniform(1, 9))
            r2 = Rating(rng.uniform(10, 40), rng.uniform(1, 9))
            outcome = rng.choice(["win", "loss", "draw"])
            ranks = {"win": [1, 2], "loss": [2, 1], "draw": [1, 1]}[outcome]
            a, b = trueskill_update([r1, r2], MatchResult(["p", "q"], ranks))
            oa, ob = trueskill_oracle_2p(r1, r2, outcome)
            worst = max(worst, abs(a.mu - oa.mu), abs(a.sigma - oa.sigma), abs(b.mu - ob.mu), abs(b.sigma - ob.sigma))
        assert worst < 1e-3
        # the contraction property concerns the measurement update, so dynamics noise is off here
        params = TrueSkillParams(gamma=0.0)
        for _ in range(1000):
            r1 = Rating(rng.uniform(0, 50), rng.uniform(0.5, 12))
            r2 = Rating(rng.uniform(0, 50), rng.uniform(0.5, 12))
            a, b = trueskill_update([r1, r2], MatchResult(["p", "q"], [1, 2]), params)
            assert a.sigma <= r1.sigma and b.sigma <= r2.sigma
            assert a.mu >= r1.mu and b.mu <= r2.mu
        tops = sum(round_robin(seed)[0][0] == "dominant" for seed in range(20))
        assert tops / 20 >= 0.95


# 8 ------------------------------------------------------------------------------------------


def test_criterion_8_baseline_contracts():
    with criterion(8, "Reflexion length, CLIN regeneration, static ADAPT plan", 1.0):
        refl = ReflexionAgent("x", scripted({"x/act/*": "contribute 1", "x/reflect/*": "Hold back early."}))
        bind(refl)
        for t in range(1, 8):
            refl.decide(pg_obs(t))
            assert len(refl.reflections) == t

        verbatim = "X MAY BE NECCESSARY to Y."
        clin = ClinAgent("c", scripted({
            "c/act/*": "contribute 1",
            "c/clin/1": f"1. {verbatim}",
            "c/clin/2": "1. Cooperation SHOULD BE NECCESSARY to high totals.\n2. Free riding DOES NOT CONTRIBUTE to trust.\n3. nonsense",
            "c/clin/3": "no numbered list at all",
        }))
        bind(clin)
        clin.decide(pg_obs(1))
        assert clin.learnings == [verbatim] and is_causal_learning(verbatim)
        clin.decide(pg_obs(2))
        clin.decide(pg_obs(3))
        assert clin.learnings == ["Cooperation SHOULD BE NECCESSARY to high totals.", "Free riding DOES NOT CONTRIBUTE to trust."]
        assert all(is_causal_learning(x) for x in clin.learnings)

        adapt = AdaptAgent("a", scripted({
            "a/plan/0": "1. Read the table\n2. Protect tokens",
            "a/plan/0/*": "1. First step\n2. Second step",
            "a/act/*": "contribute 2",
        }))
        sink = bind(adapt)
        for t in range(1, 11):
            adapt.decide(pg_obs(t))
        plan = "\n".join(adapt.plan)
        acts = [json.loads(e.payload) for e in sink.events if e.kind == "prompt" and "/act/" in e.payload]
        assert plan in acts[0]["messages"][-1]["content"] and plan in acts[-1]["messages"][-1]["content"]
        assert len(adapt.plan) == 6


# 9 ------------------------------------------------------------------------------------------


def test_criterion_9_end_to_end_determinism(tmp_path):
    with criterion(9, "bundled demo reproduces its digest; a new seed changes it", 5.0):
        config = ExperimentConfig.load(demo_config_path())
        first = run_experiment(config, tmp_path / "one")
        second = run_experiment(ExperimentConfig.load(demo_config_path()), tmp_path / "two")
        assert first.digest() == second.digest()
        assert RunRecord.load(first.path).digest() == first.digest()
        other = run_experiment(config.replace(master_seed=config.master_seed + 1), tmp_path / "three")
        assert other.digest() != first.digest()


# 10 -----------------------------------------------------------------------------------------

PG_GOAL = make_game(EnvSpec("public_goods")).goal
SWEEP_VECS = {
    PG_GOAL: unit((0, 1)),
    "X": unit((1, 1)),
    "P": unit((1, 0.65), (2, (1 - 0.65 ** 2) ** 0.5)),
    "Q": unit((1, 0.75), (3, (1 - 0.75 ** 2) ** 0.5)),
    "R": unit((1, 0.85), (4, (1 - 0.85 ** 2) ** 0.5)),
}


def sg_config(agents, backends, repeats=1):
    return ExperimentConfig.from_dict({
        "env": {"kind": "public_goods", "n_players": 2},
        "repeats": repeats,
        "master_seed": 3,
        "backends": backends,
        "agents": [*agents, {"label": "q", "kind": "rule", "rule": {"variant": "fixed_contribution", "c": 0}}],
    })


def test_criterion_10_ablation_harness(tmp_path):
    with criterion(10, "xi sweep is monotone on straddling fixtures; search strategies and split backends run", 10.0):
        sweep_backend = {"s": {"type": "scripted", "embeddings": SWEEP_VECS, "embedding_fallback": "error", "replies": {
            "sg/decompose/0": "1. X",
            "sg/decompose/1/root-0": "1. P\n2. Q\n3. R",
            "sg/search/*": '{"IDs": [0]}',
            "sg/act/*": "contribute 5",
        }}}
        base = sg_config([{"label": "sg", "kind": "selfgoal", "act_backend": "s", "tree_config": {"search_k": 1}}], sweep_backend)
        rows = sweep_xi(base, [0.6, 0.7, 0.8, 0.9], tmp_path / "sweep")
        assert [r["xi"] for r in rows] == [0.6, 0.7, 0.8, 0.9]
        assert [r["tree_nodes"] for r in rows] == [2, 3, 4, 5]

        generic = {"type": "scripted", "replies": {
            "*/decompose/0": "1. Watch the pot\n2. Count free riders\n3. Keep a reserve",
            "*/decompose/*": "1. Compare rounds",
            "*/search/*": '{"IDs": [0, 1]}',
            "*/act/*": "contribute 5",
        }}
        for strategy in ("llm", "embedding", "random"):
            cfg = sg_config(
                [{"label": "sg", "kind": "selfgoal", "act_backend": "s", "search_strategy": strategy,
                  "tree_config": {"search_k": 2}}],
                {"s": generic}, repeats=3,
            )
            rec = run_experiment(cfg, tmp_path / strategy)
            searched = any(e.kind == "prompt" and '"sg/search/' in e.payload for e in rec.events)
            assert rec.complete and searched == (strategy == "llm")
            assert len(rec.trees["sg"]) == 3

        split = sg_config(
            [{"label": "sg", "kind": "selfgoal", "act_backend": "small", "tree_backend": "big", "tree_config": {"search_k": 2}}],
            {
                "big": {"type": "scripted", "replies": {k: v for k, v in generic["replies"].items() if "/act/" not in k}},
                "small": {"type": "scripted", "replies": {"*/act/*": "contribute 5"}},
            },
            repeats=3,
        )
        rec = run_experiment(split, tmp_path / "split")
        usage = rec.accounting["usage"]
        assert usage["small"]["calls"] == 3
        assert usage["big"]["calls"] == 1 + 3 + 3 * 2  # init, one search per step, two decompositions per step


# 11 (optional) --------------------------------------------------------------------------------


@pytest.mark.skipif(not os.environ.get("SELFGOAL_LIVE_BASE_URL"), reason="set SELFGOAL_LIVE_BASE_URL and SELFGOAL_LIVE_MODEL for the live smoke run")
def test_criterion_11_live_smoke(tmp_path):
    backend = {
        "type": "remote",
        "base_url": os.environ["SELFGOAL_LIVE_BASE_URL"],
        "model": os.environ.get("SELFGOAL_LIVE_MODEL", "gpt-3.5-turbo"),
        "api_key_env": os.environ.get("SELFGOAL_LIVE_KEY_ENV", "OPENAI_API_KEY"),
    }
    config = ExperimentConfig.from_dict({
        "env": {"kind": "guess_two_thirds", "n_players": 5},
        "repeats": 2,
        "backends": {"live": backend},
        "agents": [{"label": f"sg{i}", "kind": "selfgoal", "act_backend": "live"} for i in range(5)],
    })
    with criterion(11, "live 2-repeat Guess-2/3 run with five SelfGoal agents", 1800.0):
        rec = run_experiment(config, tmp_path)
        assert rec.complete
        assert max(len(GoalTree.from_dict(s)) for snaps in rec.trees.values() for s in snaps.values()) >= 5
        assert RunRecord.load(rec.path).digest() == rec.digest()
