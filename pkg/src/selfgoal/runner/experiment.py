"""Run one configured experiment end to end and persist its record."""

from __future__ import annotations

import random
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..agents import SelfGoalAgent, build_agent
from ..backend import CachedBackend, RemoteBackend, ScriptedBackend
from ..environments import STATEFUL_KINDS, make_game
from ..errors import ExperimentAborted, SelfGoalError
from ..metrics import MatchResult, TrueSkillParams, leaderboard, ranks_from_scores, score_s1, score_s2, score_s4
from .config import ExperimentConfig, derive_seed
from .record import EVENTS_FILE, FileSink, MemorySink, RunRecord, snapshot_name

METRICS = {"public_goods": "S1", "guess_two_thirds": "S2", "auction": "S3", "bargaining": "S4"}


def build_backends(config: ExperimentConfig, only_scripted: bool = False) -> dict:
    out = {}
    for name, spec in config.backends.items():
        if spec.type == "scripted":
            opts = dict(spec.options)
            if "script" in opts:
                backend = ScriptedBackend.from_file(config.resolve(opts.pop("script")), name=name, **opts)
            else:
                backend = ScriptedBackend.from_document(opts, name=name)
        elif only_scripted:
            continue
        else:
            backend = RemoteBackend(name=name, **spec.options)
        if spec.cache_dir:
            backend = CachedBackend(backend, config.resolve(spec.cache_dir))
        out[name] = backend
    return out


def _usage(backends: dict) -> dict:
    return {name: b.stats.to_dict() for name, b in backends.items() if hasattr(b, "stats")}


def _merge_usage(total: dict, more: dict) -> None:
    for name, stats in more.items():
        slot = total.setdefault(name, {})
        for k, v in stats.items():
            slot[k] = slot.get(k, 0) + v


class _Replica:
    """Agents (and, in reset mode, private scripted backends) for one or more repeats."""

    def __init__(self, config: ExperimentConfig, game, sink, backends: dict, seed_parts: tuple, record: RunRecord):
        self.config = config
        self.game = game
        self.sink = sink
        self.backends = backends
        self.record = record
        self.agents = []
        for entry in config.agents:
            agent = build_agent(
                entry.label, entry.policy, backends, seed=derive_seed(config.master_seed, "agent", entry.label, *seed_parts)
            )
            agent.bind(game, sink)
            if isinstance(agent, SelfGoalAgent) and config.snapshot_trees:
                agent.listeners.append(self.snapshot)
            self.agents.append(agent)

    def snapshot(self, agent) -> None:
        if agent.tree is not None:
            self.record.trees.setdefault(agent.label, {})[snapshot_name(agent.repeat, agent.step)] = agent.tree.to_dict()

    def prepare(self, repeat: int) -> None:
        self.sink.set_position(repeat=repeat, round=0)
        for agent in self.agents:
            agent.prepare()

    def play(self, repeat: int) -> dict:
        self.sink.set_position(repeat=repeat, round=0)
        for agent in self.agents:
            agent.begin_repeat(repeat)
        rng = random.Random(derive_seed(self.config.master_seed, "repeat", repeat))
        outcome = self.game.play(self.agents, repeat, rng, self.sink)
        for agent in self.agents:
            if isinstance(agent, SelfGoalAgent):
                self.snapshot(agent)
        return outcome.to_dict()


def run_experiment(config: ExperimentConfig, output_dir: str | Path | None = None) -> RunRecord:
    """Run every repeat, write the record under ``<output_dir>/<config_digest>/`` and return it.

    On any package error the partial record is flushed with ``complete = False``
    and :class:`ExperimentAborted` is raised carrying it.
    """
    digest = config.digest()
    # output_dir is relative to the working directory; script paths are relative to the config file
    root = Path(output_dir) if output_dir is not None else Path(config.output_dir)
    root = root / digest
    if (root / "trees").exists():
        shutil.rmtree(root / "trees")
    root.mkdir(parents=True, exist_ok=True)
    record = RunRecord(config.to_dict(), digest)
    sink = FileSink(root / EVENTS_FILE)
    record.events = sink.events
    usage: dict = {}
    started = time.perf_counter()
    try:
        shared = build_backends(config)
        if config.reset_memory:
            _run_replicas(config, shared, sink, record, usage)
        else:
            game = make_game(config.env)
            replica = _Replica(config, game, sink, shared, (), record)
            replica.prepare(0)
            for r in range(config.repeats):
                record.outcomes.append(replica.play(r))
        _merge_usage(usage, _usage(shared))
        record.complete = True
    except SelfGoalError as exc:
        record.error = f"{type(exc).__name__}: {exc}"
    finally:
        sink.close()
        record.events = list(sink.events)
        record.scores = compute_scores(config, record.outcomes) if record.outcomes else {}
        record.accounting = {"wall_clock_s": round(time.perf_counter() - started, 6), "usage": usage}
        record.write(root)
    if not record.complete:
        raise ExperimentAborted(f"run aborted after {len(record.outcomes)} repeat(s): {record.error}", record)
    return record


def _run_replicas(config: ExperimentConfig, shared: dict, sink: FileSink, record: RunRecord, usage: dict) -> None:
    """Reset mode: each repeat gets fresh agents and its own scripted backends."""
    stateful_game = make_game(config.env) if config.env.kind in STATEFUL_KINDS else None

    def one(r: int, out_sink):
        private = {**shared, **build_backends(config, only_scripted=True)}
        game = stateful_game or make_game(config.env)
        replica = _Replica(config, game, out_sink, private, ("repeat", r), record)
        replica.prepare(r)
        outcome = replica.play(r)
        return outcome, _usage({k: v for k, v in private.items() if k not in shared or v is not shared[k]})

    if config.parallelism == 1:
        for r in range(config.repeats):
            outcome, used = one(r, sink)
            record.outcomes.append(outcome)
            _merge_usage(usage, used)
        return
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        sinks = [MemorySink() for _ in range(config.repeats)]
        futures = [pool.submit(one, r, sinks[r]) for r in range(config.repeats)]
        # collect in repeat order; stop at the first failure after flushing what finished before it
        for r, fut in enumerate(futures):
            outcome, used = fut.result()
            sink.absorb(sinks[r].events)
            record.outcomes.append(outcome)
            _merge_usage(usage, used)


# -- scoring ---------------------------------------------------------------------------


def _std(values) -> float:
    return float(np.std(values)) if len(values) > 1 else 0.0


def matches_from_outcomes(labels: list[str], outcomes: list[dict]) -> list[MatchResult]:
    """One ranked match per repeat, ranked by payoff."""
    return [MatchResult(labels, ranks_from_scores([o["payoffs"][k] for k in labels])) for o in outcomes]


def compute_scores(config: ExperimentConfig, outcomes: list[dict]) -> dict:
    kind = config.env.kind
    labels = [a.label for a in config.agents]
    per_agent: dict[str, dict] = {}
    out: dict = {"metric": METRICS[kind], "repeats": len(outcomes)}
    for entry in config.agents:
        per_agent[entry.label] = {
            "framework": entry.policy.kind,
            "backend": entry.policy.act_backend or "rule",
        }
    if kind == "public_goods":
        endowment = float(config.env.params.get("endowment", 100))
        series = {k: [o["extra"]["contributions"][k] for o in outcomes] for k in labels}
        for k in labels:
            pct = [c / endowment * 100 for c in series[k]]
            per_agent[k].update(score=score_s1([series[k]], endowment), std=_std(pct), per_repeat=pct)
        out.update(higher_is_better=False, overall=score_s1([series[k] for k in labels], endowment))
    elif kind == "guess_two_thirds":
        series = {k: [o["extra"]["choices"][k] for o in outcomes] for k in labels}
        for k in labels:
            per_agent[k].update(
                score=score_s2([series[k]]), std=_std([100 - c for c in series[k]]), per_repeat=[100 - c for c in series[k]]
            )
        out.update(higher_is_better=True, overall=score_s2([series[k] for k in labels]))
    else:
        payoffs = {k: [o["payoffs"][k] for o in outcomes] for k in labels}
        board = leaderboard(matches_from_outcomes(labels, outcomes), TrueSkillParams(), labels=labels)
        out["leaderboard"] = [
            {"label": k, "mu": r.mu, "sigma": r.sigma, "conservative": r.conservative} for k, r in board
        ]
        ratings = dict(board)
        for k in labels:
            per_agent[k].update(
                mean_payoff=float(np.mean(payoffs[k])), per_repeat=payoffs[k], mu=ratings[k].mu, sigma=ratings[k].sigma
            )
        if kind == "auction":
            for k in labels:
                per_agent[k].update(score=ratings[k].mu, std=ratings[k].sigma)
            out.update(higher_is_better=True, overall=None)
        else:
            gaps = [abs(payoffs[labels[0]][i] - payoffs[labels[1]][i]) for i in range(len(outcomes))]
            s4 = score_s4([(payoffs[labels[0]][i], payoffs[labels[1]][i]) for i in range(len(outcomes))])
            for k in labels:
                per_agent[k].update(score=s4, std=_std(gaps))
            out.update(higher_is_better=False, overall=s4)
    out["per_agent"] = per_agent
    return out
