"""Ablation harnesses: the filtering-threshold sweep."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from ..errors import ConfigError
from .config import ExperimentConfig
from .experiment import run_experiment
from .record import RunRecord, parse_snapshot_name
from .report import Table, fmt


def tree_size(tree: dict) -> int:
    return 1 + sum(tree_size(c) for c in tree.get("children", []))


def final_tree_sizes(record: RunRecord) -> dict[str, int]:
    out = {}
    for agent, snaps in record.trees.items():
        if snaps:
            last = max(snaps, key=parse_snapshot_name)
            out[agent] = tree_size(snaps[last]["root"])
    return out


def with_xi(config: ExperimentConfig, xi: float) -> ExperimentConfig:
    data = config.to_dict()
    for agent in data["agents"]:
        if agent["kind"] == "selfgoal":
            agent["tree_config"] = {**(agent.get("tree_config") or {}), "xi": float(xi)}
    return ExperimentConfig.from_dict(data, base_dir=config.base_dir)


def sweep_xi(config: ExperimentConfig, xi_values: Sequence[float], output_dir: str | Path | None = None) -> list[dict]:
    """One run per threshold with every seed held fixed; rows follow ``xi_values`` order."""
    focal = [a.label for a in config.agents if a.policy.kind == "selfgoal"]
    if not focal:
        raise ConfigError("sweep-xi needs at least one selfgoal agent")
    if not xi_values:
        raise ConfigError("sweep-xi needs at least one xi value")
    rows = []
    for xi in xi_values:
        record = run_experiment(with_xi(config, xi), output_dir)
        per_agent = record.scores["per_agent"]
        sizes = final_tree_sizes(record)
        rows.append(
            {
                "xi": float(xi),
                "score": sum(per_agent[k]["score"] for k in focal) / len(focal),
                "uncertainty": sum(per_agent[k]["std"] for k in focal) / len(focal),
                "tree_nodes": sum(sizes.get(k, 0) for k in focal),
                "metric": record.scores["metric"],
                "record": record.config_digest,
            }
        )
    return rows


def sweep_table(rows: list[dict]) -> Table:
    return Table(
        ["xi", "metric", "score", "uncertainty", "tree_nodes", "record"],
        [[f"{r['xi']:g}", r["metric"], fmt(r["score"]), fmt(r["uncertainty"]), str(r["tree_nodes"]), r["record"]] for r in rows],
        "Filtering threshold sweep",
    )
