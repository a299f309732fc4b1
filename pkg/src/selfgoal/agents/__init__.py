"""Agent policies and the factory that builds them from a PolicySpec."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..errors import ConfigError
from ..goaltree import TreeConfig
from .base import Agent, AgentContext, HistoryEntry, LLMAgent, load_prompt
from .baselines import AdaptAgent, ClinAgent, ReActAgent, ReflexionAgent, is_causal_learning
from .rules import RuleAgent, RuleAgentParams, rule_action
from .selfgoal import SEARCH_STRATEGIES, SelfGoalAgent

POLICY_KINDS = ("selfgoal", "react", "adapt", "reflexion", "clin", "rule")

_LLM_CLASSES = {"react": ReActAgent, "reflexion": ReflexionAgent, "clin": ClinAgent}


@dataclass
class PolicySpec:
    kind: str
    act_backend: str | None = None
    tree_backend: str | None = None
    embed_backend: str | None = None
    search_strategy: str = "llm"
    tree_config: TreeConfig | None = None
    rule: RuleAgentParams | None = None
    temperature: float = 0.0
    max_tokens: int | None = None
    history_window: int | None = None
    adapt_depth: int = 2

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.kind == "selfgoal":
            if self.tree_config is None:
                self.tree_config = TreeConfig()
            if self.search_strategy not in SEARCH_STRATEGIES:
                raise ConfigError(f"search_strategy must be one of {SEARCH_STRATEGIES}")
        if self.kind == "rule":
            if self.rule is None:
                raise ConfigError("a rule policy needs rule parameters")
        elif not self.act_backend:
            raise ConfigError(f"a {self.kind} policy needs an act_backend")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.history_window is not None and self.history_window < 0:
            raise ConfigError("history_window must be >= 0")
        if self.adapt_depth < 1:
            raise ConfigError("adapt_depth must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolicySpec":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown policy keys: {sorted(unknown)}")
        if isinstance(data.get("tree_config"), Mapping):
            try:
                data["tree_config"] = TreeConfig.from_dict(data["tree_config"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if isinstance(data.get("rule"), Mapping):
            data["rule"] = RuleAgentParams.from_dict(data["rule"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "act_backend": self.act_backend,
            "tree_backend": self.tree_backend,
            "embed_backend": self.embed_backend,
            "search_strategy": self.search_strategy,
            "tree_config": self.tree_config.to_dict() if self.tree_config else None,
            "rule": self.rule.to_dict() if self.rule else None,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "history_window": self.history_window,
            "adapt_depth": self.adapt_depth,
        }
        return out

    def backend_names(self) -> list[str]:
        return [n for n in (self.act_backend, self.tree_backend, self.embed_backend) if n]


def build_agent(label: str, spec: PolicySpec, backends: Mapping[str, object], seed: int = 0) -> Agent:
    """Instantiate the policy ``spec`` under ``label`` using named backends."""

    def pick(name):
        if name is None:
            return None
        try:
            return backends[name]
        except KeyError:
            raise ConfigError(f"agent {label!r} refers to undefined backend {name!r}") from None

    if spec.kind == "rule":
        return RuleAgent(label, spec.rule, seed=seed)
    common = dict(temperature=spec.temperature, max_tokens=spec.max_tokens, history_window=spec.history_window)
    act = pick(spec.act_backend)
    if spec.kind == "selfgoal":
        return SelfGoalAgent(
            label,
            act,
            tree_backend=pick(spec.tree_backend),
            embed_backend=pick(spec.embed_backend),
            tree_config=spec.tree_config,
            search_strategy=spec.search_strategy,
            seed=seed,
            **common,
        )
    if spec.kind == "adapt":
        return AdaptAgent(label, act, plan_backend=pick(spec.tree_backend), depth=spec.adapt_depth, **common)
    return _LLM_CLASSES[spec.kind](label, act, **common)


__all__ = [
    "AdaptAgent",
    "Agent",
    "AgentContext",
    "ClinAgent",
    "HistoryEntry",
    "LLMAgent",
    "POLICY_KINDS",
    "PolicySpec",
    "ReActAgent",
    "ReflexionAgent",
    "RuleAgent",
    "RuleAgentParams",
    "SelfGoalAgent",
    "build_agent",
    "is_causal_learning",
    "load_prompt",
    "rule_action",
]
