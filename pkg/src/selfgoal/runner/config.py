"""Experiment configuration: loading, validation and the canonical digest."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..agents import PolicySpec
from ..environments import STATEFUL_KINDS, EnvSpec
from ..errors import ConfigError, ParseError

BACKEND_TYPES = ("scripted", "remote")


def load_document(path: str | Path) -> Any:
    """Parse a YAML or JSON file (JSON is read by the YAML loader too)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=path) from exc
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(str(exc.problem or exc), line=line, column=col, path=path) from exc
    except yaml.YAMLError as exc:
        raise ParseError(str(exc), path=path) from exc


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


@dataclass
class BackendSpec:
    name: str
    type: str
    options: dict = field(default_factory=dict)
    cache_dir: str | None = None

    def __post_init__(self):
        if self.type not in BACKEND_TYPES:
            raise ConfigError(f"backend {self.name!r}: type must be one of {BACKEND_TYPES}")
        if self.type == "scripted" and not ({"script", "replies"} & set(self.options)):
            raise ConfigError(f"scripted backend {self.name!r} needs 'script' (a file) or inline 'replies'")
        if self.type == "remote":
            for key in ("base_url", "model"):
                if key not in self.options:
                    raise ConfigError(f"remote backend {self.name!r} needs {key!r}")
            # only the variable's name may appear in a config, never its value
            if "api_key" in self.options:
                raise ConfigError(f"backend {self.name!r}: put the credential in an environment variable "
                                  "and name it with 'api_key_env'")

    @classmethod
    def from_dict(cls, name: str, data: Mapping) -> "BackendSpec":
        if not isinstance(data, Mapping):
            raise ConfigError(f"backend {name!r} must be a mapping")
        data = dict(data)
        kind = data.pop("type", None)
        cache_dir = data.pop("cache_dir", None)
        return cls(name, kind, data, cache_dir)

    def to_dict(self) -> dict:
        out = {"type": self.type, **self.options}
        if self.cache_dir is not None:
            out["cache_dir"] = self.cache_dir
        return out


@dataclass
class AgentEntry:
    label: str
    policy: PolicySpec

    def to_dict(self) -> dict:
        return {"label": self.label, **self.policy.to_dict()}


@dataclass
class ExperimentConfig:
    env: EnvSpec
    agents: list[AgentEntry]
    backends: dict[str, BackendSpec] = field(default_factory=dict)
    repeats: int | None = None
    master_seed: int = 0
    output_dir: str = "runs"
    snapshot_trees: bool = True
    parallelism: int = 1
    reset_memory: bool = False
    base_dir: Path = field(default_factory=Path.cwd, compare=False)

    def __post_init__(self):
        if self.repeats is None:
            self.repeats = self.env.repeats
        if not isinstance(self.repeats, int) or self.repeats < 1:
            raise ConfigError("repeats must be a positive integer")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int):
            raise ConfigError("master_seed must be an integer")
        if not isinstance(self.parallelism, int) or self.parallelism < 1:
            raise ConfigError("parallelism must be an integer >= 1")
        labels = [a.label for a in self.agents]
        if len(labels) != self.env.n_players:
            raise ConfigError(f"{self.env.kind} is configured for {self.env.n_players} players "
                              f"but {len(labels)} agents are listed")
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        if dupes:
            raise ConfigError(f"agent labels must be unique; repeated: {dupes}")
        for entry in self.agents:
            if not entry.label or "/" in entry.label:
                raise ConfigError(f"agent label {entry.label!r} must be nonempty and contain no '/'")
            for name in entry.policy.backend_names():
                if name not in self.backends:
                    raise ConfigError(f"agent {entry.label!r} refers to undefined backend {name!r}")
        if self.parallelism > 1:
            if not self.reset_memory:
                raise ConfigError("parallel repeats need reset_memory: true, since persistent memory "
                                  "makes every repeat depend on the previous one")
            if self.env.kind in STATEFUL_KINDS:
                raise ConfigError(f"{self.env.kind} carries public history across repeats; "
                                  "its repeats must run sequentially")

    # -- construction ------------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | Path | None = None) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("an experiment config must be a mapping")
        known = {"env", "agents", "backends", "repeats", "master_seed", "output_dir", "snapshot_trees",
                 "parallelism", "reset_memory"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("env", "agents"):
            if key not in data:
                raise ConfigError(f"config is missing {key!r}")
        env = data["env"]
        if isinstance(env, str):
            env = {"kind": env}
        if not isinstance(env, Mapping):
            raise ConfigError("env must be a mapping with at least 'kind'")
        try:
            env_spec = EnvSpec(**env)
        except TypeError as exc:
            raise ConfigError(f"bad env section: {exc}") from exc
        agents = []
        for item in data["agents"] or []:
            if not isinstance(item, Mapping) or "label" not in item:
                raise ConfigError("each agent needs a 'label'")
            item = dict(item)
            label = str(item.pop("label"))
            agents.append(AgentEntry(label, PolicySpec.from_dict(item)))
        backends = {name: BackendSpec.from_dict(name, spec) for name, spec in (data.get("backends") or {}).items()}
        return cls(
            env=env_spec,
            agents=agents,
            backends=backends,
            repeats=data.get("repeats"),
            master_seed=data.get("master_seed", 0),
            output_dir=str(data.get("output_dir", "runs")),
            snapshot_trees=bool(data.get("snapshot_trees", True)),
            parallelism=data.get("parallelism", 1),
            reset_memory=bool(data.get("reset_memory", False)),
            base_dir=Path(base_dir) if base_dir is not None else Path.cwd(),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        doc = load_document(path)
        try:
            return cls.from_dict(doc, base_dir=path.parent)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "env": self.env.to_dict(),
            "agents": [a.to_dict() for a in self.agents],
            "backends": {k: v.to_dict() for k, v in self.backends.items()},
            "repeats": self.repeats,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "snapshot_trees": self.snapshot_trees,
            "parallelism": self.parallelism,
            "reset_memory": self.reset_memory,
        }

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig.from_dict(copy.deepcopy(data), base_dir=self.base_dir)

    def resolve(self, relative: str | Path) -> Path:
        p = Path(relative)
        return p if p.is_absolute() else self.base_dir / p

    def digest(self) -> str:
        """Identity of the experiment: every setting that can change the outcome.

        Script files enter by content, so editing a script moves the record.
        ``output_dir`` and ``parallelism`` are left out; they do not affect results.
        """
        data = self.to_dict()
        data.pop("output_dir")
        data.pop("parallelism")
        for name, spec in self.backends.items():
            if spec.type == "scripted" and "script" in spec.options:
                path = self.resolve(spec.options["script"])
                try:
                    content = path.read_bytes()
                except OSError as exc:
                    raise ConfigError(f"backend {name!r}: cannot read script {path}: {exc.strerror}") from exc
                data["backends"][name]["script"] = hashlib.sha256(content).hexdigest()
            data["backends"][name].pop("cache_dir", None)
        return sha256_hex(data)[:16]


def derive_seed(*parts: Any) -> int:
    """Stable 63-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    h = hashlib.sha256(canonical_json([str(p) for p in parts]).encode()).digest()
    return int.from_bytes(h[:8], "big") >> 1
