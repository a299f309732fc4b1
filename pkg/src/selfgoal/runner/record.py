"""Run records on disk.

Layout under ``<output_dir>/<config_digest>/``::

    config.json          resolved experiment config
    events.jsonl         one transcript event per line, appended as they happen
    outcomes.json        per-repeat game outcomes
    scores.json          final scores
    trees/<agent>/r<repeat>-t<round>.json   GoalTree snapshots
    record.json          status, record digest, wall-clock and usage accounting
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ParseError
from ..events import EventSink, TranscriptEvent
from .config import sha256_hex

EVENTS_FILE = "events.jsonl"


def snapshot_name(repeat: int, round: int) -> str:
    return f"r{repeat:03d}-t{round:04d}"


def parse_snapshot_name(name: str) -> tuple[int, int]:
    stem = name[:-5] if name.endswith(".json") else name
    r, t = stem.split("-")
    return int(r[1:]), int(t[1:])


@dataclass
class RunRecord:
    config: dict
    config_digest: str
    outcomes: list[dict] = field(default_factory=list)
    events: list[TranscriptEvent] = field(default_factory=list)
    scores: dict = field(default_factory=dict)
    trees: dict[str, dict[str, dict]] = field(default_factory=dict)
    complete: bool = False
    error: str | None = None
    # excluded from the digest
    accounting: dict = field(default_factory=dict)
    path: Path | None = None

    def digest(self) -> str:
        return sha256_hex(
            {
                "config_digest": self.config_digest,
                "outcomes": self.outcomes,
                "events": [e.to_dict() for e in self.events],
                "scores": self.scores,
                "trees": self.trees,
                "complete": self.complete,
                "error": self.error,
            }
        )

    # -- persistence -------------------------------------------------------------------

    def write(self, root: Path) -> Path:
        root.mkdir(parents=True, exist_ok=True)
        _dump(root / "config.json", self.config)
        _dump(root / "outcomes.json", self.outcomes)
        _dump(root / "scores.json", self.scores)
        for agent, snaps in self.trees.items():
            for name, tree in snaps.items():
                _dump(root / "trees" / agent / f"{name}.json", tree)
        _dump(
            root / "record.json",
            {
                "config_digest": self.config_digest,
                "record_digest": self.digest(),
                "complete": self.complete,
                "error": self.error,
                "accounting": self.accounting,
            },
        )
        self.path = root
        return root

    @classmethod
    def load(cls, root: str | Path) -> "RunRecord":
        root = Path(root)
        if not (root / "record.json").exists() and not (root / EVENTS_FILE).exists():
            raise ParseError("no run record here (record.json missing)", path=root)
        meta = _load(root / "record.json", default={})
        config = _load(root / "config.json", default={})
        trees: dict[str, dict[str, dict]] = {}
        tree_root = root / "trees"
        if tree_root.is_dir():
            for agent_dir in sorted(p for p in tree_root.iterdir() if p.is_dir()):
                trees[agent_dir.name] = {
                    f.stem: _load(f) for f in sorted(agent_dir.glob("*.json"))
                }
        rec = cls(
            config=config,
            config_digest=meta.get("config_digest", root.name),
            outcomes=_load(root / "outcomes.json", default=[]),
            events=read_events(root / EVENTS_FILE),
            scores=_load(root / "scores.json", default={}),
            trees=trees,
            complete=bool(meta.get("complete", False)),
            error=meta.get("error"),
            accounting=meta.get("accounting", {}),
            path=root,
        )
        return rec


def _dump(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _load(path: Path, default=None):
    if not path.exists():
        if default is not None:
            return default
        raise ParseError("file is missing", path=path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, path=path) from exc


def read_events(path: Path) -> list[TranscriptEvent]:
    if not path.exists():
        return []
    events = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                events.append(TranscriptEvent(**data))
            except (json.JSONDecodeError, TypeError) as exc:
                # a crash can leave a torn final line; anything earlier is corruption
                if line.endswith("\n"):
                    raise ParseError(f"bad event: {exc}", line=lineno, path=path) from exc
    return events


class FileSink(EventSink):
    """Event sink that appends every event to ``events.jsonl`` as it is emitted."""

    def __init__(self, path: Path):
        super().__init__()
        self.path = path
        path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = path.open("w", encoding="utf-8")

    def _write(self, event: TranscriptEvent) -> None:
        self._fh.write(json.dumps(event.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        self._fh.flush()

    def absorb(self, events: list[TranscriptEvent]) -> None:
        """Append events produced elsewhere (a parallel worker), renumbering them."""
        for e in events:
            with self._lock:
                event = TranscriptEvent(len(self.events), e.repeat, e.round, e.agent, e.kind, e.payload)
                self.events.append(event)
                self._write(event)

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()


class MemorySink(EventSink):
    def absorb(self, events: list[TranscriptEvent]) -> None:
        for e in events:
            with self._lock:
                self.events.append(TranscriptEvent(len(self.events), e.repeat, e.round, e.agent, e.kind, e.payload))


