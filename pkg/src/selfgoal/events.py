"""Transcript event sinks shared by agents, games and the runner."""

from __future__ import annotations

import logging
import threading
from dataclasses import asdict, dataclass

log = logging.getLogger("selfgoal")

EVENT_KINDS = (
    "prompt",
    "reply",
    "action",
    "env_announcement",
    "tree_insert",
    "tree_prune",
    "search_selection",
    "warning",
)


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    repeat: int
    round: int
    agent: str
    kind: str
    payload: str

    def to_dict(self) -> dict:
        return asdict(self)


class EventSink:
    """Collects events in memory; subclasses may also persist them."""

    def __init__(self):
        self.events: list[TranscriptEvent] = []
        self.repeat = 0
        self.round = 0
        self._lock = threading.Lock()

    def set_position(self, repeat: int | None = None, round: int | None = None) -> None:
        if repeat is not None:
            self.repeat = repeat
        if round is not None:
            self.round = round

    def emit(self, kind: str, payload: str, agent: str = "") -> TranscriptEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        if kind == "warning":
            log.warning("[%s] %s", agent or "env", payload)
        with self._lock:
            event = TranscriptEvent(len(self.events), self.repeat, self.round, agent, kind, payload)
            self.events.append(event)
            self._write(event)
        return event

    def _write(self, event: TranscriptEvent) -> None:
        pass

    def close(self) -> None:
        pass


class NullSink(EventSink):
    """Discards events (still logs warnings)."""

    def emit(self, kind: str, payload: str, agent: str = "") -> TranscriptEvent:
        if kind == "warning":
            log.warning("[%s] %s", agent or "env", payload)
        return TranscriptEvent(-1, self.repeat, self.round, agent, kind, payload)
