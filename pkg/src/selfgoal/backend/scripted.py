"""Deterministic backend that replays pre-authored replies keyed by request tag.

Script document layout (YAML or JSON)::

    replies:
      "alice/act/3": ["I bid $5000"]          # list: one reply per call, in order
      "*/search/*": '{"IDs": [0, 1]}'         # string: same reply on every call
      "bob/act/1":
        - reply: "contribute 10"
          digest: 3f2a9c                      # optional request-digest prefix check
    embeddings:
      "Monitor other bidders": [1.0, 0.0]
    embedding_fallback: hash                  # or "error"

Keys are matched exactly first, then as shell-style globs in document order.
A list entry is indexed by how many times that concrete tag has been requested;
running past its end raises ScriptExhausted.
"""

from __future__ import annotations

import fnmatch
import threading
from collections import Counter
from pathlib import Path
from typing import Any, Mapping

from ..errors import BackendError, ConfigError, ScriptExhausted
from .base import CompletionRequest, UsageStats
from .embedding import FixtureEmbedder, HashingEmbedder


class ScriptedBackend:
    def __init__(
        self,
        replies: Mapping[str, Any],
        embeddings: Mapping[str, list[float]] | None = None,
        embedding_fallback: str = "hash",
        name: str = "scripted",
        model: str = "scripted",
    ):
        self.name = name
        self.model = model
        self.replies = dict(replies)
        for key, value in self.replies.items():
            if not isinstance(value, (str, list)):
                raise ConfigError(f"script entry {key!r} must be a string or a list")
        if embedding_fallback not in ("hash", "error"):
            raise ConfigError(f"embedding_fallback must be 'hash' or 'error', got {embedding_fallback!r}")
        fallback = HashingEmbedder() if embedding_fallback == "hash" else None
        self.embedder = FixtureEmbedder(embeddings or {}, fallback=fallback)
        self.stats = UsageStats()
        self._seen: Counter[str] = Counter()
        self._lock = threading.Lock()

    @classmethod
    def from_document(cls, doc: Mapping[str, Any], **kwargs) -> "ScriptedBackend":
        if not isinstance(doc, Mapping) or "replies" not in doc:
            raise ConfigError("script document needs a top-level 'replies' mapping")
        return cls(
            doc["replies"] or {},
            embeddings=doc.get("embeddings"),
            embedding_fallback=doc.get("embedding_fallback", "hash"),
            **kwargs,
        )

    @classmethod
    def from_file(cls, path: str | Path, **kwargs) -> "ScriptedBackend":
        from ..runner.config import load_document

        return cls.from_document(load_document(path), **kwargs)

    def _lookup(self, tag: str):
        if tag in self.replies:
            return self.replies[tag]
        for pattern, value in self.replies.items():
            if fnmatch.fnmatchcase(tag, pattern):
                return value
        return None

    def complete(self, request: CompletionRequest) -> str:
        tag = request.tag
        with self._lock:
            seq = self._seen[tag]
            self._seen[tag] += 1
        entry = self._lookup(tag)
        if entry is None:
            raise ScriptExhausted(f"script has no entry for tag {tag!r}")
        if isinstance(entry, str):
            reply = entry
        else:
            if seq >= len(entry):
                raise ScriptExhausted(f"script for tag {tag!r} has {len(entry)} replies; call #{seq + 1} requested")
            reply = entry[seq]
        if isinstance(reply, Mapping):
            expected = str(reply.get("digest", ""))
            if expected and not request.digest(self.model).startswith(expected):
                raise BackendError(
                    f"prompt drift on tag {tag!r}: digest {request.digest(self.model)[:12]} "
                    f"does not start with {expected}"
                )
            reply = reply["reply"]
        reply = str(reply)
        self.stats.add(request, reply)
        return reply

    def embed(self, text: str) -> list[float]:
        with self._lock:
            self.stats.embed_calls += 1
        return self.embedder.embed(text)

    def calls_for(self, tag: str) -> int:
        return self._seen[tag]
