"""Content-addressed reply cache wrapping any backend."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .base import CompletionRequest, UsageStats


class CachedBackend:
    """One file per request digest holding the verbatim reply.

    Tags are labels, not cache keys, unless ``include_tag`` is set.
    """

    def __init__(self, inner, directory: str | Path, include_tag: bool = False):
        self.inner = inner
        self.name = getattr(inner, "name", "cached")
        self.model = getattr(inner, "model", "")
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.include_tag = include_tag
        self.hits = 0
        self.misses = 0

    @property
    def stats(self) -> UsageStats:
        return self.inner.stats

    def path_for(self, request: CompletionRequest) -> Path:
        digest = request.digest(self.model, include_tag=self.include_tag)
        return self.directory / f"{digest}.txt"

    def complete(self, request: CompletionRequest) -> str:
        path = self.path_for(request)
        try:
            reply = path.read_bytes().decode("utf-8")
            self.hits += 1
            return reply
        except FileNotFoundError:
            pass
        reply = self.inner.complete(request)
        self.misses += 1
        # atomic publish; concurrent writers of one digest write identical bytes
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(reply.encode("utf-8"))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return reply

    def embed(self, text: str) -> list[float]:
        return self.inner.embed(text)
