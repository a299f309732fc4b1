"""Deterministic, offline embedding providers."""

from __future__ import annotations

import hashlib
import re
import threading
from typing import Mapping, Sequence

from ..errors import InvalidArgument, ScriptExhausted
from .base import check_embed_text

_TOKEN = re.compile(r"[a-z0-9]+")


class FixtureEmbedder:
    """Hand-chosen vectors for exact control over similarities in tests."""

    def __init__(self, vectors: Mapping[str, Sequence[float]], fallback=None):
        self.vectors = {k: [float(x) for x in v] for k, v in vectors.items()}
        dims = {len(v) for v in self.vectors.values()}
        if len(dims) > 1:
            raise InvalidArgument(f"fixture vectors have mixed dimensions {sorted(dims)}")
        self.fallback = fallback

    def embed(self, text: str) -> list[float]:
        check_embed_text(text)
        if text in self.vectors:
            return list(self.vectors[text])
        if self.fallback is None:
            raise ScriptExhausted(f"no fixture embedding for {text!r}")
        return self.fallback.embed(text)


class HashingEmbedder:
    """Signed feature hashing over lowercase word tokens.

    Texts sharing vocabulary get high cosine similarity; identical texts get 1.0.
    """

    def __init__(self, dim: int = 256):
        if dim < 2:
            raise InvalidArgument("embedding dimension must be >= 2")
        self.dim = dim

    def embed(self, text: str) -> list[float]:
        check_embed_text(text)
        tokens = _TOKEN.findall(text.lower()) or [text.strip()]
        vec = [0.0] * self.dim
        for tok in tokens:
            h = hashlib.blake2b(tok.encode("utf-8"), digest_size=8).digest()
            idx = int.from_bytes(h[:4], "big") % self.dim
            vec[idx] += 1.0 if h[4] & 1 else -1.0
        if not any(vec):
            # colliding tokens cancelled out; fall back to a single whole-text feature
            h = hashlib.blake2b(text.encode("utf-8"), digest_size=4).digest()
            vec[int.from_bytes(h, "big") % self.dim] = 1.0
        return vec


class MemoEmbedder:
    """In-memory memoization in front of any provider (no persistence)."""

    def __init__(self, inner):
        self.inner = inner
        self._memo: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> list[float]:
        with self._lock:
            hit = self._memo.get(text)
        if hit is not None:
            return list(hit)
        vec = list(self.inner.embed(text))
        with self._lock:
            self._memo[text] = vec
        return list(vec)
