"""HTTP client for chat-completions and embeddings endpoints."""

from __future__ import annotations

import logging
import os
import threading
import time
from collections import deque

import httpx

from ..errors import BackendUnavailable, RemoteRejected
from .base import CompletionRequest, UsageStats, check_embed_text

log = logging.getLogger(__name__)

TRANSIENT_STATUS = {408, 409, 429, 500, 502, 503, 504}


class RateLimiter:
    """Sliding one-minute window."""

    def __init__(self, per_minute: int | None, clock=time.monotonic, sleep=time.sleep):
        self.per_minute = per_minute
        self.clock = clock
        self.sleep = sleep
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if not self.per_minute:
            return
        while True:
            with self._lock:
                now = self.clock()
                while self._stamps and now - self._stamps[0] >= 60.0:
                    self._stamps.popleft()
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                wait = 60.0 - (now - self._stamps[0])
            self.sleep(max(wait, 0.01))


class RemoteBackend:
    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        name: str = "remote",
        api_key_env: str = "OPENAI_API_KEY",
        embedding_model: str | None = None,
        max_attempts: int = 3,
        backoff: float = 1.0,
        timeout: float = 60.0,
        max_in_flight: int = 4,
        requests_per_minute: int | None = None,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ):
        self.name = name
        self.model = model
        self.embedding_model = embedding_model or model
        self.base_url = base_url.rstrip("/")
        self.max_attempts = max(1, max_attempts)
        self.backoff = backoff
        self.stats = UsageStats()
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max(1, max_in_flight))
        self._limiter = RateLimiter(requests_per_minute, sleep=sleep)
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(headers=headers, timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}/{path}"
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            self._limiter.acquire()
            try:
                with self._slots:
                    resp = self._client.post(url, json=payload)
            except httpx.TransportError as exc:
                last_error = exc
                log.warning("POST %s failed (attempt %d/%d): %r", path, attempt, self.max_attempts, exc)
            else:
                if resp.is_success:
                    return resp.json()
                if resp.status_code not in TRANSIENT_STATUS or attempt == self.max_attempts:
                    raise RemoteRejected(resp.status_code, resp.text)
                log.warning("POST %s got HTTP %d (attempt %d/%d)", path, resp.status_code, attempt, self.max_attempts)
            if attempt < self.max_attempts:
                self._sleep(self.backoff * 2 ** (attempt - 1))
        raise BackendUnavailable(f"{url} unreachable after {self.max_attempts} attempts: {last_error!r}")

    def complete(self, request: CompletionRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [m.to_dict() for m in request.messages],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        body = self._post("chat/completions", payload)
        try:
            reply = body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise RemoteRejected(200, f"unexpected completion body: {body!r}") from exc
        self.stats.add(request, reply, body.get("usage"))
        return reply

    def embed(self, text: str) -> list[float]:
        check_embed_text(text)
        body = self._post("embeddings", {"model": self.embedding_model, "input": text})
        try:
            vec = [float(x) for x in body["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise RemoteRejected(200, f"unexpected embedding body: {body!r}") from exc
        self.stats.embed_calls += 1
        return vec
