"""Request types and the backend interface."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from typing import Literal, Protocol, Sequence

from ..errors import InvalidArgument

Role = Literal["system", "user", "assistant"]
ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidArgument(f"unknown chat role {self.role!r}")
        if self.role != "assistant" and not self.content:
            raise InvalidArgument(f"{self.role} message content must be nonempty")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int | None = None
    tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise InvalidArgument("a completion request needs at least one message")
        if self.temperature < 0:
            raise InvalidArgument("temperature must be >= 0")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise InvalidArgument("max_tokens must be a positive integer")

    def digest(self, model: str = "", include_tag: bool = False) -> str:
        payload = {
            "model": model,
            "messages": [m.to_dict() for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        if include_tag:
            payload["tag"] = self.tag
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def make_request(messages: Sequence[tuple[str, str] | ChatMessage], tag: str = "", **kwargs) -> CompletionRequest:
    msgs = tuple(m if isinstance(m, ChatMessage) else ChatMessage(*m) for m in messages)
    return CompletionRequest(msgs, tag=tag, **kwargs)


class Backend(Protocol):
    name: str
    model: str

    def complete(self, request: CompletionRequest) -> str: ...

    def embed(self, text: str) -> list[float]: ...


@dataclass
class UsageStats:
    """Call accounting. Kept out of record digests."""

    calls: int = 0
    embed_calls: int = 0
    prompt_chars: int = 0
    completion_chars: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, request: CompletionRequest, reply: str, usage: dict | None = None) -> None:
        with self._lock:
            self.calls += 1
            self.prompt_chars += sum(len(m.content) for m in request.messages)
            self.completion_chars += len(reply)
            if usage:
                self.prompt_tokens += int(usage.get("prompt_tokens", 0))
                self.completion_tokens += int(usage.get("completion_tokens", 0))

    def to_dict(self) -> dict:
        return {
            "calls": self.calls,
            "embed_calls": self.embed_calls,
            "prompt_chars": self.prompt_chars,
            "completion_chars": self.completion_chars,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }


def check_embed_text(text: str) -> None:
    if not text or not text.strip():
        raise InvalidArgument("cannot embed empty text")
