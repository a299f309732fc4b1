"""Agent context, the shared decide loop, and helpers for language-model agents."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any

from ..backend.base import ChatMessage, CompletionRequest
from ..environments.base import Observation, format_action
from ..errors import InvalidArgument
from ..events import EventSink, NullSink


@lru_cache(maxsize=None)
def load_prompt(name: str) -> str:
    text = resources.files(__package__).joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")
    return text.rstrip("\n")


@dataclass(frozen=True)
class HistoryEntry:
    round: int
    observation: str
    action: str


@dataclass
class AgentContext:
    agent_id: str
    prompt_base: str = ""
    history: list[HistoryEntry] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    def record(self, round: int, observation: str, action: str) -> None:
        if self.history and round <= self.history[-1].round:
            raise InvalidArgument(f"history rounds must increase: {round} after {self.history[-1].round}")
        self.history.append(HistoryEntry(round, observation, action))


class Agent:
    """Base policy. Subclasses implement ``act``; everything else has defaults."""

    kind = "agent"

    def __init__(self, label: str):
        if not label:
            raise InvalidArgument("agent label must be nonempty")
        self.label = label
        self.ctx = AgentContext(label)
        self.sink: EventSink = NullSink()
        self.step = 0
        self.repeat = 0
        self.trial_start = 0  # index into history where the current repeat began
        self.game = None
        self.listeners: list = []  # called with the agent after every decision

    # -- lifecycle hooks called by the runner -------------------------------------

    def bind(self, game, sink: EventSink | None = None) -> None:
        self.game = game
        if sink is not None:
            self.sink = sink
        self.ctx.prompt_base = f"{game.description()}\n\nYour high-level goal: {game.goal}"

    def prepare(self) -> None:
        """Called once before any interaction with the environment."""

    def begin_repeat(self, repeat: int) -> None:
        self.repeat = repeat
        self.trial_start = len(self.ctx.history)

    def reset_memory(self) -> None:
        """Forget learned memory (used when memory must not persist across repeats)."""

    # -- stepping ---------------------------------------------------------------------

    def decide(self, obs: Observation):
        self.step += 1
        reply = self.act(obs)
        action = self._parse(obs, reply)
        if action is None:
            self.sink.emit("warning", "reply has no usable action; asking again", self.label)
            reply = self.reask(obs, reply)
            action = self._parse(obs, reply)
        if action is None:
            self.sink.emit("warning", f"falling back to default action {format_action(obs.env, obs.default)}", self.label)
            action = obs.default
        text = format_action(obs.env, action)
        self.sink.emit("action", text, self.label)
        self.ctx.record(self.step, obs.text, text)
        self.after_step(obs, reply)
        for fn in self.listeners:
            fn(self)
        return action

    def _parse(self, obs: Observation, reply: str):
        text = self.extract(reply)
        return None if text is None else obs.parse(text)

    def act(self, obs: Observation) -> str:
        raise NotImplementedError

    def extract(self, reply: str) -> str | None:
        """Narrow a reply to the part the environment should parse."""
        return reply

    def reask(self, obs: Observation, reply: str) -> str:
        return reply

    def after_step(self, obs: Observation, reply: str) -> None:
        pass

    def trial_history(self) -> list[HistoryEntry]:
        return self.ctx.history[self.trial_start:]


class LLMAgent(Agent):
    """An agent whose decisions come from a chat-completion backend."""

    def __init__(
        self,
        label: str,
        act_backend,
        *,
        temperature: float = 0.0,
        max_tokens: int | None = None,
        history_window: int | None = None,
    ):
        super().__init__(label)
        self.act_backend = act_backend
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.history_window = history_window
        self._last_act: list[ChatMessage] = []

    def tag(self, module: str, round: int, suffix: str = "") -> str:
        return f"{self.label}/{module}/{round}" + (f"/{suffix}" if suffix else "")

    def complete(self, backend, messages: list[ChatMessage], tag: str) -> str:
        request = CompletionRequest(tuple(messages), self.temperature, self.max_tokens, tag)
        self.sink.emit("prompt", json.dumps({"tag": tag, "messages": [m.to_dict() for m in messages]}, ensure_ascii=False), self.label)
        reply = backend.complete(request)
        self.sink.emit("reply", json.dumps({"tag": tag, "content": reply}, ensure_ascii=False), self.label)
        return reply

    def render_history(self) -> str:
        entries = self.ctx.history
        if self.history_window is not None:
            entries = entries[-self.history_window:] if self.history_window else []
        if not entries:
            return ""
        parts = ["Your earlier steps:"]
        for e in entries:
            parts.append(f"[Step {e.round}]\n{e.observation}\nYour action: {e.action}")
        return "\n".join(parts)

    def scene(self, obs: Observation) -> str:
        history = self.render_history()
        return f"{history}\n\nCurrent situation:\n{obs.text}" if history else obs.text

    def guidance_block(self, obs: Observation) -> str:
        return ""

    def act_messages(self, obs: Observation) -> list[ChatMessage]:
        body = load_prompt("act_baseline").format(scene=self.scene(obs), guidance=self.guidance_block(obs))
        return [ChatMessage("system", self.ctx.prompt_base), ChatMessage("user", f"{body}\n\n{obs.instruction}")]

    def act(self, obs: Observation) -> str:
        self._last_act = self.act_messages(obs)
        return self.complete(self.act_backend, self._last_act, self.tag("act", self.step))

    def reask(self, obs: Observation, reply: str) -> str:
        messages = [*self._last_act, ChatMessage("assistant", reply), ChatMessage("user", obs.reminder)]
        return self.complete(self.act_backend, messages, self.tag("act", self.step))
