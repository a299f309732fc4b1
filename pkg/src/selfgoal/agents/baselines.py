"""Baseline frameworks: ReAct, Reflexion, CLIN and ADAPT."""

from __future__ import annotations

import re

from ..backend.base import ChatMessage
from ..backend.parsing import parse_subgoal_list
from ..environments.base import Observation
from .base import LLMAgent, load_prompt

_ACTION_LINE = re.compile(r"^\s*action\s*:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)

CLIN_TEMPLATES = (
    "MAY BE NECCESSARY to",
    "SHOULD BE NECCESSARY to",
    "MAY BE CONTRIBUTE to",
    "DOES NOT CONTRIBUTE to",
)
_CLIN_LINE = re.compile(
    r"^\S.*? (?:" + "|".join(re.escape(t) for t in CLIN_TEMPLATES) + r") \S.*$"
)


def is_causal_learning(line: str) -> bool:
    return bool(_CLIN_LINE.match(line.strip()))


class ReActAgent(LLMAgent):
    kind = "react"

    def guidance_block(self, obs: Observation) -> str:
        return load_prompt("react")

    def extract(self, reply: str) -> str | None:
        found = _ACTION_LINE.findall(reply or "")
        return found[-1] if found else None


class _MemoryAgent(LLMAgent):
    """Shared plumbing for frameworks that summarise experience after every step."""

    def trial_log(self) -> str:
        return "\n".join(
            f"[Step {e.round}]\n{e.observation}\nYour action: {e.action}" for e in self.trial_history()
        )


class ReflexionAgent(_MemoryAgent):
    kind = "reflexion"

    @property
    def reflections(self) -> list[str]:
        return self.ctx.extras.setdefault("reflections", [])

    def reset_memory(self) -> None:
        self.ctx.extras["reflections"] = []

    def guidance_block(self, obs: Observation) -> str:
        if not self.reflections:
            return "You have no reflections from earlier rounds yet."
        lines = "\n".join(f"{i + 1}. {r}" for i, r in enumerate(self.reflections))
        return f"Reflections from your earlier rounds:\n{lines}"

    def update(self) -> None:
        prompt = load_prompt("reflexion").format(setting=self.game.setting, past_auction_log=self.trial_log())
        messages = [ChatMessage("system", self.ctx.prompt_base), ChatMessage("user", prompt)]
        reply = self.complete(self.act_backend, messages, self.tag("reflect", self.step))
        self.reflections.append(reply.strip())

    def after_step(self, obs: Observation, reply: str) -> None:
        self.update()


class ClinAgent(_MemoryAgent):
    kind = "clin"

    @property
    def learnings(self) -> list[str]:
        return self.ctx.extras.setdefault("learnings", [])

    def reset_memory(self) -> None:
        self.ctx.extras["learnings"] = []

    def _numbered(self) -> str:
        return "\n".join(f"{i + 1}. {x}" for i, x in enumerate(self.learnings)) or "None yet."

    def guidance_block(self, obs: Observation) -> str:
        return f"Your learnings from experience so far:\n{self._numbered()}"

    def update(self) -> None:
        prompt = load_prompt("clin").format(
            setting=self.game.setting, past_auction_log=self.trial_log(), past_learnings=self._numbered()
        )
        messages = [ChatMessage("system", self.ctx.prompt_base), ChatMessage("user", prompt)]
        reply = self.complete(self.act_backend, messages, self.tag("clin", self.step))
        fresh = [line for line in parse_subgoal_list(reply, 1000) if is_causal_learning(line)]
        if fresh:
            # CLIN regenerates its memory wholesale
            self.ctx.extras["learnings"] = fresh
        else:
            self.sink.emit("warning", "CLIN reply held no valid learnings; keeping the previous ones", self.label)

    def after_step(self, obs: Observation, reply: str) -> None:
        self.update()


class AdaptAgent(LLMAgent):
    """Decomposes the goal before interacting and never revises the plan."""

    kind = "adapt"

    def __init__(self, label: str, act_backend, plan_backend=None, depth: int = 2, max_children: int = 5, **kwargs):
        super().__init__(label, act_backend, **kwargs)
        self.plan_backend = plan_backend or act_backend
        self.depth = depth
        self.max_children = max_children

    @property
    def plan(self) -> list[str] | None:
        return self.ctx.extras.get("plan")

    def prepare(self) -> None:
        if self.plan is None:
            self.ctx.extras["plan"] = self.make_plan()

    def make_plan(self) -> list[str]:
        game = self.game
        system = ChatMessage("system", self.ctx.prompt_base)
        top = load_prompt("decompose_main").format(framing=game.framing, setting=game.setting, goal=game.goal)
        reply = self.complete(self.plan_backend, [system, ChatMessage("user", top)], self.tag("plan", 0))
        lines: list[str] = []

        def expand(goals: list[str], prefix: str, level: int) -> None:
            for i, goal in enumerate(goals, start=1):
                number = f"{prefix}{i}."
                lines.append(f"{number} {goal}")
                if level < self.depth:
                    prompt = load_prompt("decompose_sub").format(sub_goal=goal)
                    sub = self.complete(
                        self.plan_backend, [system, ChatMessage("user", prompt)], self.tag("plan", 0, number.rstrip("."))
                    )
                    expand(parse_subgoal_list(sub, self.max_children), number, level + 1)

        expand(parse_subgoal_list(reply, self.max_children), "", 1)
        return lines

    def guidance_block(self, obs: Observation) -> str:
        plan = "\n".join(self.plan or []) or "(no plan)"
        return f"Here is your plan, made before the interaction began:\n{plan}"
