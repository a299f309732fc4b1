"""The SelfGoal agent: search the GoalTree, act on the selected subgoals, grow the tree."""

from __future__ import annotations

import random

from ..backend.base import ChatMessage
from ..backend.embedding import MemoEmbedder
from ..backend.parsing import parse_selected_ids, parse_subgoal_list
from ..environments.base import Observation
from ..errors import BackendError, ConfigError, ReplyFormatError, ScriptExhausted
from ..goaltree import GoalNode, GoalTree, TreeConfig, cosine_similarity
from .base import LLMAgent, load_prompt

SEARCH_STRATEGIES = ("llm", "embedding", "random")


class SelfGoalAgent(LLMAgent):
    kind = "selfgoal"

    def __init__(
        self,
        label: str,
        act_backend,
        tree_backend=None,
        embed_backend=None,
        tree_config: TreeConfig | None = None,
        search_strategy: str = "llm",
        seed: int = 0,
        **kwargs,
    ):
        super().__init__(label, act_backend, **kwargs)
        if search_strategy not in SEARCH_STRATEGIES:
            raise ConfigError(f"search_strategy must be one of {SEARCH_STRATEGIES}")
        self.tree_backend = tree_backend or act_backend
        self.embedder = MemoEmbedder(embed_backend or self.tree_backend)
        self.tree_config = tree_config or TreeConfig()
        self.search_strategy = search_strategy
        self.rng = random.Random(seed)
        self.last_selected: list[GoalNode] = []

    @property
    def tree(self) -> GoalTree | None:
        return self.ctx.extras.get("tree")

    def reset_memory(self) -> None:
        self.ctx.extras.pop("tree", None)

    # -- Decompose --------------------------------------------------------------------

    def _context_prefix(self, obs: Observation, action: str | None = None) -> str:
        parts = [f"Here's the current scenario:\n{self.scene(obs)}"]
        if action is not None:
            parts.append(f"Your latest action:\n{action}")
        return "\n".join(parts) + "\n------------------------------\n"

    def _grow(self, parent: GoalNode, candidates: list[str], round: int) -> list[str]:
        tree = self.tree
        accepted = tree.filter_candidates(candidates, self.embedder)
        new_ids = tree.insert_children(parent.id, accepted, round)
        if new_ids:
            self.sink.emit(
                "tree_insert",
                "; ".join(f"{i}: {tree.get(i).text}" for i in new_ids),
                self.label,
            )
        return new_ids

    def init_tree(self, obs: Observation) -> None:
        """Build the bare tree from the main goal and decompose it into the first layer."""
        game = self.game
        tree = GoalTree.new(game.goal, self.tree_config, round=0)
        self.ctx.extras["tree"] = tree
        prompt = load_prompt("decompose_main").format(framing=game.framing, setting=game.setting, goal=game.goal)
        messages = [
            ChatMessage("system", self.ctx.prompt_base),
            ChatMessage("user", self._context_prefix(obs) + prompt),
        ]
        reply = self.complete(self.tree_backend, messages, self.tag("decompose", 0))
        cap = self.tree_config.max_children_per_decompose
        self._grow(tree.root, parse_subgoal_list(reply, cap), 0)

    def decompose(self, node: GoalNode, obs: Observation, action: str, round: int) -> list[str]:
        prompt = load_prompt("decompose_sub").format(sub_goal=node.text)
        messages = [
            ChatMessage("system", self.ctx.prompt_base),
            ChatMessage("user", self._context_prefix(obs, action) + prompt),
        ]
        try:
            reply = self.complete(self.tree_backend, messages, self.tag("decompose", round, node.id))
        except ScriptExhausted:
            raise
        except BackendError as exc:
            self.sink.emit("warning", f"decomposition of {node.id} failed: {exc}", self.label)
            return []
        return self._grow(node, parse_subgoal_list(reply, self.tree_config.max_children_per_decompose), round)

    # -- Search -------------------------------------------------------------------------

    def search(self, obs: Observation, round: int) -> list[GoalNode]:
        frontier = self.tree.leaf_frontier()
        k = self.tree_config.search_k
        if self.search_strategy == "random":
            picks = self.rng.sample(range(len(frontier)), min(k, len(frontier)))
        elif self.search_strategy == "embedding":
            here = self.embedder.embed(obs.text)
            scored = [(-cosine_similarity(here, self.embedder.embed(n.text)), i) for i, n in enumerate(frontier)]
            picks = [i for _, i in sorted(scored)[:k]]
        else:
            picks = self._llm_search(obs, frontier, k, round)
        return [frontier[i] for i in picks]

    def _llm_search(self, obs: Observation, frontier: list[GoalNode], k: int, round: int) -> list[int]:
        guidance = "\n".join(f"{i}: {n.text}" for i, n in enumerate(frontier))
        prompt = load_prompt("search").format(
            scene=self.scene(obs), objective=self.tree.root.text, guidance=guidance, width=k
        )
        messages = [ChatMessage("system", self.ctx.prompt_base), ChatMessage("user", prompt)]
        tag = self.tag("search", round)
        reply = self.complete(self.tree_backend, messages, tag)
        for attempt in range(2):
            try:
                picks = parse_selected_ids(reply, k, len(frontier) - 1)
                if picks:
                    return picks
            except ReplyFormatError:
                pass
            if attempt == 0:
                self.sink.emit("warning", "search reply had no usable IDs; asking again", self.label)
                messages = [
                    *messages,
                    ChatMessage("assistant", reply),
                    ChatMessage("user", load_prompt("search_reminder").format(width=k)),
                ]
                reply = self.complete(self.tree_backend, messages, tag)
        self.sink.emit("warning", f"search fell back to the first {k} frontier nodes", self.label)
        return list(range(min(k, len(frontier))))

    # -- Act --------------------------------------------------------------------------

    def guidance_block(self, obs: Observation) -> str:
        return "\n".join(f"{i + 1}. {n.text}" for i, n in enumerate(self.last_selected))

    def act_messages(self, obs: Observation) -> list[ChatMessage]:
        body = load_prompt("act").format(
            scene=self.scene(obs), main_goal=self.tree.root.text, sub_goals=self.guidance_block(obs)
        )
        return [ChatMessage("system", self.ctx.prompt_base), ChatMessage("user", f"{body}\n\n{obs.instruction}")]

    def act(self, obs: Observation) -> str:
        if self.tree is None:
            self.init_tree(obs)
        t = self.step
        tree = self.tree
        selected = self.search(obs, t)
        tree.mark_selected([n.id for n in selected], t)
        self.last_selected = selected
        self.sink.emit("search_selection", ", ".join(n.id for n in selected), self.label)
        reply = super().act(obs)
        # growth is frozen once the tree went stop_n rounds without an insertion
        if not tree.stopping_met(t - 1):
            for node in selected:
                self.decompose(node, obs, reply, t)
        if tree.stopping_met(t) and self.tree_config.prune_enabled:
            removed = tree.prune(t)
            if removed:
                self.sink.emit("tree_prune", ", ".join(removed), self.label)
        return reply
