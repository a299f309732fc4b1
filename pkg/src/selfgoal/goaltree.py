"""GoalTree: the hierarchical subgoal structure grown, searched and pruned by SelfGoal agents.

Node ids are paths (``root``, ``root-0``, ``root-0-3``...). Ids are permanent:
pruning never renumbers surviving siblings and a pruned index is never reused.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

from .errors import InvalidArgument, NotFound, ParseError

ROOT_ID = "root"
FORMAT_VERSION = 1


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> Sequence[float]: ...


@dataclass(frozen=True)
class TreeConfig:
    xi: float = 0.8
    search_k: int = 5
    stop_n: int = 3
    prune_after: int = 5
    prune_enabled: bool = True
    max_children_per_decompose: int = 5

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise InvalidArgument(f"xi must lie in [0, 1], got {self.xi}")
        for name in ("search_k", "stop_n", "prune_after", "max_children_per_decompose"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidArgument(f"{name} must be a positive integer, got {value!r}")

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "search_k": self.search_k,
            "stop_n": self.stop_n,
            "prune_after": self.prune_after,
            "prune_enabled": self.prune_enabled,
            "max_children_per_decompose": self.max_children_per_decompose,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TreeConfig":
        unknown = set(data) - set(cls().to_dict())
        if unknown:
            raise InvalidArgument(f"unknown tree_config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class GoalNode:
    id: str
    text: str
    depth: int
    created_round: int
    last_selected_round: int | None = None
    selection_count: int = 0
    children: list["GoalNode"] = field(default_factory=list)
    # next child index; survives pruning so removed ids are never reissued
    next_index: int = 0

    @property
    def freshness(self) -> int:
        """Most recent round this node was created or selected."""
        if self.last_selected_round is None:
            return self.created_round
        return max(self.last_selected_round, self.created_round)

    def walk(self) -> Iterator["GoalNode"]:
        """Depth-first, child-index order, self first."""
        yield self
        for child in self.children:
            yield from child.walk()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "depth": self.depth,
            "created_round": self.created_round,
            "last_selected_round": self.last_selected_round,
            "selection_count": self.selection_count,
            "next_index": self.next_index,
            "children": [c.to_dict() for c in self.children],
        }


def parent_id(node_id: str) -> str | None:
    if node_id == ROOT_ID:
        return None
    head, sep, tail = node_id.rpartition("-")
    if not sep or not tail.isdigit():
        raise InvalidArgument(f"malformed node id {node_id!r}")
    return head


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise InvalidArgument(f"dimension mismatch: {len(u)} vs {len(v)}")
    # rescale so the largest component is 1; keeps tiny or huge vectors clear of under/overflow
    su = max((abs(x) for x in u), default=0.0)
    sv = max((abs(x) for x in v), default=0.0)
    if su == 0.0 or sv == 0.0:
        raise InvalidArgument("cosine similarity is undefined for a zero vector")
    u = [x / su for x in u]
    v = [x / sv for x in v]
    uu = math.fsum(x * x for x in u)
    vv = math.fsum(x * x for x in v)
    # sqrt(s * s) == s exactly, so identical vectors score exactly 1.0
    sim = math.fsum(a * b for a, b in zip(u, v)) / math.sqrt(uu * vv)
    return max(-1.0, min(1.0, sim))


class GoalTree:
    def __init__(self, root: GoalNode, config: TreeConfig, last_insertion_round: int | None = None):
        self.root = root
        self.config = config
        self.last_insertion_round = last_insertion_round

    @classmethod
    def new(cls, main_goal: str, config: TreeConfig | None = None, round: int = 0) -> "GoalTree":
        if not main_goal or not main_goal.strip():
            raise InvalidArgument("main goal must be a nonempty string")
        return cls(GoalNode(ROOT_ID, main_goal, 0, round), config or TreeConfig())

    # -- queries -----------------------------------------------------------

    def nodes(self) -> Iterator[GoalNode]:
        return self.root.walk()

    def __len__(self) -> int:
        return sum(1 for _ in self.nodes())

    def __contains__(self, node_id: str) -> bool:
        return self._find(node_id) is not None

    def _find(self, node_id: str) -> GoalNode | None:
        if node_id == ROOT_ID:
            return self.root
        if not node_id.startswith(ROOT_ID + "-"):
            return None
        node = self.root
        for part in node_id[len(ROOT_ID) + 1:].split("-"):
            node = next((c for c in node.children if c.id == f"{node.id}-{part}"), None)
            if node is None:
                return None
        return node

    def get(self, node_id: str) -> GoalNode:
        node = self._find(node_id)
        if node is None:
            raise NotFound(f"no goal node with id {node_id!r}")
        return node

    def ancestors(self, node_id: str) -> list[GoalNode]:
        """Ancestors of ``node_id`` from its parent up to the root."""
        out = []
        pid = parent_id(node_id)
        while pid is not None:
            out.append(self.get(pid))
            pid = parent_id(pid)
        return out

    def leaf_frontier(self) -> list[GoalNode]:
        return [n for n in self.nodes() if not n.children]

    def texts(self) -> list[str]:
        return [n.text for n in self.nodes()]

    # -- growth --------------------------------------------------------------

    def filter_candidates(self, candidates: Sequence[str], embed: EmbeddingProvider) -> list[str]:
        """Keep candidates whose similarity to every node and earlier keeper is below xi.

        Rejection is closed at xi, so an exact duplicate is refused even at xi = 1.
        """
        if not candidates:
            return []
        xi = self.config.xi
        pool = [list(embed.embed(t)) for t in self.texts()]
        accepted = []
        for text in candidates:
            vec = list(embed.embed(text))
            if all(cosine_similarity(vec, other) < xi for other in pool):
                accepted.append(text)
                pool.append(vec)
        return accepted

    def insert_children(self, parent: str, texts: Sequence[str], round: int) -> list[str]:
        node = self.get(parent)
        if len(texts) > self.config.max_children_per_decompose:
            raise InvalidArgument(
                f"{len(texts)} children exceed the branching cap of "
                f"{self.config.max_children_per_decompose}"
            )
        new_ids = []
        for text in texts:
            child = GoalNode(f"{node.id}-{node.next_index}", text, node.depth + 1, round)
            node.next_index += 1
            node.children.append(child)
            new_ids.append(child.id)
        if new_ids:
            self.last_insertion_round = round
        return new_ids

    def mark_selected(self, ids: Sequence[str], round: int) -> None:
        """Record a selection; every ancestor of a selected node counts as selected too."""
        targets = [self.get(i) for i in ids]  # validate before mutating anything
        touched: dict[str, GoalNode] = {}
        for node in targets:
            node.selection_count += 1
            node.last_selected_round = round
            for anc in self.ancestors(node.id):
                touched.setdefault(anc.id, anc)
        for anc in touched.values():
            anc.last_selected_round = round

    # -- lifecycle -------------------------------------------------------------

    def stopping_met(self, current_round: int) -> bool:
        if self.last_insertion_round is None:
            return False
        return current_round - self.last_insertion_round >= self.config.stop_n

    def prune(self, current_round: int) -> list[str]:
        """Remove every non-root subtree idle for more than ``prune_after`` rounds."""
        removed: list[str] = []
        limit = self.config.prune_after

        def visit(node: GoalNode) -> None:
            keep = []
            for child in node.children:
                if current_round - child.freshness > limit:
                    removed.extend(n.id for n in child.walk())
                else:
                    keep.append(child)
                    visit(child)
            node.children = keep

        visit(self.root)
        return removed

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "goaltree",
            "version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "last_insertion_round": self.last_insertion_round,
            "root": self.root.to_dict(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "GoalTree":
        try:
            config = TreeConfig.from_dict(data["config"])
            root = _node_from_dict(data["root"], expected_id=ROOT_ID, depth=0)
            last = data.get("last_insertion_round")
        except (KeyError, TypeError, InvalidArgument) as exc:
            raise ParseError(f"invalid goal tree document: {exc}") from exc
        return cls(root, config, last)

    @classmethod
    def loads(cls, text: str) -> "GoalTree":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        if not isinstance(data, dict) or data.get("format") != "goaltree":
            raise ParseError("not a goal tree document", line=1)
        return cls.from_dict(data)

    def dump_flat(self) -> str:
        """Human-readable ``id: text`` listing, one node per line, depth-first."""
        return "".join(f"{n.id}: {n.text}\n" for n in self.nodes())

    def __eq__(self, other) -> bool:
        return isinstance(other, GoalTree) and self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"GoalTree(nodes={len(self)}, last_insertion_round={self.last_insertion_round})"


def _node_from_dict(data: dict, expected_id: str, depth: int) -> GoalNode:
    if data["id"] != expected_id:
        raise InvalidArgument(f"node id {data['id']!r} does not match its position {expected_id!r}")
    if data["depth"] != depth:
        raise InvalidArgument(f"node {expected_id} has depth {data['depth']}, expected {depth}")
    node = GoalNode(
        id=data["id"],
        text=data["text"],
        depth=depth,
        created_round=int(data["created_round"]),
        last_selected_round=data.get("last_selected_round"),
        selection_count=int(data.get("selection_count", 0)),
        next_index=int(data.get("next_index", 0)),
    )
    for child in data.get("children", []):
        cid = child.get("id", "")
        head, _, tail = cid.rpartition("-")
        if head != node.id or not tail.isdigit():
            raise InvalidArgument(f"child id {cid!r} is not a child path of {node.id!r}")
        node.children.append(_node_from_dict(child, cid, depth + 1))
    if node.children:
        highest = max(int(c.id.rpartition("-")[2]) for c in node.children)
        node.next_index = max(node.next_index, highest + 1)
    return node


def new_tree(main_goal: str, config: TreeConfig | None = None) -> GoalTree:
    return GoalTree.new(main_goal, config)
