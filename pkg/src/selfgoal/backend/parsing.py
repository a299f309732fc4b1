"""Parsers for the structured parts of model replies. Both are total on arbitrary text."""

from __future__ import annotations

import re

from ..errors import InvalidArgument, ReplyFormatError

_IDS_OBJECT = re.compile(r"""\{\s*["']?ids["']?\s*:\s*\[([^\[\]{}]*)\]\s*\}""", re.IGNORECASE)
_INT = re.compile(r"^[+-]?\d+$")
_MARKER = re.compile(r"^\s*(?:\d+\s*[.)](?!\d)\s*|[-*•]\s+)(.*)$")


def parse_selected_ids(reply: str, k: int, max_index: int) -> list[int]:
    """Indices from the last well-formed ``{"IDs": [...]}`` object in ``reply``.

    Out-of-range and repeated entries are dropped; at most ``k`` are returned.
    Raises ReplyFormatError when no such object exists.
    """
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    items = None
    for match in _IDS_OBJECT.finditer(reply or ""):
        raw = [p.strip() for p in match.group(1).split(",") if p.strip()]
        if all(_INT.match(p) for p in raw):
            items = [int(p) for p in raw]
    if items is None:
        raise ReplyFormatError('no {"IDs": [...]} object in reply')
    out: list[int] = []
    for i in items:
        if 0 <= i <= max_index and i not in out:
            out.append(i)
        if len(out) == k:
            break
    return out


def _clean(item: str) -> str:
    return item.replace("**", "").strip().strip("_").strip()


def parse_subgoal_list(reply: str, cap: int) -> list[str]:
    """Split a decomposition reply into subgoal strings.

    Enumerated lines (``1.``, ``2)``, ``-``, ``*``) win when any are present;
    otherwise every nonempty line is an item.
    """
    if cap < 1:
        raise InvalidArgument("cap must be >= 1")
    lines = (reply or "").splitlines()
    marked = [m.group(1) for m in map(_MARKER.match, lines) if m]
    raw = marked if marked else lines
    items = [c for c in map(_clean, raw) if c]
    return items[:cap]
