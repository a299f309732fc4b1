"""Score tables, leaderboards and transcript replay for stored records."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from ..errors import InvalidArgument, ParseError
from ..events import EVENT_KINDS, TranscriptEvent
from ..metrics import MatchResult, Rating, TrueSkillParams, leaderboard
from .record import RunRecord


def load_records(path: str | Path) -> list[RunRecord]:
    """A single record directory, or a directory holding several."""
    path = Path(path)
    if not path.is_dir():
        raise ParseError("not a directory", path=path)
    if (path / "record.json").exists():
        return [RunRecord.load(path)]
    found = [RunRecord.load(p) for p in sorted(path.iterdir()) if (p / "record.json").exists()]
    if not found:
        raise ParseError("no run records found", path=path)
    return found


def fmt(x) -> str:
    return "" if x is None else f"{x:.2f}"


class Table:
    def __init__(self, headers: Sequence[str], rows: Iterable[Sequence[str]], title: str = ""):
        self.headers = list(headers)
        self.rows = [list(r) for r in rows]
        self.title = title

    def text(self) -> str:
        widths = [max(len(h), *(len(r[i]) for r in self.rows)) if self.rows else len(h) for i, h in enumerate(self.headers)]
        numeric = [all(_is_num(r[i]) for r in self.rows) and bool(self.rows) for i in range(len(self.headers))]

        def line(cells):
            return "  ".join(c.rjust(w) if num else c.ljust(w) for c, w, num in zip(cells, widths, numeric)).rstrip()

        out = [self.title] if self.title else []
        out.append(line(self.headers))
        out.append("  ".join("-" * w for w in widths))
        out.extend(line(r) for r in self.rows)
        return "\n".join(out) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.headers)
        writer.writerows(self.rows)
        return buf.getvalue()


def _is_num(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return s == ""


def score_table(record: RunRecord) -> Table:
    scores = record.scores
    metric = scores.get("metric", "?")
    rows = []
    for label, entry in scores.get("per_agent", {}).items():
        rows.append([label, entry.get("framework", ""), entry.get("backend", ""), metric,
                     fmt(entry.get("score")), fmt(entry.get("std"))])
    title = f"{record.config.get('env', {}).get('kind', '?')} ({record.config_digest})"
    if scores.get("overall") is not None:
        title += f"  overall {metric} = {fmt(scores['overall'])}"
    if not record.complete:
        title += "  [incomplete]"
    return Table(["agent", "framework", "backend", "metric", "score", "std"], rows, title)


def leaderboard_table(board, title: str = "") -> Table:
    rows = [[label, fmt(r.mu), fmt(r.sigma), fmt(r.conservative)] for label, r in board]
    return Table(["label", "mu", "sigma", "conservative"], rows, title)


def report(path: str | Path) -> list[Table]:
    tables = []
    for record in load_records(path):
        tables.append(score_table(record))
        board = record.scores.get("leaderboard")
        if board:
            tables.append(
                leaderboard_table(
                    [(b["label"], Rating(b["mu"], b["sigma"])) for b in board], f"TrueSkill leaderboard ({record.config_digest})"
                )
            )
    return tables


# -- match histories ---------------------------------------------------------------------


def read_match_history(path: str | Path) -> list[MatchResult]:
    """One match per line: a JSON object or ``label:rank`` tokens. ``#`` starts a comment."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", path=path) from exc
    out = []
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("{"):
                out.append(MatchResult.from_dict(json.loads(line)))
            else:
                pairs = [tok.rsplit(":", 1) for tok in line.split()]
                out.append(MatchResult([p[0] for p in pairs], [int(p[1]) for p in pairs]))
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ParseError(f"bad match: {exc}", line=n, path=path) from exc
    return out


def rate(path: str | Path, params: TrueSkillParams | None = None) -> Table:
    return leaderboard_table(leaderboard(read_match_history(path), params), "TrueSkill leaderboard")


# -- replay --------------------------------------------------------------------------------


def check_filter(kind: str | None) -> None:
    if kind is not None and kind not in EVENT_KINDS:
        raise InvalidArgument(f"unknown event kind {kind!r}; expected one of {', '.join(EVENT_KINDS)}")


def render_event(e: TranscriptEvent) -> str:
    who = e.agent or "env"
    head = f"[repeat {e.repeat} round {e.round} #{e.seq}] {who} {e.kind}"
    if e.kind == "prompt":
        data = json.loads(e.payload)
        parts = [f"{head} {data['tag']}"]
        for m in data["messages"]:
            parts.append(f"--- {m['role']} ---\n{m['content']}")
        return "\n".join(parts)
    if e.kind == "reply":
        data = json.loads(e.payload)
        return f"{head} {data['tag']}\n{data['content']}"
    return f"{head}: {e.payload}"


def replay(
    record: RunRecord,
    agent: str | None = None,
    round: int | None = None,
    kind: str | None = None,
    repeat: int | None = None,
) -> Iterator[str]:
    check_filter(kind)
    for e in record.events:
        if agent is not None and e.agent != agent:
            continue
        if round is not None and e.round != round:
            continue
        if kind is not None and e.kind != kind:
            continue
        if repeat is not None and e.repeat != repeat:
            continue
        yield render_event(e)


def reconstruct_prompts(record: RunRecord, tag: str) -> list[list[dict]]:
    """Every message list sent under ``tag``, exactly as it went to the backend."""
    return [
        json.loads(e.payload)["messages"]
        for e in record.events
        if e.kind == "prompt" and json.loads(e.payload)["tag"] == tag
    ]
