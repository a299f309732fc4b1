from .base import Backend, ChatMessage, CompletionRequest, UsageStats, make_request
from .cache import CachedBackend
from .embedding import FixtureEmbedder, HashingEmbedder, MemoEmbedder
from .parsing import parse_selected_ids, parse_subgoal_list
from .remote import RemoteBackend
from .scripted import ScriptedBackend

__all__ = [
    "Backend",
    "CachedBackend",
    "ChatMessage",
    "CompletionRequest",
    "FixtureEmbedder",
    "HashingEmbedder",
    "MemoEmbedder",
    "RemoteBackend",
    "ScriptedBackend",
    "UsageStats",
    "make_request",
    "parse_selected_ids",
    "parse_subgoal_list",
]
