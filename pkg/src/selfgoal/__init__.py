"""Multi-agent game arena with GoalTree-guided language-model agents."""

from .errors import (
    BackendError,
    BackendUnavailable,
    ConfigError,
    ExperimentAborted,
    InvalidArgument,
    NotFound,
    ParseError,
    RemoteRejected,
    ReplyFormatError,
    ScriptExhausted,
    SelfGoalError,
)
from .goaltree import GoalNode, GoalTree, TreeConfig, cosine_similarity, new_tree

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "BackendUnavailable",
    "ConfigError",
    "ExperimentAborted",
    "GoalNode",
    "GoalTree",
    "InvalidArgument",
    "NotFound",
    "ParseError",
    "RemoteRejected",
    "ReplyFormatError",
    "ScriptExhausted",
    "SelfGoalError",
    "TreeConfig",
    "cosine_similarity",
    "new_tree",
]
