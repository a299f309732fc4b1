from .config import AgentEntry, BackendSpec, ExperimentConfig, derive_seed, load_document
from .experiment import build_backends, compute_scores, matches_from_outcomes, run_experiment
from .record import RunRecord
from .report import load_records, rate, read_match_history, reconstruct_prompts, replay, report
from .sweep import final_tree_sizes, sweep_xi

__all__ = [
    "AgentEntry",
    "BackendSpec",
    "ExperimentConfig",
    "RunRecord",
    "build_backends",
    "compute_scores",
    "derive_seed",
    "final_tree_sizes",
    "load_document",
    "load_records",
    "matches_from_outcomes",
    "rate",
    "read_match_history",
    "reconstruct_prompts",
    "replay",
    "report",
    "run_experiment",
    "sweep_xi",
]
