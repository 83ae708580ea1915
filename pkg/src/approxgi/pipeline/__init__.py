"""Decision pipeline: marking, walk search, reconstruction, verification."""
from .config import PipelineConfig, scaled_config
from .decide import Verdict, baseline_decide, decide, walk_only_decide
from .estimation import ae_distribution, amplitude_estimate, score_ae, verify
from .marking import (
    exact_consistency_fraction,
    exact_consistency_table,
    marked_mask,
    marking_check,
    marking_pass_probability,
)
from .reconstruct import PartialMap, reconstruct, resolve_high_defect, signature
from .search import WalkSearch, collect_seeds, quantum_walk_search

__all__ = [
    "PartialMap",
    "PipelineConfig",
    "Verdict",
    "WalkSearch",
    "ae_distribution",
    "amplitude_estimate",
    "baseline_decide",
    "collect_seeds",
    "decide",
    "exact_consistency_fraction",
    "exact_consistency_table",
    "marked_mask",
    "marking_check",
    "marking_pass_probability",
    "quantum_walk_search",
    "reconstruct",
    "resolve_high_defect",
    "scaled_config",
    "score_ae",
    "signature",
    "verify",
    "walk_only_decide",
]
