"""Structural identifiability of acyclic dynamic networks."""

__version__ = "0.1.0"

from .checkers import (corollary3_check, iterative_path_check, necessary_check,  # noqa: E402
                       theorem1_check)
from .covering import (allocate_signals, anti_tree_cover, compatible_tree_cover,  # noqa: E402
                       prune_redundant, theorem2_check, tree_cover, validate_cover)
from .graph import build_dag, disjoint_path_count, min_disconnecting_set  # noqa: E402
from .model import ModelSet, SignalPattern, Verdict, make_model, transpose_model  # noqa: E402

__all__ = [
    "ModelSet", "SignalPattern", "Verdict", "allocate_signals", "anti_tree_cover", "build_dag",
    "compatible_tree_cover", "corollary3_check", "disjoint_path_count", "iterative_path_check",
    "make_model", "min_disconnecting_set", "necessary_check", "prune_redundant", "theorem1_check",
    "theorem2_check", "transpose_model", "tree_cover", "validate_cover",
]
