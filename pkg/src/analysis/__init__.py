"""
Analysis Package

Change value analysis and the cleanup pipeline that follows it:
- CVA marking and UnDef substitution
- Constant propagation, sparse conditional propagation with UnDef folding
- Dead code and dead store elimination
- Pass manager running passes to a joint fixpoint
"""

from .cva import CvaConfig, Mark, MarkMap, apply_undef, changed_set, cva, mark_fixpoint
from .constprop import constprop
from .sccp import sccp_undef
from .dce import dce
from .dse import dse
from .pipeline import PASSES, PassManager, PassPipeline, PipelineRun, default_pipeline, run_pipeline

__all__ = [
    # CVA
    "CvaConfig",
    "Mark",
    "MarkMap",
    "apply_undef",
    "changed_set",
    "cva",
    "mark_fixpoint",

    # Passes
    "constprop",
    "sccp_undef",
    "dce",
    "dse",

    # Pipeline
    "PASSES",
    "PassManager",
    "PassPipeline",
    "PipelineRun",
    "default_pipeline",
    "run_pipeline",
]
