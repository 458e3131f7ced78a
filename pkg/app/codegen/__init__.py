from app.codegen.emit_c import emit_c, sanitize
from app.codegen.merge import MergeMeasurement, MergeResult, expert_merge
from app.codegen.serialize import dumps, load_trees, loads, save_trees
from app.codegen.trees import (
    DecisionTreeModel,
    TreeKind,
    TuningTrees,
    build_trees,
    predict_config,
)

__all__ = [
    "DecisionTreeModel",
    "MergeMeasurement",
    "MergeResult",
    "TreeKind",
    "TuningTrees",
    "build_trees",
    "dumps",
    "emit_c",
    "expert_merge",
    "load_trees",
    "loads",
    "predict_config",
    "sanitize",
    "save_trees",
]
