from app.surrogate.gbdt import (
    GBDTModel,
    Loss,
    TrainConfig,
    fit,
    from_document,
    load_model,
    predict,
    save_model,
    to_document,
)
from app.surrogate.metrics import Metrics, global_accuracy, local_accuracy, metrics
from app.surrogate.tree import Criterion, TreeNode, build_tree, find_best_split

__all__ = [
    "Criterion",
    "GBDTModel",
    "Loss",
    "Metrics",
    "TrainConfig",
    "TreeNode",
    "build_tree",
    "find_best_split",
    "fit",
    "from_document",
    "global_accuracy",
    "load_model",
    "local_accuracy",
    "metrics",
    "predict",
    "save_model",
    "to_document",
]
