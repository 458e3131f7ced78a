"""Gradient-boosted regression trees over encoded configurations."""

import json
from collections.abc import Collection
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from app.core.exceptions import FitError, ModelFormatError
from app.core.logging import get_logger
from app.surrogate.tree import (
    MAX_SUBSET_CATEGORIES,
    Criterion,
    TreeNode,
    build_tree,
    node_from_doc,
    node_to_doc,
)

logger = get_logger(__name__)

MODEL_FORMAT = "gbdt-model"
MODEL_VERSION = 1


class Loss(str, Enum):
    L2 = "L2"
    L1 = "L1"


class TrainConfig(BaseModel):
    """Boosting hyperparameters."""

    n_trees: int = Field(default=400, ge=1)
    max_depth: int = Field(default=8, ge=1)
    min_leaf: int = Field(default=5, ge=1)
    learning_rate: float = Field(default=0.1, gt=0.0, le=1.0)
    loss: Loss = Loss.L2
    # Row fraction drawn (without replacement) for each stage
    subsample: float = Field(default=1.0, gt=0.0, le=1.0)
    seed: int = 0


@dataclass(frozen=True)
class _FlatForest:
    """All trees flattened into parallel arrays for vectorized traversal."""

    roots: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    is_category: np.ndarray
    category_mask: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    depth: int


def _flatten(trees: tuple[TreeNode, ...]) -> _FlatForest:
    feature: list[int] = []
    threshold: list[float] = []
    is_category: list[bool] = []
    mask: list[int] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    roots: list[int] = []

    def add(node: TreeNode) -> int:
        i = len(feature)
        feature.append(max(node.feature, 0))
        threshold.append(node.threshold)
        is_category.append(node.left_codes is not None)
        mask.append(sum(1 << c for c in node.left_codes) if node.left_codes else 0)
        left.append(i)
        right.append(i)
        value.append(node.value)
        if not node.is_leaf:
            left[i] = add(node.left)  # type: ignore[arg-type]
            right[i] = add(node.right)  # type: ignore[arg-type]
        return i

    for tree in trees:
        roots.append(add(tree))
    return _FlatForest(
        roots=np.asarray(roots, dtype=np.int64),
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        is_category=np.asarray(is_category, dtype=bool),
        category_mask=np.asarray(mask, dtype=np.uint64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
        depth=max((t.depth() for t in trees), default=0),
    )


@dataclass(frozen=True)
class GBDTModel:
    """Additive ensemble: base_score + learning_rate * sum of tree outputs."""

    base_score: float
    trees: tuple[TreeNode, ...]
    learning_rate: float
    n_features: int
    categorical_features: frozenset[int] = frozenset()
    loss: Loss = Loss.L2

    @cached_property
    def forest(self) -> _FlatForest:
        return _flatten(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict(self, X)


def predict(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    """Predict objectives for encoded configurations, shape (n, d) or (d,).

    Raises:
        ValueError: If the feature count differs from training
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    if not model.trees:
        out = np.full(len(X), model.base_score)
        return out[0:1] if single else out

    f = model.forest
    rows = np.arange(len(X))[:, None]
    node = np.broadcast_to(f.roots, (len(X), len(f.roots))).copy()
    codes = np.clip(np.rint(X), 0, MAX_SUBSET_CATEGORIES - 1).astype(np.uint64)
    for _ in range(f.depth):
        feat = f.feature[node]
        x = X[rows, feat]
        bit = (f.category_mask[node] >> codes[rows, feat]) & np.uint64(1)
        go_left = np.where(f.is_category[node], bit == 1, x <= f.threshold[node])
        node = np.where(go_left, f.left[node], f.right[node])

    out = model.base_score + model.learning_rate * f.value[node].sum(axis=1)
    return out[0:1] if single else out


def fit(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
    categorical_features: Collection[int] = (),
) -> GBDTModel:
    """Stagewise boosting with exact greedy CART trees.

    L2 stages fit residuals with mean leaves; L1 stages fit residual signs and
    set each leaf to the median residual of its samples.

    Raises:
        FitError: Fewer than 2 samples or non-finite targets
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise FitError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if len(y) < 2:
        raise FitError(f"need at least 2 samples, got {len(y)}")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(X)):
        raise FitError("non-finite values in training data")

    categorical = frozenset(int(c) for c in categorical_features)
    base_score = float(np.sort(y).mean())
    if np.all(y == y[0]):
        logger.bind(samples=len(y), value=float(y[0])).debug("gbdt_degenerate_targets")
        return GBDTModel(
            float(y[0]), (), config.learning_rate, X.shape[1], categorical, config.loss
        )

    rng = np.random.default_rng(config.seed)
    n_rows = len(y)
    n_stage = max(2, int(round(config.subsample * n_rows)))
    current = np.full(n_rows, base_score)
    trees: list[TreeNode] = []

    for _ in range(config.n_trees):
        if n_stage < n_rows:
            rows = np.sort(rng.choice(n_rows, size=n_stage, replace=False))
        else:
            rows = np.arange(n_rows)
        residual = y[rows] - current[rows]

        if config.loss == Loss.L2:
            if not np.any(residual):
                break
            tree = build_tree(
                X[rows],
                residual,
                config.max_depth,
                config.min_leaf,
                Criterion.VARIANCE,
                categorical,
            )
        else:
            signs = np.sign(residual)

            def median_leaf(idx: np.ndarray, residual: np.ndarray = residual) -> float:
                return float(np.median(residual[idx]))

            tree = build_tree(
                X[rows],
                signs,
                config.max_depth,
                config.min_leaf,
                Criterion.VARIANCE,
                categorical,
                leaf_value=median_leaf,
            )

        trees.append(tree)
        current = current + config.learning_rate * tree.predict(X)

    model = GBDTModel(
        base_score, tuple(trees), config.learning_rate, X.shape[1], categorical, config.loss
    )
    logger.bind(samples=n_rows, trees=len(trees), loss=config.loss.value).debug("gbdt_fitted")
    return model


def to_document(model: GBDTModel) -> dict[str, Any]:
    """Versioned, self-describing model document."""
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "loss": model.loss.value,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "n_features": model.n_features,
        "categorical_features": sorted(model.categorical_features),
        "trees": [node_to_doc(t) for t in model.trees],
    }


def from_document(doc: Any) -> GBDTModel:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a gbdt model document")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    try:
        return GBDTModel(
            base_score=float(doc["base_score"]),
            trees=tuple(node_from_doc(t) for t in doc["trees"]),
            learning_rate=float(doc["learning_rate"]),
            n_features=int(doc["n_features"]),
            categorical_features=frozenset(int(c) for c in doc["categorical_features"]),
            loss=Loss(doc["loss"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"malformed model document: {e}") from e


def save_model(model: GBDTModel, path: Path) -> None:
    # json writes floats with the shortest repr that round-trips exactly
    Path(path).write_text(json.dumps(to_document(model), sort_keys=True, indent=1) + "\n")


def load_model(path: Path) -> GBDTModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: {e}") from e
    return from_document(doc)
