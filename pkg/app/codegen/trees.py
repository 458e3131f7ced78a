"""One decision tree per design parameter, distilled from the optimized-point table."""

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.core.exceptions import CodegenError
from app.core.logging import get_logger
from app.optimize.grid import OptimizedPoint
from app.space.params import (
    Configuration,
    ParameterSpace,
    ParameterSpec,
    Role,
    decode_value,
    encode,
    encode_many,
    subspace,
)
from app.surrogate.tree import Criterion, TreeNode, build_tree

logger = get_logger(__name__)

DEFAULT_MAX_DEPTH = 8


class TreeKind(str, Enum):
    REGRESSOR = "regressor"
    CLASSIFIER = "classifier"


@dataclass(frozen=True)
class DecisionTreeModel:
    """Tree predicting one design parameter from the input parameters."""

    target: str
    kind: TreeKind
    max_depth: int
    root: TreeNode


@dataclass(frozen=True)
class TuningTrees:
    """The trees of every design parameter, in space order, plus the space they serve."""

    space: ParameterSpace
    trees: tuple[DecisionTreeModel, ...]

    @property
    def input_space(self) -> ParameterSpace:
        return subspace(self.space, Role.INPUT)

    @property
    def design_space(self) -> ParameterSpace:
        return subspace(self.space, Role.DESIGN)


def leaf_output(spec: ParameterSpec, value: float) -> float:
    """Encoded admissible value for a raw leaf value (rounded and clamped)."""
    decoded = decode_value(spec, value)
    if spec.is_categorical:
        return float(spec.code_of(decoded))
    return float(decoded)


def build_trees(
    points: Sequence[OptimizedPoint],
    space: ParameterSpace,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> TuningTrees:
    """Fit a CART tree per design parameter on (inputs -> optimized value).

    Numeric targets use variance reduction, categorical targets Gini; min_leaf is 1.

    Raises:
        CodegenError: If there are no points
    """
    if not points:
        raise CodegenError("cannot build tuning trees from an empty point list")
    if max_depth < 0:
        raise CodegenError(f"max_depth must be >= 0, got {max_depth}")

    inputs = subspace(space, Role.INPUT)
    design = subspace(space, Role.DESIGN)
    distinct = {tuple(encode(inputs, p.input_values)) for p in points}
    if len(distinct) != len(points):
        raise CodegenError(f"{len(points) - len(distinct)} duplicate input points")
    X = encode_many(inputs, [p.input_values for p in points])
    Y = encode_many(design, [p.design_config for p in points])

    trees = []
    for j, spec in enumerate(design.params):
        if spec.is_categorical:
            root = build_tree(
                X, Y[:, j], max_depth, 1, Criterion.GINI, n_classes=len(spec.labels)
            )
            kind = TreeKind.CLASSIFIER
        else:
            root = build_tree(X, Y[:, j], max_depth, 1, Criterion.VARIANCE)
            kind = TreeKind.REGRESSOR
        trees.append(DecisionTreeModel(spec.name, kind, max_depth, root))
        logger.bind(
            target=spec.name, depth=root.depth(), leaves=sum(1 for _ in root.leaves())
        ).debug("tuning_tree_built")
    return TuningTrees(space, tuple(trees))


def predict_encoded(trees: TuningTrees, x: np.ndarray) -> np.ndarray:
    """Encoded design values for an encoded input vector; matches the emitted C functions."""
    design = trees.design_space
    return np.array(
        [
            leaf_output(spec, tree.root.predict_one(x))
            for spec, tree in zip(design.params, trees.trees, strict=True)
        ]
    )


def predict_config(trees: TuningTrees, input_point: Sequence) -> Configuration:
    """Design configuration chosen by the trees for an input point.

    Total: inputs outside the declared bounds are routed by the same thresholds.
    """
    x = encode(trees.input_space, input_point)
    design = trees.design_space
    return tuple(
        decode_value(spec, value)
        for spec, value in zip(design.params, predict_encoded(trees, x), strict=True)
    )
