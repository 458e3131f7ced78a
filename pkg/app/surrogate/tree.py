"""Exact greedy CART trees.

One builder serves three consumers: the boosting stages of the surrogate
(variance criterion, category-subset splits), the partition tree behind HVS,
and the per-parameter tuning trees (variance or Gini, threshold splits only).

Split semantics: numeric splits send `x[feature] <= threshold` left; category
splits send `code in left_codes` left. Thresholds sit at the midpoint between
consecutive distinct values. Ties in gain go to the lowest feature index, then
the lowest threshold.
"""

from collections.abc import Callable, Collection, Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

MAX_SUBSET_CATEGORIES = 64
_GAIN_TOLERANCE = 1e-12


class Criterion(str, Enum):
    VARIANCE = "variance"
    GINI = "gini"


@dataclass(slots=True)
class TreeNode:
    """A split node or a leaf (left is None)."""

    value: float = 0.0
    feature: int = -1
    threshold: float = 0.0
    left_codes: frozenset[int] | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    n_samples: int = field(default=0, compare=False)

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def goes_left(self, x: np.ndarray) -> bool:
        if self.left_codes is not None:
            return int(np.rint(x[self.feature])) in self.left_codes
        return bool(x[self.feature] <= self.threshold)

    def leaf_for(self, x: np.ndarray) -> "TreeNode":
        node = self
        while not node.is_leaf:
            node = node.left if node.goes_left(x) else node.right  # type: ignore[assignment]
        return node

    def predict_one(self, x: np.ndarray) -> float:
        return self.leaf_for(x).value

    def left_mask(self, X: np.ndarray) -> np.ndarray:
        x = X[:, self.feature]
        if self.left_codes is not None:
            return np.isin(np.rint(x).astype(np.int64), list(self.left_codes))
        return x <= self.threshold

    def apply(self, X: np.ndarray) -> list["TreeNode"]:
        """Leaf reached by each row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out: list[TreeNode] = [self] * len(X)

        def route(node: TreeNode, rows: np.ndarray) -> None:
            if len(rows) == 0:
                return
            if node.is_leaf:
                for r in rows:
                    out[r] = node
                return
            mask = node.left_mask(X[rows])
            route(node.left, rows[mask])  # type: ignore[arg-type]
            route(node.right, rows[~mask])  # type: ignore[arg-type]

        route(self, np.arange(len(X)))
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(len(X), dtype=float)

        def route(node: TreeNode, rows: np.ndarray) -> None:
            if len(rows) == 0:
                return
            if node.is_leaf:
                out[rows] = node.value
                return
            mask = node.left_mask(X[rows])
            route(node.left, rows[mask])  # type: ignore[arg-type]
            route(node.right, rows[~mask])  # type: ignore[arg-type]

        route(self, np.arange(len(X)))
        return out

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        assert self.left is not None and self.right is not None
        return 1 + max(self.left.depth(), self.right.depth())

    def leaves(self) -> Iterator["TreeNode"]:
        if self.is_leaf:
            yield self
            return
        assert self.left is not None and self.right is not None
        yield from self.left.leaves()
        yield from self.right.leaves()

    def n_nodes(self) -> int:
        if self.is_leaf:
            return 1
        assert self.left is not None and self.right is not None
        return 1 + self.left.n_nodes() + self.right.n_nodes()


@dataclass(frozen=True)
class Split:
    feature: int
    gain: float
    threshold: float = 0.0
    left_codes: frozenset[int] | None = None


def impurity(y: np.ndarray, criterion: Criterion, n_classes: int = 0) -> float:
    """Total (not mean) impurity: SSE for variance, n * gini for gini."""
    n = len(y)
    if n == 0:
        return 0.0
    if criterion == Criterion.VARIANCE:
        centered = y - y.mean()
        return float(centered @ centered)
    counts = np.bincount(y.astype(np.int64), minlength=n_classes).astype(float)
    return float(n - (counts @ counts) / n)


def _scan_gains(
    y_sorted: np.ndarray, criterion: Criterion, n_classes: int
) -> np.ndarray:
    """Impurity decrease for every boundary k (left = first k samples), k = 1..n-1."""
    n = len(y_sorted)
    k = np.arange(1, n, dtype=float)
    if criterion == Criterion.VARIANCE:
        centered = y_sorted - y_sorted.mean()
        csum = np.cumsum(centered)[:-1]
        total = centered.sum()
        # SSE(parent) - SSE(left) - SSE(right) on centered targets
        return csum**2 / k + (total - csum) ** 2 / (n - k) - total**2 / n

    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_sorted.astype(np.int64)] = 1.0
    cum = np.cumsum(onehot, axis=0)[:-1]
    total = onehot.sum(axis=0)
    right = total - cum
    left_sq = (cum**2).sum(axis=1) / k
    right_sq = (right**2).sum(axis=1) / (n - k)
    return left_sq + right_sq - (total @ total) / n


def _numeric_split(
    x: np.ndarray, y: np.ndarray, min_leaf: int, criterion: Criterion, n_classes: int
) -> tuple[float, float] | None:
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    gains = _scan_gains(ys, criterion, n_classes)
    n = len(xs)
    k = np.arange(1, n)
    valid = (xs[:-1] < xs[1:]) & (k >= min_leaf) & (n - k >= min_leaf)
    if not valid.any():
        return None
    gains = np.where(valid, gains, -np.inf)
    best = int(np.argmax(gains))
    lo, hi = float(xs[best]), float(xs[best + 1])
    threshold = lo + (hi - lo) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    return float(gains[best]), threshold


def _category_split(
    x: np.ndarray, y: np.ndarray, min_leaf: int, criterion: Criterion, n_classes: int
) -> tuple[float, frozenset[int]] | None:
    codes = np.rint(x).astype(np.int64)
    present = np.unique(codes)
    if len(present) < 2:
        return None
    # Fisher ordering: categories by mean target, ties by code
    sums = np.bincount(codes, weights=y)
    counts = np.bincount(codes)
    means = sums[present] / counts[present]
    ranked = present[np.lexsort((present, means))]
    lookup = np.zeros(int(present.max()) + 1)
    lookup[ranked] = np.arange(len(ranked), dtype=float)
    ranks = lookup[codes]

    found = _numeric_split(ranks, y, min_leaf, criterion, n_classes)
    if found is None:
        return None
    gain, threshold = found
    left = frozenset(int(c) for r, c in enumerate(ranked) if r <= threshold)
    return gain, left


def find_best_split(
    X: np.ndarray,
    y: np.ndarray,
    min_leaf: int,
    criterion: Criterion = Criterion.VARIANCE,
    categorical: Collection[int] = (),
    n_classes: int = 0,
) -> Split | None:
    """Exact greedy search over all features; None if no split improves impurity."""
    parent = impurity(y, criterion, n_classes)
    if parent <= 0.0:
        return None

    best: Split | None = None
    for feature in range(X.shape[1]):
        x = X[:, feature]
        if feature in categorical and criterion == Criterion.VARIANCE:
            found_cat = _category_split(x, y, min_leaf, criterion, n_classes)
            if found_cat is None:
                continue
            gain, codes = found_cat
            candidate = Split(feature, gain, left_codes=codes)
        else:
            found_num = _numeric_split(x, y, min_leaf, criterion, n_classes)
            if found_num is None:
                continue
            gain, threshold = found_num
            candidate = Split(feature, gain, threshold=threshold)
        if best is None or candidate.gain > best.gain:
            best = candidate

    if best is None or best.gain <= _GAIN_TOLERANCE * parent:
        return None
    return best


def mean_leaf(y: np.ndarray) -> float:
    # Sorting first makes the sum independent of sample order
    return float(np.sort(y).mean())


def majority_leaf(y: np.ndarray) -> float:
    counts = np.bincount(y.astype(np.int64))
    return float(np.argmax(counts))


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_leaf: int = 1,
    criterion: Criterion = Criterion.VARIANCE,
    categorical: Collection[int] = (),
    leaf_value: Callable[[np.ndarray], float] | None = None,
    n_classes: int = 0,
) -> TreeNode:
    """Grow a CART tree depth-first.

    Args:
        X: Encoded features, shape (n, d)
        y: Targets (class codes for gini)
        max_depth: Maximum number of splits on any path
        min_leaf: Minimum samples per leaf
        criterion: Split impurity
        categorical: Feature indices eligible for category-subset splits
        leaf_value: Leaf value from the indices of samples in the leaf
        n_classes: Number of classes for gini

    Returns:
        Root node
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if criterion == Criterion.GINI and n_classes <= 0:
        n_classes = int(y.max()) + 1 if len(y) else 1
    categorical = frozenset(
        f for f in categorical if int(np.max(X[:, f], initial=0)) < MAX_SUBSET_CATEGORIES
    )

    def default_leaf(idx: np.ndarray) -> float:
        if criterion == Criterion.GINI:
            return majority_leaf(y[idx])
        return mean_leaf(y[idx])

    value_of = leaf_value or default_leaf

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        node = TreeNode(value=value_of(idx), n_samples=len(idx))
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node
        split = find_best_split(X[idx], y[idx], min_leaf, criterion, categorical, n_classes)
        if split is None:
            return node

        node.feature = split.feature
        node.threshold = split.threshold
        node.left_codes = split.left_codes
        mask = node.left_mask(X[idx])
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    return grow(np.arange(len(y)), 0)


def node_to_doc(node: TreeNode) -> dict[str, Any]:
    """Nested JSON-ready rendering of a tree."""
    if node.is_leaf:
        return {"value": node.value}
    assert node.left is not None and node.right is not None
    doc: dict[str, Any] = {"value": node.value, "feature": node.feature}
    if node.left_codes is not None:
        doc["left_codes"] = sorted(node.left_codes)
    else:
        doc["threshold"] = node.threshold
    doc["left"] = node_to_doc(node.left)
    doc["right"] = node_to_doc(node.right)
    return doc


def node_from_doc(doc: Any) -> TreeNode:
    """Inverse of `node_to_doc`; raises ValueError on malformed input."""
    if not isinstance(doc, dict):
        raise ValueError(f"tree node must be an object, got {type(doc).__name__}")
    try:
        if "left" not in doc:
            return TreeNode(value=float(doc["value"]))
        left_codes = doc.get("left_codes")
        return TreeNode(
            value=float(doc.get("value", 0.0)),
            feature=int(doc["feature"]),
            threshold=float(doc.get("threshold", 0.0)),
            left_codes=frozenset(int(c) for c in left_codes) if left_codes is not None else None,
            left=node_from_doc(doc["left"]),
            right=node_from_doc(doc["right"]),
        )
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed tree node: {e!r}") from e
