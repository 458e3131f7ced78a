"""Hierarchical variance sampling.

A regression partition tree is fitted on (encoded configuration -> objective).
Each leaf is a box of the space; a batch is spread across leaves in proportion
to measure x variance (or measure x coefficient of variation in cv mode) and
drawn uniformly inside each box.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.core.logging import get_logger
from app.core.rng import SeedLike, as_generator, derive_seed
from app.driver.driver import KernelDriver
from app.driver.models import SampleRecord
from app.driver.store import SampleStore
from app.sampling.space_filling import lhs_sample
from app.space.params import Configuration, ParameterSpace, ParamKind, encode_many
from app.surrogate.tree import Criterion, TreeNode, build_tree

logger = get_logger(__name__)

CV_EPSILON = 1e-12
DEFAULT_MIN_LEAF = 10
DEFAULT_MAX_DEPTH = 6

# Per-dimension interval (numeric) or set of category codes
Side = tuple[float, float] | frozenset[int]


class HVSMode(str, Enum):
    VARIANCE = "variance"
    CV = "cv"


@dataclass(frozen=True)
class Partition:
    """One leaf box of the partition tree."""

    box: tuple[Side, ...]
    member_indices: tuple[int, ...]
    variance: float
    mean: float
    measure: float

    def priority(self, mode: HVSMode) -> float:
        if mode == HVSMode.VARIANCE:
            return self.measure * self.variance
        return self.measure * math.sqrt(self.variance) / max(abs(self.mean), CV_EPSILON)


def _full_box(space: ParameterSpace) -> list[Side]:
    box: list[Side] = []
    for spec in space.params:
        if spec.is_categorical:
            box.append(frozenset(range(len(spec.labels))))
        else:
            box.append(spec.bounds)
    return box


def _measure(space: ParameterSpace, box: Sequence[Side]) -> float:
    measure = 1.0
    for spec, side in zip(space.params, box, strict=True):
        if isinstance(side, frozenset):
            measure *= len(side) / len(spec.labels)
        else:
            low, high = spec.bounds
            if high > low:
                measure *= (side[1] - side[0]) / (high - low)
    return measure


def _leaf_boxes(space: ParameterSpace, root: TreeNode) -> list[tuple[TreeNode, list[Side]]]:
    """Leaves in left-to-right order with their boxes."""
    out: list[tuple[TreeNode, list[Side]]] = []

    def walk(node: TreeNode, box: list[Side]) -> None:
        if node.is_leaf:
            out.append((node, box))
            return
        left_box, right_box = list(box), list(box)
        side = box[node.feature]
        if isinstance(side, frozenset):
            left_codes = node.left_codes
            if left_codes is None:
                left_codes = frozenset(c for c in side if c <= node.threshold)
            left_box[node.feature] = side & left_codes
            right_box[node.feature] = side - left_codes
        else:
            left_box[node.feature] = (side[0], min(side[1], node.threshold))
            right_box[node.feature] = (max(side[0], node.threshold), side[1])
        walk(node.left, left_box)  # type: ignore[arg-type]
        walk(node.right, right_box)  # type: ignore[arg-type]

    walk(root, _full_box(space))
    return out


def build_partitions(
    space: ParameterSpace,
    records: Sequence[SampleRecord],
    min_leaf: int = DEFAULT_MIN_LEAF,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> list[Partition]:
    """Fit the partition tree and describe its leaves."""
    X = encode_many(space, [r.config for r in records])
    y = np.array([r.objective for r in records], dtype=float)
    root = build_tree(X, y, max_depth, min_leaf, Criterion.VARIANCE, space.categorical_dims)

    leaf_of = root.apply(X)
    partitions = []
    for leaf, box in _leaf_boxes(space, root):
        members = tuple(i for i, node in enumerate(leaf_of) if node is leaf)
        values = y[list(members)]
        variance = float(np.var(values, ddof=1)) if len(values) > 1 else 0.0
        mean = float(values.mean()) if len(values) else 0.0
        partitions.append(
            Partition(tuple(box), members, variance, mean, _measure(space, box))
        )
    return partitions


def allocate(priorities: Sequence[float], k: int) -> list[int]:
    """Largest-remainder allocation of k points proportional to priorities.

    Remainders go to the largest fractional parts, ties to the lowest index.
    If no priority is positive the allocation is uniform.
    """
    n = len(priorities)
    if n == 0:
        raise ValueError("cannot allocate across zero partitions")
    p = np.asarray(priorities, dtype=float)
    total = float(p.sum())
    if not math.isfinite(total) or total <= 0.0 or np.any(p < 0):
        shares = np.full(n, k / n)
    else:
        shares = k * p / total
    counts = np.floor(shares).astype(np.int64)
    remainder = k - int(counts.sum())
    order = np.argsort(-(shares - counts), kind="stable")
    counts[order[:remainder]] += 1
    return [int(c) for c in counts]


def _draw_in_box(
    space: ParameterSpace, box: Sequence[Side], k: int, rng: np.random.Generator
) -> list[Configuration]:
    columns: list[list] = []
    for spec, side in zip(space.params, box, strict=True):
        if isinstance(side, frozenset):
            codes = sorted(side)
            picks = rng.integers(0, len(codes), size=k)
            columns.append([spec.labels[codes[int(i)]] for i in picks])
        elif spec.kind == ParamKind.REAL:
            columns.append([float(v) for v in rng.uniform(side[0], side[1], size=k)])
        else:
            lo, hi = math.ceil(side[0]), math.floor(side[1])
            if lo > hi:
                mid = round((side[0] + side[1]) / 2)
                lo = hi = int(min(max(mid, spec.bounds[0]), spec.bounds[1]))
            columns.append([int(v) for v in rng.integers(lo, hi + 1, size=k)])
    return [tuple(col[j] for col in columns) for j in range(k)]


def hvs_next_batch(
    space: ParameterSpace,
    store: SampleStore,
    k: int,
    mode: HVSMode = HVSMode.CV,
    min_leaf: int = DEFAULT_MIN_LEAF,
    seed: SeedLike = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> list[Configuration]:
    """k new configurations biased towards large, high-variance partitions.

    Falls back to LHS while the store has fewer than 2 * min_leaf usable records.
    """
    if k < 1:
        raise ValueError(f"batch size must be >= 1, got {k}")
    rng = as_generator(seed)
    records = [r for r in store.usable() if math.isfinite(r.objective)]
    if len(records) < 2 * min_leaf:
        logger.bind(usable=len(records), min_leaf=min_leaf).warning("hvs_fallback_lhs")
        return lhs_sample(space, k, rng)

    partitions = build_partitions(space, records, min_leaf, max_depth)
    priorities = [p.priority(mode) for p in partitions]
    counts = allocate(priorities, k)
    logger.bind(partitions=len(partitions), k=k, mode=mode.value).debug("hvs_allocated")

    batch: list[Configuration] = []
    for partition, count in zip(partitions, counts, strict=True):
        if count:
            batch.extend(_draw_in_box(space, partition.box, count, rng))
    return batch


def hvs_sample(
    space: ParameterSpace,
    driver: KernelDriver,
    n: int,
    bootstrap_ratio: float = 0.1,
    batch_size: int = 100,
    mode: HVSMode = HVSMode.CV,
    min_leaf: int = DEFAULT_MIN_LEAF,
    seed: int = 0,
    store: SampleStore | None = None,
    on_batch: Callable[[list[SampleRecord]], None] | None = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> SampleStore:
    """Standalone HVS sampler: LHS bootstrap, then HVS batches until n samples.

    A partially filled `store` is continued; the bootstrap is regenerated from
    the seed so only its missing tail is measured.
    """
    store = store if store is not None else SampleStore(space)
    n_boot = max(1, min(n, round(bootstrap_ratio * n)))

    if len(store) < n_boot:
        bootstrap = lhs_sample(space, n_boot, derive_seed(seed, "bootstrap"))
        records = driver.evaluate_batch(bootstrap[len(store) :])
        store.extend(records)
        if on_batch is not None:
            on_batch(records)

    while len(store) < n:
        k = min(batch_size, n - len(store))
        configs = hvs_next_batch(
            space, store, k, mode, min_leaf, derive_seed(seed, "hvs", len(store)), max_depth
        )
        records = driver.evaluate_batch(configs)
        store.extend(records)
        if on_batch is not None:
            on_batch(records)
        logger.bind(size=len(store), budget=n, mode=mode.value).info("hvs_batch_measured")
    return store
