"""Space-filling samplers: uniform random and Latin hypercube."""

import numpy as np
from scipy.stats import qmc

from app.core.rng import SeedLike, as_generator
from app.space.params import Configuration, ParameterSpace, ParameterSpec, ParamKind


def _from_unit(spec: ParameterSpec, u: np.ndarray) -> list:
    """Map unit-interval draws onto a numeric parameter's domain."""
    assert spec.low is not None and spec.high is not None
    if spec.kind == ParamKind.REAL:
        return [float(v) for v in spec.low + u * (spec.high - spec.low)]
    width = int(spec.high - spec.low) + 1
    offsets = np.minimum(np.floor(u * width), width - 1).astype(np.int64)
    return [int(spec.low) + int(o) for o in offsets]


def _transpose(columns: list[list], k: int) -> list[Configuration]:
    return [tuple(col[j] for col in columns) for j in range(k)]


def random_sample(space: ParameterSpace, k: int, seed: SeedLike = None) -> list[Configuration]:
    """k i.i.d. configurations, uniform per dimension (uniform over categories)."""
    if k < 1:
        raise ValueError(f"sample count must be >= 1, got {k}")
    rng = as_generator(seed)
    columns: list[list] = []
    for spec in space.params:
        if spec.is_categorical:
            codes = rng.integers(0, len(spec.labels), size=k)
            columns.append([spec.labels[int(c)] for c in codes])
        else:
            columns.append(_from_unit(spec, rng.random(k)))
    return _transpose(columns, k)


def lhs_sample(space: ParameterSpace, k: int, seed: SeedLike = None) -> list[Configuration]:
    """k configurations with one point per stratum on every numeric axis.

    Numeric axes split [low, high] into k equal strata with independent random
    pairings across axes. Categorical axes get a shuffled round-robin of labels,
    so each label appears floor(k/m) or ceil(k/m) times.
    """
    if k < 1:
        raise ValueError(f"sample count must be >= 1, got {k}")
    rng = as_generator(seed)
    numeric = [i for i, p in enumerate(space.params) if not p.is_categorical]
    unit = (
        qmc.LatinHypercube(d=len(numeric), rng=rng).random(k)
        if numeric
        else np.empty((k, 0))
    )

    columns: list[list] = []
    numeric_col = 0
    for spec in space.params:
        if spec.is_categorical:
            m = len(spec.labels)
            order = rng.permutation(m)
            codes = order[np.arange(k) % m]
            rng.shuffle(codes)
            columns.append([spec.labels[int(c)] for c in codes])
        else:
            columns.append(_from_unit(spec, unit[:, numeric_col]))
            numeric_col += 1
    return _transpose(columns, k)
