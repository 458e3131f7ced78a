"""Surrogate accuracy metrics."""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from app.core.logging import get_logger
from app.space.params import Configuration, ParameterSpace, encode_many
from app.surrogate.gbdt import GBDTModel, predict

logger = get_logger(__name__)


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float
    mape: float
    # Points left out of MAPE because their truth is zero
    mape_excluded: int = 0
    n: int = 0


def metrics(predictions: Sequence[float], truths: Sequence[float]) -> Metrics:
    """MAE, RMSE and MAPE between predictions and truths."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    if len(p) == 0:
        raise ValueError("metrics need at least one point")

    err = p - t
    mae = float(np.mean(np.abs(err)))
    rmse = float(math.sqrt(np.mean(err**2)))

    nonzero = t != 0.0
    excluded = int(len(t) - np.count_nonzero(nonzero))
    if excluded:
        logger.bind(excluded=excluded, total=len(t)).warning("mape_zero_truths_excluded")
    mape = float(np.mean(np.abs(err[nonzero]) / np.abs(t[nonzero]))) if nonzero.any() else math.nan
    return Metrics(mae=mae, rmse=rmse, mape=mape, mape_excluded=excluded, n=len(p))


def local_accuracy(
    model: GBDTModel,
    space: ParameterSpace,
    truth: Callable[[Sequence[Configuration]], Sequence[float]],
    configs: Sequence[Configuration],
) -> float:
    """MAE between surrogate predictions and truths at the predicted-best configurations.

    Args:
        model: Trained surrogate
        space: Space the configurations belong to
        truth: Measures a batch of full configurations (driver or synthetic function)
        configs: Full configurations (input point plus optimized design)

    Returns:
        Mean absolute error over the points with a finite truth
    """
    predicted = predict(model, encode_many(space, configs))
    measured = np.asarray(truth(configs), dtype=float)
    finite = np.isfinite(measured)
    if not finite.any():
        return math.nan
    return float(np.mean(np.abs(predicted[finite] - measured[finite])))


def global_accuracy(
    model: GBDTModel,
    space: ParameterSpace,
    configs: Sequence[Configuration],
    truths: Sequence[float],
) -> Metrics:
    """Metrics on an independent holdout of configurations with known objectives."""
    predicted = predict(model, encode_many(space, configs))
    return metrics(predicted.tolist(), list(truths))
