"""Per-grid-point design optimization against the surrogate."""

import csv
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.core.exceptions import EncodingError, OptimizationError, StoreFormatError
from app.core.logging import get_logger
from app.core.rng import derive_seed
from app.optimize.ga import GAConfig, ga_minimize
from app.space.params import Configuration, ParameterSpace, Role, encode, subspace
from app.surrogate.gbdt import GBDTModel, predict

logger = get_logger(__name__)

PREDICTED_COLUMN = "predicted_objective"


@dataclass(frozen=True)
class OptimizedPoint:
    """One grid input with its GA-chosen design configuration."""

    input_values: Configuration
    design_config: Configuration
    predicted_objective: float


def _optimize_point(
    model: GBDTModel,
    space: ParameterSpace,
    design_space: ParameterSpace,
    point: Configuration,
    ga: GAConfig,
    seed: int,
) -> OptimizedPoint:
    input_dims = space.input_dims
    design_dims = space.design_dims
    frozen = encode(subspace(space, Role.INPUT), point)

    def objective(design_matrix: np.ndarray) -> np.ndarray:
        full = np.empty((len(design_matrix), len(space)))
        full[:, input_dims] = frozen
        full[:, design_dims] = design_matrix
        return predict(model, full)

    result = ga_minimize(objective, design_space, ga, vectorized=True, seed=seed)
    if not np.isfinite(result.value):
        raise OptimizationError(f"no finite surrogate value at input {point}")
    return OptimizedPoint(tuple(point), tuple(result.config), float(result.value))


def optimize_grid(
    model: GBDTModel,
    space: ParameterSpace,
    grid: Sequence[Configuration],
    ga: GAConfig,
    seed: int | None = None,
    jobs: int = 1,
    label: str = "optimize_grid",
) -> list[OptimizedPoint]:
    """Run one GA per input point on the surrogate.

    Each point's GA seed is derived from the master seed and the point's index,
    so results do not depend on `jobs`.

    Raises:
        OptimizationError: Naming the first grid point that failed
    """
    master = ga.seed if seed is None else seed
    design_space = subspace(space, Role.DESIGN)

    def run(index: int) -> OptimizedPoint:
        try:
            return _optimize_point(
                model, space, design_space, grid[index], ga, derive_seed(master, label, index)
            )
        except OptimizationError as e:
            raise OptimizationError(f"grid point {index} {grid[index]}: {e}") from e

    if jobs > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, len(grid))) as pool:
            points = list(pool.map(run, range(len(grid))))
    else:
        points = [run(i) for i in range(len(grid))]

    logger.bind(points=len(points), generations=ga.generations).debug("grid_optimized")
    return points


def _header(space: ParameterSpace) -> list[str]:
    names = space.names
    return (
        [names[i] for i in space.input_dims]
        + [names[i] for i in space.design_dims]
        + [PREDICTED_COLUMN]
    )


def persist_points(points: Sequence[OptimizedPoint], space: ParameterSpace, path: Path) -> None:
    """CSV: input columns, design columns, predicted_objective."""
    inputs = [space.params[i] for i in space.input_dims]
    designs = [space.params[i] for i in space.design_dims]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_header(space))
        for p in points:
            writer.writerow(
                [s.format(v) for s, v in zip(inputs, p.input_values, strict=True)]
                + [s.format(v) for s, v in zip(designs, p.design_config, strict=True)]
                + [format(p.predicted_objective, ".17g")]
            )


def load_points(path: Path, space: ParameterSpace) -> list[OptimizedPoint]:
    inputs = [space.params[i] for i in space.input_dims]
    designs = [space.params[i] for i in space.design_dims]
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != _header(space):
            raise StoreFormatError(f"unexpected header {header}", 1)
        points = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(inputs) + len(designs) + 1:
                raise StoreFormatError(f"expected {len(inputs) + len(designs) + 1} fields", line)
            try:
                input_values = tuple(s.parse(c) for s, c in zip(inputs, row, strict=False))
                design = tuple(
                    s.parse(c) for s, c in zip(designs, row[len(inputs) :], strict=False)
                )
                predicted = float(row[-1])
            except (EncodingError, ValueError) as e:
                raise StoreFormatError(str(e), line) from e
            points.append(OptimizedPoint(input_values, design, predicted))
    return points
