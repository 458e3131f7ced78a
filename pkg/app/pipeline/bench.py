"""Sampler comparison at equal budget: global and local surrogate accuracy."""

import csv
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from app.core.exceptions import FitError
from app.core.logging import get_logger
from app.core.rng import derive_seed
from app.driver.driver import KernelDriver
from app.optimize.grid import optimize_grid
from app.pipeline.runner import collect_samples
from app.sampling.space_filling import random_sample
from app.schemas.experiment import ExperimentConfig, SamplerKind
from app.space.params import Configuration, input_grid
from app.surrogate.metrics import global_accuracy, local_accuracy
from app.surrogate.training import train_surrogate

logger = get_logger(__name__)

DEFAULT_SAMPLERS = (
    SamplerKind.RANDOM,
    SamplerKind.LHS,
    SamplerKind.HVS_CV,
    SamplerKind.GA_ADAPTIVE,
)


@dataclass(frozen=True)
class BenchRow:
    sampler: str
    seed: int
    global_mae: float
    local_mae: float


def _measured(driver: KernelDriver, configs: Sequence[Configuration]) -> list[float]:
    # Truths are raw measurements; the clip only shapes what the samplers see
    records = driver.with_options(clip=None).evaluate_batch(configs)
    return [r.objective if r.status.usable else math.nan for r in records]


def benchmark_samplers(
    config: ExperimentConfig,
    seeds: Sequence[int],
    holdout_size: int = 5000,
    samplers: Sequence[SamplerKind] = DEFAULT_SAMPLERS,
    jobs: int = 1,
) -> list[BenchRow]:
    """Train one surrogate per (sampler, seed) at the configured budget and score it.

    Global accuracy is the MAE on a random holdout shared by all samplers of a
    seed. Local accuracy is the MAE at the configurations the surrogate itself
    predicts best on the optimization grid.
    """
    if holdout_size < 1:
        raise ValueError(f"holdout_size must be >= 1, got {holdout_size}")
    driver = config.build_driver(jobs)
    space = driver.space
    grid = input_grid(space, config.optimization_grid)

    rows: list[BenchRow] = []
    for seed in seeds:
        holdout = random_sample(space, holdout_size, derive_seed(seed, "holdout"))
        truths = _measured(driver, holdout)
        kept = [(c, t) for c, t in zip(holdout, truths, strict=True) if math.isfinite(t)]

        for sampler in samplers:
            sampler_seed = derive_seed(seed, "bench", sampler.value)
            store = collect_samples(config, driver, sampler_seed, jobs=jobs, method=sampler)
            train = config.surrogate.model_copy(update={"seed": derive_seed(seed, "surrogate")})
            try:
                model = train_surrogate(store, train)
            except FitError as e:
                logger.bind(sampler=sampler.value, seed=seed, reason=str(e)).warning(
                    "bench_fit_failed"
                )
                rows.append(BenchRow(sampler.value, seed, math.nan, math.nan))
                continue

            global_mae = (
                global_accuracy(model, space, [c for c, _ in kept], [t for _, t in kept]).mae
                if kept
                else math.nan
            )
            points = optimize_grid(
                model, space, grid, config.ga, seed=derive_seed(seed, "optimize"), jobs=jobs
            )
            best = [space.combine(p.input_values, p.design_config) for p in points]
            local_mae = local_accuracy(model, space, lambda cs: _measured(driver, cs), best)

            row = BenchRow(sampler.value, seed, global_mae, local_mae)
            logger.bind(**asdict(row)).info("bench_row")
            rows.append(row)
    return rows


def persist_bench(rows: Sequence[BenchRow], path: Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["sampler", "seed", "global_mae", "local_mae"])
        for row in rows:
            writer.writerow(
                [
                    row.sampler,
                    row.seed,
                    format(row.global_mae, ".17g"),
                    format(row.local_mae, ".17g"),
                ]
            )


def median_by_sampler(rows: Sequence[BenchRow]) -> dict[str, tuple[float, float]]:
    """(median global MAE, median local MAE) per sampler, NaNs ignored."""
    out: dict[str, tuple[float, float]] = {}
    for name in dict.fromkeys(r.sampler for r in rows):
        mine = [r for r in rows if r.sampler == name]
        out[name] = (
            float(np.nanmedian([r.global_mae for r in mine])),
            float(np.nanmedian([r.local_mae for r in mine])),
        )
    return out
