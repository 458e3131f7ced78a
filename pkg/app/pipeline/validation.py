"""Validation of tuning trees against a baseline on a grid of inputs."""

import csv
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from app.codegen.trees import TuningTrees, predict_config
from app.core.exceptions import EncodingError, StoreFormatError
from app.core.logging import get_logger
from app.driver.driver import KernelDriver
from app.driver.models import SampleRecord
from app.sampling.space_filling import random_sample
from app.space.params import Configuration, ParameterSpace, Role, input_grid, subspace

logger = get_logger(__name__)

# A fixed design configuration or one design configuration per input point
Baseline = Configuration | Mapping[Configuration, Configuration]


@dataclass(frozen=True)
class ValidationRow:
    input_values: Configuration
    tuned_config: Configuration
    baseline_config: Configuration
    tuned: SampleRecord
    baseline: SampleRecord

    @property
    def speedup(self) -> float | None:
        """baseline / tuned, or None when either side has no positive measurement."""
        if not (self.tuned.status.usable and self.baseline.status.usable):
            return None
        if self.tuned.objective <= 0 or self.baseline.objective <= 0:
            return None
        return self.baseline.objective / self.tuned.objective


@dataclass(frozen=True)
class ValidationReport:
    """Per-input rows and speedup aggregates over the rows with a speedup."""

    rows: tuple[ValidationRow, ...]
    geomean_speedup: float
    progressions_pct: float
    regressions_pct: float
    mean_progression_speedup: float
    mean_regression_slowdown: float
    excluded: int

    @property
    def speedups(self) -> list[float]:
        return [s for s in (r.speedup for r in self.rows) if s is not None]

    def summary_lines(self) -> list[str]:
        return [
            f"validation points: {len(self.rows)} ({self.excluded} excluded)",
            f"geomean speedup: {self.geomean_speedup:.4f}",
            f"progressions: {self.progressions_pct:.1f}% "
            f"(mean speedup {self.mean_progression_speedup:.4f})",
            f"regressions: {self.regressions_pct:.1f}% "
            f"(mean slowdown {self.mean_regression_slowdown:.4f})",
        ]


def summarize(rows: Sequence[ValidationRow]) -> ValidationReport:
    """Aggregate speedups; rows without a speedup are counted as excluded."""
    speedups = np.array([s for s in (r.speedup for r in rows) if s is not None], dtype=float)
    excluded = len(rows) - len(speedups)
    if excluded:
        logger.bind(excluded=excluded, total=len(rows)).warning("validation_points_excluded")
    if len(speedups) == 0:
        return ValidationReport(tuple(rows), math.nan, 0.0, 0.0, math.nan, math.nan, excluded)

    up = speedups[speedups > 1.0]
    down = speedups[speedups < 1.0]
    return ValidationReport(
        rows=tuple(rows),
        geomean_speedup=float(np.exp(np.mean(np.log(speedups)))),
        progressions_pct=100.0 * len(up) / len(speedups),
        regressions_pct=100.0 * len(down) / len(speedups),
        mean_progression_speedup=float(up.mean()) if len(up) else math.nan,
        mean_regression_slowdown=float(np.mean(1.0 / down)) if len(down) else math.nan,
        excluded=excluded,
    )


def baseline_for(baseline: Baseline, point: Configuration) -> Configuration:
    if isinstance(baseline, Mapping):
        try:
            return tuple(baseline[tuple(point)])
        except KeyError:
            raise EncodingError(f"reference table has no configuration for input {point}") from None
    return tuple(baseline)


def validate(
    trees: TuningTrees,
    baseline: Baseline,
    grid_dims: Sequence[int],
    driver: KernelDriver,
) -> ValidationReport:
    """Measure tuned and baseline configurations at every validation-grid input.

    Measurements ignore the driver's clip, so speedups compare raw objectives.

    Args:
        trees: Tuning trees under test
        baseline: Fixed design configuration or per-input reference table
        grid_dims: Points per input axis
        driver: Driver measuring full configurations

    Returns:
        Report with one row per grid input
    """
    space = trees.space
    grid = input_grid(space, grid_dims)
    tuned = [predict_config(trees, p) for p in grid]
    base = [baseline_for(baseline, p) for p in grid]

    configs: list[Configuration] = []
    for point, t, b in zip(grid, tuned, base, strict=True):
        configs.append(space.combine(point, t))
        configs.append(space.combine(point, b))
    records = driver.with_options(clip=None).evaluate_batch(configs)

    rows = [
        ValidationRow(point, t, b, records[2 * i], records[2 * i + 1])
        for i, (point, t, b) in enumerate(zip(grid, tuned, base, strict=True))
    ]
    report = summarize(rows)
    logger.bind(
        points=len(rows),
        geomean=round(report.geomean_speedup, 6),
        regressions_pct=round(report.regressions_pct, 2),
    ).info("validation_done")
    return report


def _header(space: ParameterSpace) -> list[str]:
    inputs = subspace(space, Role.INPUT).names
    designs = subspace(space, Role.DESIGN).names
    return [
        *inputs,
        *(f"tuned_{n}" for n in designs),
        *(f"baseline_{n}" for n in designs),
        "tuned_objective",
        "baseline_objective",
        "speedup",
        "tuned_status",
        "baseline_status",
    ]


def persist_validation(report: ValidationReport, space: ParameterSpace, path: Path) -> None:
    """One CSV row per validation input, ready for heatmap plotting."""
    inputs = subspace(space, Role.INPUT).params
    designs = subspace(space, Role.DESIGN).params
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_header(space))
        for row in report.rows:
            speedup = row.speedup
            writer.writerow(
                [s.format(v) for s, v in zip(inputs, row.input_values, strict=True)]
                + [s.format(v) for s, v in zip(designs, row.tuned_config, strict=True)]
                + [s.format(v) for s, v in zip(designs, row.baseline_config, strict=True)]
                + [
                    format(row.tuned.objective, ".17g"),
                    format(row.baseline.objective, ".17g"),
                    format(speedup, ".17g") if speedup is not None else "",
                    row.tuned.status.value,
                    row.baseline.status.value,
                ]
            )


def load_reference(path: Path, space: ParameterSpace) -> dict[Configuration, Configuration]:
    """Read a reference table: one row per input, input columns then design columns.

    Raises:
        StoreFormatError: On a header mismatch or an unparsable cell
    """
    inputs = subspace(space, Role.INPUT).params
    designs = subspace(space, Role.DESIGN).params
    expected = [s.name for s in (*inputs, *designs)]
    table: dict[Configuration, Configuration] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != expected:
            raise StoreFormatError(f"expected header {expected}, got {header}", 1)
        for line, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise StoreFormatError(f"expected {len(expected)} fields", line)
            try:
                point = tuple(s.parse(c) for s, c in zip(inputs, row, strict=False))
                design = tuple(
                    s.parse(c) for s, c in zip(designs, row[len(inputs) :], strict=True)
                )
            except EncodingError as e:
                raise StoreFormatError(str(e), line) from e
            table[point] = design
    return table


@dataclass(frozen=True)
class RegionAnalysis:
    """Objective distribution of random designs at one input, with tuned and baseline ranks.

    Percentile ranks count the share of random designs that measured faster,
    so 0 means nothing random beat the configuration.
    """

    input_values: Configuration
    objectives: np.ndarray
    failed: int
    tuned: SampleRecord
    baseline: SampleRecord
    tuned_percentile: float
    baseline_percentile: float

    def quantiles(self, qs: Sequence[float] = (0.0, 0.1, 0.5, 0.9, 1.0)) -> dict[float, float]:
        if len(self.objectives) == 0:
            return {q: math.nan for q in qs}
        return {q: float(np.quantile(self.objectives, q)) for q in qs}

    def histogram(self, bins: int = 20) -> tuple[np.ndarray, np.ndarray]:
        return np.histogram(self.objectives, bins=bins)


def analyze_region(
    driver: KernelDriver,
    space: ParameterSpace,
    input_point: Configuration,
    tuned: Configuration,
    baseline: Configuration,
    n_random: int,
    seed: int = 0,
) -> RegionAnalysis:
    """Measure `n_random` random designs at one input and rank tuned and baseline among them."""
    if n_random < 1:
        raise ValueError(f"n_random must be >= 1, got {n_random}")
    unclipped = driver.with_options(clip=None)
    designs = random_sample(subspace(space, Role.DESIGN), n_random, seed)
    configs = [space.combine(input_point, d) for d in designs]
    configs += [space.combine(input_point, tuned), space.combine(input_point, baseline)]
    *random_records, tuned_record, baseline_record = unclipped.evaluate_batch(configs)

    usable = np.sort([r.objective for r in random_records if r.status.usable])
    failed = len(random_records) - len(usable)

    def rank(record: SampleRecord) -> float:
        if not record.status.usable or len(usable) == 0:
            return math.nan
        return float(stats.percentileofscore(usable, record.objective, kind="strict"))

    analysis = RegionAnalysis(
        tuple(input_point),
        usable,
        failed,
        tuned_record,
        baseline_record,
        rank(tuned_record),
        rank(baseline_record),
    )
    logger.bind(
        input=list(input_point),
        tuned_pct=round(analysis.tuned_percentile, 2),
        baseline_pct=round(analysis.baseline_percentile, 2),
    ).info("region_analyzed")
    return analysis
