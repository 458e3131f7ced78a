"""Expert-knowledge merge.

At every label input the configuration chosen by each candidate tree set is
measured next to the reference configuration; the pointwise best (ties keep
the reference) becomes the training label of the merged trees.
"""

from collections.abc import Sequence
from dataclasses import dataclass

from app.codegen.trees import DEFAULT_MAX_DEPTH, TuningTrees, build_trees, predict_config
from app.core.exceptions import CodegenError
from app.core.logging import get_logger
from app.driver.driver import KernelDriver
from app.driver.models import SampleRecord
from app.optimize.grid import OptimizedPoint
from app.space.params import Configuration

logger = get_logger(__name__)

REFERENCE = "reference"


@dataclass(frozen=True)
class MergeMeasurement:
    """Measurements taken at one input; `chosen` names the winning source."""

    input_values: Configuration
    reference: SampleRecord
    candidates: tuple[SampleRecord, ...]
    chosen: str | None

    @property
    def reference_objective(self) -> float:
        return self.reference.objective


@dataclass(frozen=True)
class MergeResult:
    trees: TuningTrees
    labels: tuple[OptimizedPoint, ...]
    dropped: tuple[Configuration, ...]
    measurements: tuple[MergeMeasurement, ...]


def candidate_name(index: int) -> str:
    return "candidate" if index == 0 else f"candidate_{index + 1}"


def pick_best(
    reference: SampleRecord, candidates: Sequence[SampleRecord]
) -> tuple[str, SampleRecord] | None:
    """Measured argmin; failures never win and ties keep the earlier source."""
    best: tuple[str, SampleRecord] | None = None
    if reference.status.usable:
        best = (REFERENCE, reference)
    for i, record in enumerate(candidates):
        if not record.status.usable:
            continue
        if best is None or record.objective < best[1].objective:
            best = (candidate_name(i), record)
    return best


def expert_merge(
    inputs: Sequence[Configuration],
    candidate: TuningTrees,
    reference: Sequence[Configuration],
    driver: KernelDriver,
    max_depth: int = DEFAULT_MAX_DEPTH,
    extra_candidates: Sequence[TuningTrees] = (),
) -> MergeResult:
    """Merge candidate trees with a reference configuration table by measurement.

    Args:
        inputs: Label input points (input-subspace tuples)
        candidate: Tuned trees
        reference: Design configuration for each input, aligned with `inputs`
        driver: Driver measuring full configurations
        max_depth: Depth of the retrained trees
        extra_candidates: Further tree sets merged in the same pass

    Returns:
        Retrained trees plus the labels, dropped inputs and raw measurements

    Raises:
        CodegenError: If the reference table does not match the inputs or every input fails
    """
    if len(reference) != len(inputs):
        raise CodegenError(
            f"reference has {len(reference)} configurations for {len(inputs)} inputs"
        )
    space = candidate.space
    sets = [candidate, *extra_candidates]

    configs: list[Configuration] = []
    for point, ref in zip(inputs, reference, strict=True):
        configs.append(space.combine(point, ref))
        configs.extend(space.combine(point, predict_config(t, point)) for t in sets)
    records = driver.with_options(clip=None).evaluate_batch(configs)

    width = 1 + len(sets)
    labels: list[OptimizedPoint] = []
    dropped: list[Configuration] = []
    measurements: list[MergeMeasurement] = []
    wins: dict[str, int] = {}
    for i, point in enumerate(inputs):
        ref_record, *cand_records = records[i * width : (i + 1) * width]
        best = pick_best(ref_record, cand_records)
        chosen = best[0] if best is not None else None
        measurements.append(MergeMeasurement(tuple(point), ref_record, tuple(cand_records), chosen))
        if best is None:
            dropped.append(tuple(point))
            continue
        wins[best[0]] = wins.get(best[0], 0) + 1
        _, design = space.split(best[1].config)
        labels.append(OptimizedPoint(tuple(point), design, best[1].objective))

    if dropped:
        logger.bind(dropped=len(dropped), inputs=len(inputs)).warning("merge_inputs_dropped")
    if not labels:
        raise CodegenError("every merge input failed for both reference and candidates")

    trees = build_trees(labels, space, max_depth)
    logger.bind(inputs=len(inputs), **wins).info("expert_merge_done")
    return MergeResult(trees, tuple(labels), tuple(dropped), tuple(measurements))
