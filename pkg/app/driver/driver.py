import math
import statistics
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from app.core.logging import get_logger
from app.driver.base import BaseKernel
from app.driver.models import KernelRun, SampleRecord, SampleStatus
from app.driver.subprocess_kernel import Aggregate, KernelCommand, SubprocessKernel
from app.space.params import Configuration, ParameterSpace, check_config
from app.space.reformulation import BoundReformulation, resolve

logger = get_logger(__name__)

_AGGREGATES = {
    Aggregate.MIN: min,
    Aggregate.MEDIAN: statistics.median,
    Aggregate.MEAN: statistics.fmean,
}


@dataclass(frozen=True)
class KernelDriver:
    """Measures configurations with a kernel and turns runs into sample records.

    Attributes:
        kernel: Kernel executed for every repeat
        space: Space the configurations belong to
        reformulations: Alpha -> concrete target rewrites applied before each run
        clip: Objective upper bound; measurements above it are recorded as clipped
        penalty: Objective recorded for failed runs when no clip is set
        repeats: Kernel runs per sample
        aggregate: Reduction over repeats
        jobs: Maximum concurrent kernel runs in evaluate_batch
    """

    kernel: BaseKernel
    space: ParameterSpace
    reformulations: tuple[BoundReformulation, ...] = ()
    clip: float | None = None
    penalty: float = math.inf
    repeats: int = 1
    aggregate: Aggregate = Aggregate.MIN
    jobs: int = 1
    _checked: list[bool] = field(default_factory=list, repr=False, compare=False)

    @classmethod
    def from_command(
        cls, command: KernelCommand, space: ParameterSpace, **kwargs
    ) -> "KernelDriver":
        return cls(
            SubprocessKernel(command),
            space,
            repeats=command.repeats,
            aggregate=command.aggregate,
            **kwargs,
        )

    def with_options(self, **changes) -> "KernelDriver":
        """Copy of this driver with some options changed (e.g. clip=None)."""
        return replace(self, **changes)

    def _ensure_ready(self) -> None:
        if not self._checked:
            self.kernel.check()
            self._checked.append(True)

    def _finish(self, config: Configuration, runs: list[KernelRun]) -> SampleRecord:
        wall_time = sum(r.wall_time for r in runs)
        failure = next((r for r in runs if r.status != SampleStatus.OK), None)
        if failure is not None:
            objective = self.clip if self.clip is not None else self.penalty
            return SampleRecord(config, objective, failure.status, wall_time)

        values = [r.objective for r in runs if r.objective is not None]
        objective = float(_AGGREGATES[self.aggregate](values))
        if self.clip is not None and objective > self.clip:
            return SampleRecord(config, self.clip, SampleStatus.CLIPPED, wall_time)
        return SampleRecord(config, objective, SampleStatus.OK, wall_time)

    def evaluate(self, config: Configuration) -> SampleRecord:
        """Measure one configuration `repeats` times and aggregate.

        Raises:
            KernelNotFoundError: If the kernel cannot be executed at all
        """
        self._ensure_ready()
        check_config(self.space, config)
        values = resolve(self.space, self.reformulations, config)

        runs: list[KernelRun] = []
        for _ in range(self.repeats):
            run = self.kernel.run_once(values)
            runs.append(run)
            if run.status != SampleStatus.OK:
                break

        record = self._finish(tuple(config), runs)
        logger.bind(
            kernel=self.kernel.name, status=record.status.value, objective=record.objective
        ).debug("sample_evaluated")
        return record

    def evaluate_batch(
        self, configs: Sequence[Configuration], jobs: int | None = None
    ) -> list[SampleRecord]:
        """Measure configurations, up to `jobs` at a time; results keep input order."""
        jobs = self.jobs if jobs is None else jobs
        if jobs < 1:
            raise ValueError(f"parallelism must be >= 1, got {jobs}")
        if not configs:
            return []
        self._ensure_ready()

        if jobs == 1 or len(configs) == 1:
            return [self.evaluate(c) for c in configs]
        with ThreadPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
            return list(pool.map(self.evaluate, configs))
