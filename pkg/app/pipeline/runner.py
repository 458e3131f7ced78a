"""Staged tuning pipeline: sample, model, optimize, trees, emit, validate, report.

Every stage persists its artifact in the run directory before the next stage
starts. Seeds are derived from the master seed and the stage name, so a
deleted artifact is regenerated identically by `resume`.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

from app.codegen.emit_c import emit_c
from app.codegen.serialize import load_trees, save_trees
from app.codegen.trees import TuningTrees, build_trees
from app.config import get_settings
from app.core.exceptions import FingerprintMismatchError, StageError, TunerError
from app.core.logging import get_logger
from app.core.rng import derive_seed
from app.driver import store as store_io
from app.driver.driver import KernelDriver
from app.driver.models import SampleRecord
from app.driver.store import SampleStore
from app.optimize.grid import OptimizedPoint, load_points, optimize_grid, persist_points
from app.pipeline.validation import (
    Baseline,
    ValidationReport,
    load_reference,
    persist_validation,
    validate,
)
from app.sampling.ga_adaptive import GAAdaptiveSampler
from app.sampling.hvs import HVSMode, hvs_sample
from app.sampling.space_filling import lhs_sample, random_sample
from app.schemas.experiment import (
    ExperimentConfig,
    SamplerKind,
    dump_experiment,
    load_experiment,
)
from app.space.params import ParameterSpace, fingerprint, input_grid
from app.surrogate.gbdt import GBDTModel, load_model, save_model
from app.surrogate.training import train_surrogate

logger = get_logger(__name__)

CONFIG_FILE = "config.json"
SAMPLES_FILE = "samples.csv"
MODEL_FILE = "model.json"
POINTS_FILE = "optimized_points.csv"
TREES_FILE = "trees.json"
C_FILE = "trees.c"
VALIDATION_FILE = "validation.csv"
REPORT_FILE = "report.txt"

STAGES = ("sample", "model", "optimize", "trees", "emit", "validate", "report")

# (stage name, status) where status is "started", "done" or "skipped"
StageCallback = Callable[[str, str], None]


@dataclass(frozen=True)
class PipelineArtifacts:
    output_dir: Path
    store: SampleStore
    model: GBDTModel
    points: list[OptimizedPoint]
    trees: TuningTrees
    c_source: str
    report: ValidationReport


def _measure_tail(
    driver: KernelDriver,
    store: SampleStore,
    configs: list,
    batch_size: int,
    on_batch: Callable[[list[SampleRecord]], None],
) -> None:
    for start in range(len(store), len(configs), batch_size):
        records = driver.evaluate_batch(configs[start : start + batch_size])
        store.extend(records)
        on_batch(records)


def collect_samples(
    config: ExperimentConfig,
    driver: KernelDriver,
    seed: int,
    store: SampleStore | None = None,
    on_batch: Callable[[list[SampleRecord]], None] | None = None,
    jobs: int = 1,
    method: SamplerKind | None = None,
) -> SampleStore:
    """Fill a store up to the sampling budget with the configured (or given) sampler."""
    space = driver.space
    sampling = config.sampling
    schedule = sampling.schedule
    method = method or sampling.method
    store = store if store is not None else SampleStore(space)
    notify = on_batch or (lambda records: None)
    match method:
        case SamplerKind.GA_ADAPTIVE:
            GAAdaptiveSampler(
                space,
                driver,
                schedule,
                sampling.subsampler,
                config.surrogate,
                config.ga,
                seed,
                jobs,
                sampling.min_leaf,
                sampling.partition_depth,
                on_batch=notify,
            ).run(store)
        case SamplerKind.HVS | SamplerKind.HVS_CV:
            mode = HVSMode.CV if method == SamplerKind.HVS_CV else HVSMode.VARIANCE
            hvs_sample(
                space,
                driver,
                schedule.n,
                schedule.b,
                schedule.s,
                mode,
                sampling.min_leaf,
                seed,
                store,
                notify,
                sampling.partition_depth,
            )
        case SamplerKind.LHS:
            _measure_tail(driver, store, lhs_sample(space, schedule.n, seed), schedule.s, notify)
        case SamplerKind.RANDOM:
            configs = random_sample(space, schedule.n, seed)
            _measure_tail(driver, store, configs, schedule.s, notify)
    logger.bind(method=method.value, samples=len(store), **store.status_counts()).info(
        "sampling_done"
    )
    return store


@dataclass
class PipelineRunner:
    """Runs (or resumes) every stage for one experiment in one directory."""

    config: ExperimentConfig
    output_dir: Path
    jobs: int = 1
    resume: bool = False
    on_stage: StageCallback | None = None
    # Set once a stage runs; later stages depend on its output and are rebuilt
    _rebuilding: bool = field(default=False, init=False, repr=False)

    def __post_init__(self) -> None:
        self.output_dir = Path(self.output_dir)
        self.space: ParameterSpace = self.config.build_space()
        self.driver = self.config.build_driver(self.jobs)
        self.seed = self.config.seed

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def _notify(self, stage: str, status: str) -> None:
        logger.bind(stage=stage, status=status).info("pipeline_stage")
        if self.on_stage is not None:
            self.on_stage(stage, status)

    def _stage(self, name: str, func: Callable):
        self._notify(name, "started")
        try:
            result = func()
        except StageError:
            raise
        except Exception as e:
            logger.bind(stage=name, error=str(e)).error("pipeline_stage_failed")
            raise StageError(name, e) from e
        self._rebuilding = True
        self._notify(name, "done")
        return result

    def _reuse(self, name: str, artifact: str) -> bool:
        if self.resume and not self._rebuilding and self.path(artifact).exists():
            self._notify(name, "skipped")
            return True
        return False

    # --- stages ---

    def sample(self) -> SampleStore:
        path = self.path(SAMPLES_FILE)
        schedule = self.config.sampling.schedule
        if self.resume and path.exists():
            try:
                store = store_io.load(path, self.space)
            except TunerError as e:
                raise StageError("sample", e) from e
            if len(store) >= schedule.n:
                self._notify("sample", "skipped")
                return store
            # Drops any half-written last line before appending
            store_io.persist(store, path)
        else:
            store = SampleStore(self.space)
            store_io.persist(store, path)

        def on_batch(records: list[SampleRecord]) -> None:
            store_io.append(path, self.space, records)

        def run() -> SampleStore:
            return collect_samples(
                self.config,
                self.driver,
                derive_seed(self.seed, "sampling"),
                store,
                on_batch,
                self.jobs,
            )

        return self._stage("sample", run)

    def model(self, store: SampleStore) -> GBDTModel:
        path = self.path(MODEL_FILE)
        if self._reuse("model", MODEL_FILE):
            return load_model(path)

        def run() -> GBDTModel:
            train = self.config.surrogate.model_copy(
                update={"seed": derive_seed(self.seed, "surrogate")}
            )
            model = train_surrogate(store, train)
            save_model(model, path)
            return model

        return self._stage("model", run)

    def optimize(self, model: GBDTModel) -> list[OptimizedPoint]:
        path = self.path(POINTS_FILE)
        if self._reuse("optimize", POINTS_FILE):
            return load_points(path, self.space)

        def run() -> list[OptimizedPoint]:
            grid = input_grid(self.space, self.config.optimization_grid)
            points = optimize_grid(
                model,
                self.space,
                grid,
                self.config.ga,
                seed=derive_seed(self.seed, "optimize"),
                jobs=self.jobs,
            )
            persist_points(points, self.space, path)
            return points

        return self._stage("optimize", run)

    def trees(self, points: list[OptimizedPoint]) -> TuningTrees:
        path = self.path(TREES_FILE)
        if self._reuse("trees", TREES_FILE):
            trees = load_trees(path)
            expected, found = fingerprint(self.space), fingerprint(trees.space)
            if found != expected:
                raise StageError("trees", FingerprintMismatchError(expected, found))
            return trees

        def run() -> TuningTrees:
            trees = build_trees(points, self.space, self.config.tree_depth)
            save_trees(trees, path)
            return trees

        return self._stage("trees", run)

    def emit(self, trees: TuningTrees) -> str:
        path = self.path(C_FILE)
        if self._reuse("emit", C_FILE):
            return path.read_text(encoding="utf-8")

        def run() -> str:
            source = emit_c(trees, self.config.symbol_prefix)
            path.write_text(source, encoding="utf-8")
            return source

        return self._stage("emit", run)

    def baseline(self) -> Baseline:
        if self.config.baseline.reference is not None:
            return load_reference(self.config.baseline.reference, self.space)
        return self.config.baseline_design()

    def validate(self, trees: TuningTrees) -> ValidationReport:
        def run() -> ValidationReport:
            report = validate(trees, self.baseline(), self.config.validation_grid, self.driver)
            persist_validation(report, self.space, self.path(VALIDATION_FILE))
            return report

        return self._stage("validate", run)

    def report(self, store: SampleStore, model: GBDTModel, report: ValidationReport) -> str:
        def run() -> str:
            counts = store.status_counts()
            lines = [
                f"kernel: {self.driver.kernel.name}",
                f"sampler: {self.config.sampling.method.value}",
                f"seed: {self.seed}",
                f"samples: {len(store)}",
                "samples by status: " + ", ".join(f"{k}={v}" for k, v in counts.items()),
                f"tuning wall time: {store.total_wall_time():.3f} s",
                f"surrogate trees: {len(model.trees)}",
                *report.summary_lines(),
            ]
            text = "\n".join(lines) + "\n"
            self.path(REPORT_FILE).write_text(text, encoding="utf-8")
            return text

        return self._stage("report", run)

    def run(self) -> PipelineArtifacts:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        if not self.resume:
            self.path(CONFIG_FILE).write_text(dump_experiment(self.config), encoding="utf-8")

        store = self.sample()
        model = self.model(store)
        points = self.optimize(model)
        trees = self.trees(points)
        source = self.emit(trees)
        validation = self.validate(trees)
        self.report(store, model, validation)
        logger.bind(output_dir=str(self.output_dir)).info("pipeline_done")
        return PipelineArtifacts(self.output_dir, store, model, points, trees, source, validation)


def run_pipeline(
    config: ExperimentConfig,
    output_dir: Path | None = None,
    jobs: int = 1,
    on_stage: StageCallback | None = None,
) -> PipelineArtifacts:
    """Run every stage from scratch, overwriting artifacts in the run directory."""
    target = output_dir or config.output_dir or get_settings().runs_dir / "experiment"
    return PipelineRunner(config, target, jobs, resume=False, on_stage=on_stage).run()


def is_complete(output_dir: Path) -> bool:
    return (Path(output_dir) / REPORT_FILE).exists()


def resume(
    output_dir: Path, jobs: int = 1, on_stage: StageCallback | None = None
) -> PipelineArtifacts | None:
    """Continue a run from its stored config and artifacts.

    Returns None for a finished run (nothing to do).

    Raises:
        StageError: Wrapping FingerprintMismatchError if the stored samples belong to another space
    """
    output_dir = Path(output_dir)
    if is_complete(output_dir):
        logger.bind(output_dir=str(output_dir)).info("pipeline_already_complete")
        return None
    config = load_experiment(output_dir / CONFIG_FILE)
    return PipelineRunner(config, output_dir, jobs, resume=True, on_stage=on_stage).run()
