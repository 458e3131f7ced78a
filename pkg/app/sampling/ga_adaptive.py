"""GA-Adaptive sampling.

After an LHS bootstrap, every iteration fits the surrogate on the samples so
far and splits its batch between exploitation (one GA per random input point,
winner measured) and exploration (a sub-sampler). The exploitation share grows
linearly with progress: epsilon = i + (f - i) * |S| / n.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

from pydantic import BaseModel, Field, model_validator

from app.core.exceptions import FitError
from app.core.logging import get_logger
from app.core.rng import derive_seed
from app.driver.driver import KernelDriver
from app.driver.models import SampleRecord
from app.driver.store import SampleStore
from app.optimize.ga import GAConfig
from app.optimize.grid import optimize_grid
from app.sampling.hvs import DEFAULT_MAX_DEPTH, DEFAULT_MIN_LEAF, HVSMode, hvs_next_batch
from app.sampling.space_filling import lhs_sample, random_sample
from app.space.params import Configuration, ParameterSpace, Role, subspace
from app.surrogate.gbdt import TrainConfig
from app.surrogate.training import train_surrogate

logger = get_logger(__name__)


class Subsampler(str, Enum):
    HVS_CV = "hvs-cv"
    HVS = "hvs"
    LHS = "lhs"
    RANDOM = "random"


class ScheduleParams(BaseModel):
    """Bootstrap ratio, exploitation ramp and budget."""

    b: float = Field(default=0.1, gt=0.0, lt=1.0)
    i: float = Field(default=0.0, ge=0.0, le=1.0)
    f: float = Field(default=0.8, ge=0.0, le=1.0)
    s: int = Field(default=100, ge=1)
    n: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def check_schedule(self) -> "ScheduleParams":
        if self.n < self.s:
            raise ValueError(f"budget n={self.n} is smaller than batch size s={self.s}")
        if self.b * self.n < 1:
            raise ValueError(f"bootstrap b*n={self.b * self.n} must be at least 1")
        if self.i > self.f:
            raise ValueError(f"initial ratio i={self.i} exceeds final ratio f={self.f}")
        return self

    @property
    def bootstrap_count(self) -> int:
        return max(1, round(self.b * self.n))

    def epsilon(self, p: float) -> float:
        return self.i + (self.f - self.i) * p


@dataclass(frozen=True)
class IterationStats:
    """Accounting of one GA-Adaptive iteration."""

    size: int  # |S| before the iteration
    p: float
    epsilon: float
    n_ga: int
    n_sub: int
    n_replaced: int = 0
    fallback: bool = False


def draw_subsample(
    subsampler: Subsampler,
    space: ParameterSpace,
    store: SampleStore,
    k: int,
    seed: int,
    min_leaf: int = DEFAULT_MIN_LEAF,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> list[Configuration]:
    if k == 0:
        return []
    match subsampler:
        case Subsampler.RANDOM:
            return random_sample(space, k, seed)
        case Subsampler.LHS:
            return lhs_sample(space, k, seed)
        case Subsampler.HVS:
            return hvs_next_batch(space, store, k, HVSMode.VARIANCE, min_leaf, seed, max_depth)
        case Subsampler.HVS_CV:
            return hvs_next_batch(space, store, k, HVSMode.CV, min_leaf, seed, max_depth)
    raise ValueError(f"unknown subsampler {subsampler!r}")


@dataclass
class GAAdaptiveSampler:
    """Runs the GA-Adaptive loop until the store holds `schedule.n` samples."""

    space: ParameterSpace
    driver: KernelDriver
    schedule: ScheduleParams
    subsampler: Subsampler = Subsampler.HVS_CV
    train_config: TrainConfig = field(default_factory=TrainConfig)
    ga_config: GAConfig = field(default_factory=GAConfig)
    seed: int = 0
    jobs: int = 1
    min_leaf: int = DEFAULT_MIN_LEAF
    max_depth: int = DEFAULT_MAX_DEPTH
    on_batch: Callable[[list[SampleRecord]], None] | None = None
    history: list[IterationStats] = field(default_factory=list)

    def bootstrap_configs(self) -> list[Configuration]:
        return lhs_sample(
            self.space, self.schedule.bootstrap_count, derive_seed(self.seed, "bootstrap")
        )

    def _measure(self, store: SampleStore, configs: list[Configuration]) -> None:
        records = self.driver.evaluate_batch(configs)
        store.extend(records)
        if self.on_batch is not None:
            self.on_batch(records)

    def _exploit(
        self, store: SampleStore, n_ga: int, iteration_seed: int
    ) -> list[Configuration] | None:
        """GA winners on the surrogate, or None when the surrogate is unusable."""
        try:
            model = train_surrogate(
                store,
                self.train_config.model_copy(
                    update={"seed": derive_seed(iteration_seed, "surrogate")}
                ),
            )
        except FitError as e:
            logger.bind(size=len(store), reason=str(e)).warning("ga_adaptive_surrogate_fallback")
            return None
        if not model.trees:
            logger.bind(size=len(store), reason="constant objective").warning(
                "ga_adaptive_surrogate_fallback"
            )
            return None

        inputs = random_sample(
            subspace(self.space, Role.INPUT), n_ga, derive_seed(iteration_seed, "inputs")
        )
        points = optimize_grid(
            model,
            self.space,
            inputs,
            self.ga_config,
            seed=derive_seed(iteration_seed, "ga"),
            jobs=self.jobs,
            label="ga_adaptive",
        )
        return [self.space.combine(p.input_values, p.design_config) for p in points]

    def step(self, store: SampleStore) -> IterationStats:
        """Run one iteration, appending its measurements to the store."""
        n = self.schedule.n
        size = len(store)
        p = size / n
        epsilon = self.schedule.epsilon(p)
        m = min(self.schedule.s, n - size)
        n_ga = min(round(epsilon * self.schedule.s), m)
        iteration_seed = derive_seed(self.seed, "ga_adaptive", size)

        winners: list[Configuration] = []
        fallback = False
        if n_ga > 0:
            exploited = self._exploit(store, n_ga, iteration_seed)
            if exploited is None:
                fallback = True
            else:
                winners = exploited

        # A winner already measured (or repeated in this batch) is swapped for a sub-sampler point
        seen = {r.config for r in store}
        unique: list[Configuration] = []
        for config in winners:
            if config not in seen:
                unique.append(config)
                seen.add(config)
        replaced = len(winners) - len(unique)
        n_sub = m - len(unique)

        explore = draw_subsample(
            self.subsampler,
            self.space,
            store,
            n_sub,
            derive_seed(iteration_seed, "subsample"),
            self.min_leaf,
            self.max_depth,
        )
        self._measure(store, unique + explore)

        stats = IterationStats(size, p, epsilon, len(unique), n_sub, replaced, fallback)
        self.history.append(stats)
        logger.bind(
            size=size,
            budget=n,
            epsilon=round(epsilon, 4),
            ga=len(unique),
            sub=n_sub,
            replaced=replaced,
        ).info("ga_adaptive_iteration")
        return stats

    def run(self, store: SampleStore | None = None) -> SampleStore:
        """Sample until the budget is reached, continuing a partial store if given."""
        store = store if store is not None else SampleStore(self.space)
        n_boot = self.schedule.bootstrap_count
        if len(store) < n_boot:
            self._measure(store, self.bootstrap_configs()[len(store) :])
            logger.bind(bootstrap=n_boot).info("ga_adaptive_bootstrapped")
        while len(store) < self.schedule.n:
            self.step(store)
        return store


def ga_adaptive(
    space: ParameterSpace,
    driver: KernelDriver,
    schedule: ScheduleParams,
    subsampler: Subsampler = Subsampler.HVS_CV,
    train_config: TrainConfig | None = None,
    ga_config: GAConfig | None = None,
    seed: int = 0,
    store: SampleStore | None = None,
    on_batch: Callable[[list[SampleRecord]], None] | None = None,
    jobs: int = 1,
) -> SampleStore:
    """Functional entry point around GAAdaptiveSampler."""
    sampler = GAAdaptiveSampler(
        space,
        driver,
        schedule,
        subsampler,
        train_config or TrainConfig(),
        ga_config or GAConfig(),
        seed,
        jobs,
        on_batch=on_batch,
    )
    return sampler.run(store)

