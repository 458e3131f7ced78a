"""Single-objective elitist genetic algorithm over a design space.

Real and integer genes use bounded simulated binary crossover and polynomial
mutation (integers are rounded and clamped afterwards); categorical genes use
uniform crossover and random-reset mutation. Survival keeps the best `population`
of parents plus offspring, so the best individual always survives.
"""

from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.core.exceptions import OptimizationError
from app.core.logging import get_logger
from app.core.rng import SeedLike, as_generator
from app.sampling.space_filling import lhs_sample
from app.space.params import Configuration, ParameterSpace, ParamKind, decode, encode_many

logger = get_logger(__name__)

ScalarObjective = Callable[[Configuration], float]
# Maps an encoded design matrix (n, d) to n objective values
VectorObjective = Callable[[np.ndarray], np.ndarray]


class GAConfig(BaseModel):
    """Genetic algorithm hyperparameters."""

    population: int = Field(default=64, ge=4)
    generations: int = Field(default=100, ge=1)
    crossover_prob: float = Field(default=0.9, ge=0.0, le=1.0)
    # None means 1 / number of design parameters
    mutation_prob: float | None = Field(default=None, ge=0.0, le=1.0)
    eta_crossover: float = Field(default=15.0, gt=0.0)
    eta_mutation: float = Field(default=20.0, gt=0.0)
    tournament_size: int = Field(default=2, ge=2)
    seed: int = 0

    @field_validator("population")
    @classmethod
    def population_even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("population must be even")
        return v


@dataclass
class GAResult:
    """Best individual ever evaluated; unpacks as (config, value)."""

    config: Configuration
    value: float
    # Best-ever objective after initialization and after each generation
    history: list[float] = field(default_factory=list)
    evaluations: int = 0

    def __iter__(self) -> Iterator:
        return iter((self.config, self.value))


def _sbx(
    p1: np.ndarray,
    p2: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    eta: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Bounded SBX on matching rows of p1/p2 (numeric genes only)."""
    c1, c2 = p1.copy(), p2.copy()
    u = rng.random(p1.shape)
    swap = rng.random(p1.shape) < 0.5
    active = (rng.random(p1.shape) < 0.5) & (np.abs(p1 - p2) > 1e-14)

    y1 = np.minimum(p1, p2)
    y2 = np.maximum(p1, p2)
    span = np.where(active, y2 - y1, 1.0)
    width = np.where(hi > lo, hi - lo, 1.0)

    def spread(beta: np.ndarray) -> np.ndarray:
        alpha = 2.0 - np.power(beta, -(eta + 1.0))
        return np.where(
            u <= 1.0 / alpha,
            np.power(u * alpha, 1.0 / (eta + 1.0)),
            np.power(1.0 / np.maximum(2.0 - u * alpha, 1e-300), 1.0 / (eta + 1.0)),
        )

    beta_lo = 1.0 + 2.0 * (y1 - lo) / span
    beta_hi = 1.0 + 2.0 * (hi - y2) / span
    child1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1))
    child2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1))
    child1 = np.clip(child1, lo, lo + width)
    child2 = np.clip(child2, lo, lo + width)

    first = np.where(swap, child2, child1)
    second = np.where(swap, child1, child2)
    c1 = np.where(active, first, c1)
    c2 = np.where(active, second, c2)
    return c1, c2


def _polynomial_mutation(
    x: np.ndarray, lo: np.ndarray, hi: np.ndarray, eta: float, prob: float, rng: np.random.Generator
) -> np.ndarray:
    mutate = (rng.random(x.shape) < prob) & (hi > lo)
    u = rng.random(x.shape)
    width = np.where(hi > lo, hi - lo, 1.0)
    d1 = (x - lo) / width
    d2 = (hi - x) / width
    power = 1.0 / (eta + 1.0)
    left = np.power(2.0 * u + (1.0 - 2.0 * u) * np.power(1.0 - d1, eta + 1.0), power) - 1.0
    right = 1.0 - np.power(2.0 * (1.0 - u) + 2.0 * (u - 0.5) * np.power(1.0 - d2, eta + 1.0), power)
    delta = np.where(u < 0.5, left, right)
    return np.where(mutate, np.clip(x + delta * width, lo, hi), x)


class _Genome:
    """Gene layout of a design space in encoded coordinates."""

    def __init__(self, space: ParameterSpace) -> None:
        self.space = space
        self.lo, self.hi = space.bounds_arrays()
        kinds = [p.kind for p in space.params]
        self.numeric = np.array([k in (ParamKind.REAL, ParamKind.INTEGER) for k in kinds])
        self.rounded = np.array([k != ParamKind.REAL for k in kinds])
        self.n_labels = np.array([len(p.labels) if p.is_categorical else 0 for p in space.params])

    def repair(self, X: np.ndarray) -> np.ndarray:
        X = np.clip(X, self.lo, self.hi)
        return np.where(self.rounded, np.clip(np.rint(X), self.lo, self.hi), X)


def ga_minimize(
    objective: ScalarObjective | VectorObjective,
    design_space: ParameterSpace,
    config: GAConfig,
    vectorized: bool = False,
    seed: SeedLike = None,
) -> GAResult:
    """Minimize an objective over a design space.

    Args:
        objective: Scalar objective on decoded configurations, or a vectorized
            objective on encoded design matrices when `vectorized` is set
        design_space: Space searched (every parameter is a gene)
        config: GA hyperparameters
        vectorized: Whether `objective` takes encoded matrices
        seed: Overrides `config.seed`

    Returns:
        GAResult with the best individual ever evaluated
    """
    if len(design_space) == 0:
        raise OptimizationError("design space has no parameters")
    rng = as_generator(config.seed if seed is None else seed)
    genome = _Genome(design_space)
    pop_size = config.population
    d = len(design_space)
    mutation_prob = config.mutation_prob if config.mutation_prob is not None else 1.0 / d
    evaluations = 0

    def evaluate(X: np.ndarray) -> np.ndarray:
        nonlocal evaluations
        evaluations += len(X)
        if vectorized:
            values = np.asarray(objective(X), dtype=float).reshape(len(X))  # type: ignore[arg-type]
        else:
            values = np.array(
                [objective(decode(design_space, row)) for row in X],  # type: ignore[arg-type]
                dtype=float,
            )
        return np.where(np.isfinite(values), values, np.inf)

    population = genome.repair(encode_many(design_space, lhs_sample(design_space, pop_size, rng)))
    fitness = evaluate(population)
    best_i = int(np.argmin(fitness))
    best_x, best_f = population[best_i].copy(), float(fitness[best_i])
    history = [best_f]

    categorical = ~genome.numeric
    for _ in range(config.generations):
        # Tournament selection
        contenders = rng.integers(0, pop_size, size=(pop_size, config.tournament_size))
        winners = contenders[np.arange(pop_size), np.argmin(fitness[contenders], axis=1)]
        parents = population[winners]
        p1, p2 = parents[0::2], parents[1::2]

        do_cross = (rng.random(len(p1)) < config.crossover_prob)[:, None]
        c1, c2 = _sbx(p1, p2, genome.lo, genome.hi, config.eta_crossover, rng)
        take_other = rng.random(p1.shape) < 0.5
        u1 = np.where(take_other, p2, p1)
        u2 = np.where(take_other, p1, p2)
        c1 = np.where(categorical, u1, c1)
        c2 = np.where(categorical, u2, c2)
        c1 = np.where(do_cross, c1, p1)
        c2 = np.where(do_cross, c2, p2)
        offspring = np.empty_like(parents)
        offspring[0::2], offspring[1::2] = c1, c2

        mutated = _polynomial_mutation(
            offspring, genome.lo, genome.hi, config.eta_mutation, mutation_prob, rng
        )
        reset = (rng.random(offspring.shape) < mutation_prob) & categorical
        fresh = np.floor(rng.random(offspring.shape) * np.maximum(genome.n_labels, 1))
        offspring = np.where(categorical, np.where(reset, fresh, offspring), mutated)
        offspring = genome.repair(offspring)

        offspring_fitness = evaluate(offspring)
        pool = np.vstack([population, offspring])
        pool_fitness = np.concatenate([fitness, offspring_fitness])
        keep = np.argsort(pool_fitness, kind="stable")[:pop_size]
        population, fitness = pool[keep], pool_fitness[keep]

        if fitness[0] < best_f:
            best_x, best_f = population[0].copy(), float(fitness[0])
        history.append(best_f)

    return GAResult(
        config=decode(design_space, best_x),
        value=best_f,
        history=history,
        evaluations=evaluations,
    )


def brute_force_minimize(
    objective: ScalarObjective, candidates: Sequence[Configuration]
) -> tuple[Configuration, float]:
    """Exhaustive argmin over an explicit candidate list (first wins ties)."""
    best: tuple[Configuration, float] | None = None
    for candidate in candidates:
        value = float(objective(candidate))
        if best is None or value < best[1]:
            best = (candidate, value)
    if best is None:
        raise OptimizationError("no candidates")
    return best
