"""Synthetic kernels with known optima.

They stand in for a real executable in tests and demos:
- quad: smooth quadratic bowl whose optimum tracks the inputs
- cliff: thread count and block size with performance cliffs on the input size
- discrete: small integer space, enumerable by brute force
"""

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from functools import cache

import numpy as np

from app.core.exceptions import DriverError
from app.core.rng import derive_seed
from app.driver.base import BaseKernel
from app.driver.models import KernelRun, SampleStatus
from app.space.params import Configuration, ParameterSpace, ParameterSpec, Role, Value, label_text

CLIFF_BLOCKS = (8, 16, 32, 64, 128)
DISCRETE_LEVELS = 8
DISCRETE_TABLE_SEED = 20240611


def quad(values: Mapping[str, Value]) -> float:
    x1, x2 = float(values["x1"]), float(values["x2"])
    d1, d2 = float(values["d1"]), float(values["d2"])
    return 0.1 + (d1 - x1) ** 2 + (d2 - (1.0 - x2)) ** 2


def best_block(n: int) -> int:
    if n < 1024:
        return 8
    if n < 2048:
        return 32
    return 128


def cliff(values: Mapping[str, Value]) -> float:
    n = int(values["n"])
    threads = int(values["T"])
    block = int(values["b"])
    useful = min(threads, math.ceil(n / 128))
    return n / (50.0 * useful) + (0.2 if block != best_block(n) else 0.0)


@cache
def _discrete_tables() -> tuple[np.ndarray, np.ndarray]:
    """Per-input optimum (8x8x3) and a bounded ripple over the full space."""
    rng = np.random.default_rng(DISCRETE_TABLE_SEED)
    optima = rng.integers(1, DISCRETE_LEVELS + 1, size=(DISCRETE_LEVELS, DISCRETE_LEVELS, 3))
    ripple = rng.random(size=(DISCRETE_LEVELS,) * 5)
    return optima, ripple


def discrete(values: Mapping[str, Value]) -> float:
    i1, i2 = int(values["i1"]) - 1, int(values["i2"]) - 1
    design = np.array([int(values["p1"]), int(values["p2"]), int(values["p3"])])
    optima, ripple = _discrete_tables()
    distance = float(np.abs(design - optima[i1, i2]).sum())
    # Ripple is zero at the optimum so the table keeps a unique argmin per input
    bump = 0.0 if distance == 0 else 0.1 * float(ripple[(i1, i2, *(design - 1))])
    return 1.0 + 0.25 * distance + bump


@dataclass(frozen=True)
class BuiltinSpec:
    name: str
    space: ParameterSpace
    baseline: Configuration
    function: Callable[[Mapping[str, Value]], float]


_BUILTINS = {
    "quad": BuiltinSpec(
        "quad",
        ParameterSpace(
            (
                ParameterSpec.real("x1", 0.0, 1.0, Role.INPUT),
                ParameterSpec.real("x2", 0.0, 1.0, Role.INPUT),
                ParameterSpec.real("d1", 0.0, 1.0),
                ParameterSpec.real("d2", 0.0, 1.0),
            )
        ),
        (0.5, 0.5),
        quad,
    ),
    "cliff": BuiltinSpec(
        "cliff",
        ParameterSpace(
            (
                ParameterSpec.integer("n", 256, 4096, Role.INPUT),
                ParameterSpec.integer("T", 1, 32),
                ParameterSpec.categorical("b", CLIFF_BLOCKS),
            )
        ),
        (8, 32),
        cliff,
    ),
    "discrete": BuiltinSpec(
        "discrete",
        ParameterSpace(
            (
                ParameterSpec.integer("i1", 1, DISCRETE_LEVELS, Role.INPUT),
                ParameterSpec.integer("i2", 1, DISCRETE_LEVELS, Role.INPUT),
                ParameterSpec.integer("p1", 1, DISCRETE_LEVELS),
                ParameterSpec.integer("p2", 1, DISCRETE_LEVELS),
                ParameterSpec.integer("p3", 1, DISCRETE_LEVELS),
            )
        ),
        (4, 4, 4),
        discrete,
    ),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def get_builtin(name: str) -> BuiltinSpec:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise DriverError(
            f"unknown builtin kernel '{name}' (expected one of {', '.join(BUILTIN_NAMES)})"
        ) from None


def builtin_kernel(name: str, config: Configuration) -> float:
    """Objective of a builtin kernel at a full configuration (space order), without noise."""
    spec = get_builtin(name)
    return spec.function(dict(zip(spec.space.names, config, strict=True)))


class BuiltinKernel(BaseKernel):
    """In-process synthetic kernel.

    With `noise > 0` the objective is scaled by a factor in [1 - noise, 1 + noise]
    derived from the configuration itself, so repeated runs stay identical.
    """

    def __init__(self, name: str, noise: float = 0.0, noise_seed: int = 0) -> None:
        if not 0.0 <= noise < 1.0:
            raise DriverError(f"builtin noise must lie in [0, 1), got {noise}")
        self.spec = get_builtin(name)
        self.name = name
        self.noise = noise
        self.noise_seed = noise_seed

    def _noise_factor(self, values: Mapping[str, Value]) -> float:
        key = ",".join(label_text(v) for v in values.values())
        u = np.random.default_rng(derive_seed(self.noise_seed, key)).random()
        return 1.0 + self.noise * (2.0 * u - 1.0)

    def run_once(self, values: Mapping[str, Value]) -> KernelRun:
        objective = self.spec.function(values)
        if self.noise:
            objective *= self._noise_factor(values)
        return KernelRun(SampleStatus.OK, objective, wall_time=0.0)
