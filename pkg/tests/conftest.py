"""
Pytest configuration and fixtures for tunetree tests.

Provides:
- Small parameter spaces (builtin kernels and a mixed-kind space)
- Drivers over builtin and scripted kernels
- A factory for compact experiment configurations
"""

from collections.abc import Callable, Mapping

import pytest

from app.config import get_settings
from app.driver.base import BaseKernel
from app.driver.driver import KernelDriver
from app.driver.models import KernelRun, SampleStatus
from app.pipeline.kernels import BuiltinKernel, get_builtin
from app.schemas.experiment import ExperimentConfig, parse_experiment
from app.space.params import ParameterSpace, ParameterSpec, Role, Value


class ScriptedKernel(BaseKernel):
    """Kernel computing the objective with a Python callable and counting calls.

    The callable may return a float, or a KernelRun to script failures.
    """

    name = "scripted"

    def __init__(self, func: Callable[[Mapping[str, Value]], float | KernelRun]) -> None:
        self.func = func
        self.calls: list[dict[str, Value]] = []

    def run_once(self, values: Mapping[str, Value]) -> KernelRun:
        self.calls.append(dict(values))
        result = self.func(values)
        if isinstance(result, KernelRun):
            return result
        return KernelRun(SampleStatus.OK, float(result))


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Isolate tests from TUNE_* variables of the developer shell."""
    for var in ("TUNE_DEBUG", "TUNE_JOBS", "TUNE_RUNS_DIR"):
        monkeypatch.delenv(var, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def quad_space() -> ParameterSpace:
    return get_builtin("quad").space


@pytest.fixture
def cliff_space() -> ParameterSpace:
    return get_builtin("cliff").space


@pytest.fixture
def mixed_space() -> ParameterSpace:
    """One parameter of every kind, inputs first."""
    return ParameterSpace(
        (
            ParameterSpec.real("m", 0.0, 10.0, Role.INPUT),
            ParameterSpec.integer("k", 1, 4, Role.INPUT),
            ParameterSpec.real("alpha", 0.0, 1.0),
            ParameterSpec.integer("threads", 1, 16),
            ParameterSpec.categorical("variant", ["left", "right", "crout"]),
            ParameterSpec.boolean("pack"),
        )
    )


@pytest.fixture
def make_driver():
    """Factory for drivers over builtin kernels."""

    def _make(name: str = "quad", **options) -> KernelDriver:
        spec = get_builtin(name)
        return KernelDriver(BuiltinKernel(name), spec.space, **options)

    return _make


@pytest.fixture
def scripted_driver():
    """Factory for drivers over a scripted kernel; returns (driver, kernel)."""

    def _make(space: ParameterSpace, func, **options) -> tuple[KernelDriver, ScriptedKernel]:
        kernel = ScriptedKernel(func)
        return KernelDriver(kernel, space, **options), kernel

    return _make


@pytest.fixture
def make_experiment(tmp_path):
    """Factory for small, fast experiment configurations on builtin kernels."""

    def _make(**overrides) -> ExperimentConfig:
        doc = {
            "kernel": {"builtin": "quad"},
            "sampling": {
                "method": "ga-adaptive",
                "subsampler": "lhs",
                "schedule": {"b": 0.25, "i": 0.0, "f": 0.8, "s": 20, "n": 80},
            },
            "surrogate": {"n_trees": 30, "max_depth": 3, "min_leaf": 2, "learning_rate": 0.3},
            "ga": {"population": 16, "generations": 10},
            "optimization_grid": [4, 4],
            "tree_depth": 4,
            "validation_grid": [3, 3],
            "baseline": {"builtin_default": True},
            "seed": 7,
            "output_dir": str(tmp_path / "run"),
        }
        for key, value in overrides.items():
            doc[key] = value
        return parse_experiment(doc)

    return _make
