"""Fixtures for tuning-tree tests."""

import pytest

from app.codegen.trees import build_trees
from app.optimize.grid import OptimizedPoint
from app.space.params import ParameterSpace, ParameterSpec, Role


@pytest.fixture
def step_space() -> ParameterSpace:
    return ParameterSpace(
        (
            ParameterSpec.real("n", 0.0, 3.0, Role.INPUT),
            ParameterSpec.real("m", 0.0, 1.0, Role.INPUT),
            ParameterSpec.integer("T", 1, 32),
            ParameterSpec.categorical("b", [8, 16, 32]),
        )
    )


@pytest.fixture
def step_points() -> list[OptimizedPoint]:
    """Small n wants (4, 8), large n wants (16, 32); m is irrelevant."""
    return [
        OptimizedPoint((0.0, 0.0), (4, 8), 1.0),
        OptimizedPoint((1.0, 1.0), (4, 8), 1.0),
        OptimizedPoint((2.0, 0.0), (16, 32), 1.0),
        OptimizedPoint((3.0, 1.0), (16, 32), 1.0),
    ]


@pytest.fixture
def step_trees(step_space, step_points):
    return build_trees(step_points, step_space)
