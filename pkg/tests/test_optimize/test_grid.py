"""Tests for per-grid-point optimization."""

import pytest

from app.core.exceptions import StoreFormatError
from app.optimize.ga import GAConfig
from app.optimize.grid import OptimizedPoint, load_points, optimize_grid, persist_points
from app.pipeline.kernels import builtin_kernel
from app.sampling.space_filling import lhs_sample
from app.space.params import encode_many, input_grid
from app.surrogate.gbdt import TrainConfig, fit


@pytest.fixture
def quad_model(quad_space):
    configs = lhs_sample(quad_space, 400, seed=0)
    y = [builtin_kernel("quad", c) for c in configs]
    return fit(
        encode_many(quad_space, configs),
        y,
        TrainConfig(n_trees=150, max_depth=4, min_leaf=3, learning_rate=0.2),
    )


class TestOptimizeGrid:
    """Tests for optimize_grid."""

    def test_tracks_the_moving_optimum(self, quad_space, quad_model):
        """Should place designs near (x1, 1 - x2) for every input."""
        grid = input_grid(quad_space, [3, 3])
        ga = GAConfig(population=24, generations=25)
        points = optimize_grid(quad_model, quad_space, grid, ga)

        assert [p.input_values for p in points] == grid
        for p in points:
            x1, x2 = p.input_values
            d1, d2 = p.design_config
            assert abs(d1 - x1) < 0.3
            assert abs(d2 - (1 - x2)) < 0.3
            truth = builtin_kernel("quad", (*p.input_values, *p.design_config))
            assert truth < 0.3

    def test_independent_of_parallelism(self, quad_space, quad_model):
        """Should return identical points for any jobs value."""
        grid = input_grid(quad_space, [2, 3])
        ga = GAConfig(population=8, generations=5)
        serial = optimize_grid(quad_model, quad_space, grid, ga, seed=3, jobs=1)
        parallel = optimize_grid(quad_model, quad_space, grid, ga, seed=3, jobs=4)
        assert serial == parallel

    def test_predicted_objective_is_surrogate_value(self, quad_space, quad_model):
        """Should report the surrogate's value at the chosen design."""
        from app.surrogate.gbdt import predict

        grid = input_grid(quad_space, [2, 2])
        for p in optimize_grid(quad_model, quad_space, grid, GAConfig(population=8, generations=3)):
            x = encode_many(quad_space, [(*p.input_values, *p.design_config)])
            assert predict(quad_model, x)[0] == pytest.approx(p.predicted_objective)


class TestPointsPersistence:
    """Tests for the optimized points CSV."""

    def test_round_trip(self, tmp_path, cliff_space):
        """Should reload the points exactly."""
        points = [
            OptimizedPoint((256,), (2, 8), 1.0000000000000002),
            OptimizedPoint((4096,), (32, 128), 2.56),
        ]
        path = tmp_path / "points.csv"
        persist_points(points, cliff_space, path)
        assert path.read_text().splitlines()[0] == "n,T,b,predicted_objective"
        assert load_points(path, cliff_space) == points

    def test_wrong_header(self, tmp_path, cliff_space):
        """Should reject a file written for other parameters."""
        path = tmp_path / "points.csv"
        path.write_text("m,T,b,predicted_objective\n")
        with pytest.raises(StoreFormatError):
            load_points(path, cliff_space)

    def test_bad_value_line(self, tmp_path, cliff_space):
        """Should report the line of an unparsable value."""
        path = tmp_path / "points.csv"
        path.write_text("n,T,b,predicted_objective\n256,2,8,1.0\n256,2,7,1.0\n")
        with pytest.raises(StoreFormatError) as exc:
            load_points(path, cliff_space)
        assert exc.value.line == 3
