"""Tests for the builtin synthetic kernels."""

import itertools

import pytest

from app.core.exceptions import DriverError
from app.optimize.ga import brute_force_minimize
from app.pipeline.kernels import BuiltinKernel, best_block, builtin_kernel, get_builtin


class TestQuad:
    """Tests for the quadratic bowl."""

    @pytest.mark.parametrize("x", [(0.0, 0.0), (0.2, 0.9), (1.0, 0.5)])
    def test_optimum_tracks_inputs(self, x):
        """Should reach 0.1 at d = (x1, 1 - x2)."""
        assert builtin_kernel("quad", (*x, x[0], 1.0 - x[1])) == pytest.approx(0.1)

    def test_away_from_optimum(self):
        """Should add the squared distance to the optimum."""
        assert builtin_kernel("quad", (0.0, 0.0, 0.5, 0.5)) == pytest.approx(0.6)


class TestCliff:
    """Tests for the thread/block cliff kernel."""

    def test_reference_value(self):
        """Should give 2.5 at n=3000, T=32, b=128."""
        assert builtin_kernel("cliff", (3000, 32, 128)) == pytest.approx(2.5)

    def test_wrong_block_penalty(self):
        """Should add 0.2 for a block size other than the best one."""
        assert builtin_kernel("cliff", (3000, 32, 8)) == pytest.approx(2.7)

    def test_threads_beyond_useful_do_not_help(self):
        """Should cap useful threads at ceil(n / 128)."""
        assert builtin_kernel("cliff", (256, 2, 8)) == builtin_kernel("cliff", (256, 32, 8))

    @pytest.mark.parametrize(("n", "block"), [(256, 8), (1023, 8), (1024, 32), (2048, 128)])
    def test_best_block(self, n, block):
        """Should switch block sizes at 1024 and 2048."""
        assert best_block(n) == block


class TestDiscrete:
    """Tests for the brute-forceable discrete kernel."""

    @pytest.mark.parametrize("point", [(1, 1), (4, 7), (8, 8)])
    def test_unique_optimum_of_one(self, point):
        """Should have exactly one design reaching 1.0 per input."""
        designs = list(itertools.product(range(1, 9), repeat=3))

        def objective(design):
            return builtin_kernel("discrete", (*point, *design))

        best, value = brute_force_minimize(objective, designs)
        assert value == 1.0
        assert sum(1 for d in designs if objective(d) == 1.0) == 1
        assert all(objective(d) > 1.0 for d in designs if d != best)


class TestBuiltinKernel:
    """Tests for the in-process kernel wrapper."""

    def test_noise_is_bounded_and_repeatable(self):
        """Should scale by a factor within the noise band, identically on every run."""
        kernel = BuiltinKernel("cliff", noise=0.1, noise_seed=3)
        values = {"n": 3000, "T": 32, "b": 128}
        first = kernel.run_once(values).objective
        assert kernel.run_once(values).objective == first
        assert 2.25 <= first <= 2.75

    def test_noise_seed_changes_noise(self):
        """Should draw different factors for different noise seeds."""
        values = {"n": 3000, "T": 32, "b": 128}
        a = BuiltinKernel("cliff", 0.1, 1).run_once(values).objective
        b = BuiltinKernel("cliff", 0.1, 2).run_once(values).objective
        assert a != b

    def test_rejects_full_noise(self):
        """Should refuse noise outside [0, 1)."""
        with pytest.raises(DriverError):
            BuiltinKernel("quad", noise=1.0)

    def test_unknown_builtin(self):
        """Should list the available kernels in the error."""
        with pytest.raises(DriverError, match="quad"):
            get_builtin("nope")

    def test_baselines_are_valid_designs(self):
        """Should ship a baseline inside every builtin design space."""
        from app.space.params import Role, check_config, subspace

        for name in ("quad", "cliff", "discrete"):
            spec = get_builtin(name)
            check_config(subspace(spec.space, Role.DESIGN), spec.baseline)
