"""Tests for random and Latin hypercube sampling."""

from collections import Counter

import numpy as np
import pytest

from app.sampling.space_filling import lhs_sample, random_sample
from app.space.params import ParameterSpace, ParameterSpec, check_config


class TestRandomSample:
    """Tests for uniform random sampling."""

    def test_configs_are_valid(self, mixed_space):
        """Should only produce configurations inside the space."""
        for config in random_sample(mixed_space, 200, seed=1):
            check_config(mixed_space, config)

    def test_seeded_draws_are_reproducible(self, mixed_space):
        """Should return identical samples for identical seeds."""
        assert random_sample(mixed_space, 20, seed=5) == random_sample(mixed_space, 20, seed=5)
        assert random_sample(mixed_space, 20, seed=5) != random_sample(mixed_space, 20, seed=6)

    def test_rejects_empty_request(self, mixed_space):
        """Should reject k < 1."""
        with pytest.raises(ValueError):
            random_sample(mixed_space, 0)


class TestLHSSample:
    """Tests for Latin hypercube sampling."""

    def test_one_point_per_real_stratum(self, mixed_space):
        """Should place exactly one point in each of the k strata of a real axis."""
        k = 16
        samples = lhs_sample(mixed_space, k, seed=2)
        for index, (low, high) in ((0, (0.0, 10.0)), (2, (0.0, 1.0))):
            values = np.array([s[index] for s in samples])
            strata = np.floor((values - low) / (high - low) * k).astype(int)
            assert sorted(strata) == list(range(k))

    @pytest.mark.parametrize("dims", range(1, 7))
    def test_stratified_for_every_size_and_seed(self, dims):
        """Should fill each of the k strata of every axis exactly once, for all k and seeds."""
        space = ParameterSpace(tuple(ParameterSpec.real(f"x{i}", -2.0, 6.0) for i in range(dims)))
        for k in range(1, 65):
            for seed in range(100):
                values = np.array(lhs_sample(space, k, seed=seed))
                strata = np.floor((values + 2.0) / 8.0 * k).astype(int)
                for axis in range(dims):
                    assert sorted(strata[:, axis]) == list(range(k)), (k, seed, axis)

    def test_integer_axis_is_stratified(self, mixed_space):
        """Should cover every integer once when k equals the range width."""
        samples = lhs_sample(mixed_space, 16, seed=3)
        assert sorted(s[3] for s in samples) == list(range(1, 17))
        assert Counter(s[1] for s in samples) == {1: 4, 2: 4, 3: 4, 4: 4}

    def test_categories_are_balanced(self, mixed_space):
        """Should use each label floor(k/m) or ceil(k/m) times."""
        samples = lhs_sample(mixed_space, 16, seed=4)
        assert sorted(Counter(s[4] for s in samples).values()) == [5, 5, 6]
        assert Counter(s[5] for s in samples) == {True: 8, False: 8}

    def test_configs_are_valid(self, mixed_space):
        """Should only produce configurations inside the space."""
        for config in lhs_sample(mixed_space, 37, seed=9):
            check_config(mixed_space, config)

    def test_accepts_generator(self, quad_space):
        """Should draw from a passed generator without reseeding it."""
        a = lhs_sample(quad_space, 8, np.random.default_rng(0))
        rng = np.random.default_rng(0)
        b = lhs_sample(quad_space, 8, rng)
        c = lhs_sample(quad_space, 8, rng)
        assert a == b
        assert b != c
