"""Tests for the sampler benchmark."""

import csv
import math

import pytest

from app.pipeline.bench import (
    BenchRow,
    _measured,
    benchmark_samplers,
    median_by_sampler,
    persist_bench,
)
from app.schemas.experiment import SamplerKind


class TestBenchmarkSamplers:
    """Tests for benchmark_samplers."""

    def test_one_row_per_sampler_and_seed(self, make_experiment):
        """Should score every sampler on every seed with finite errors."""
        samplers = (SamplerKind.RANDOM, SamplerKind.LHS)
        rows = benchmark_samplers(make_experiment(), [0, 1], holdout_size=100, samplers=samplers)
        assert [(r.sampler, r.seed) for r in rows] == [
            ("random", 0),
            ("lhs", 0),
            ("random", 1),
            ("lhs", 1),
        ]
        assert all(math.isfinite(r.global_mae) and math.isfinite(r.local_mae) for r in rows)

    def test_deterministic(self, make_experiment):
        """Should give identical rows for identical seeds."""
        config = make_experiment()
        samplers = (SamplerKind.HVS_CV, SamplerKind.GA_ADAPTIVE)
        assert benchmark_samplers(config, [3], 50, samplers) == benchmark_samplers(
            config, [3], 50, samplers
        )

    def test_rejects_empty_holdout(self, make_experiment):
        """Should require a holdout of at least one configuration."""
        with pytest.raises(ValueError):
            benchmark_samplers(make_experiment(), [0], holdout_size=0)

    def test_truths_ignore_the_clip(self, make_driver):
        """Should score against raw measurements, not clipped ones."""
        configs = [(0.0, 0.0, 1.0, 0.0), (0.5, 0.5, 0.5, 0.5)]
        assert _measured(make_driver("quad", clip=0.2), configs) == pytest.approx([2.1, 0.1])

    @pytest.mark.slow
    def test_accuracy_ordering_on_cliff(self, make_experiment):
        """Should rank samplers by local and global accuracy at equal budget on cliff."""
        config = make_experiment(
            kernel={"builtin": "cliff"},
            sampling={
                "method": "ga-adaptive",
                "subsampler": "hvs-cv",
                "schedule": {"b": 0.1, "i": 0.0, "f": 0.8, "s": 200, "n": 2000},
            },
            surrogate={"n_trees": 150, "max_depth": 6, "min_leaf": 2, "learning_rate": 0.1},
            ga={"population": 32, "generations": 30},
            optimization_grid=[32],
            validation_grid=[4],
        )
        samplers = (SamplerKind.RANDOM, SamplerKind.LHS, SamplerKind.HVS, SamplerKind.GA_ADAPTIVE)
        rows = benchmark_samplers(config, range(5), holdout_size=5000, samplers=samplers)
        medians = median_by_sampler(rows)
        global_mae = {name: values[0] for name, values in medians.items()}
        local_mae = {name: values[1] for name, values in medians.items()}

        assert local_mae["ga-adaptive"] < local_mae["lhs"]
        assert local_mae["ga-adaptive"] < local_mae["random"]
        assert global_mae["hvs"] <= 1.1 * global_mae["lhs"]
        assert global_mae["lhs"] <= 1.1 * global_mae["ga-adaptive"]

    @pytest.mark.slow
    def test_all_samplers(self, make_experiment):
        """Should run the default sampler set over several seeds."""
        rows = benchmark_samplers(make_experiment(), range(3), holdout_size=1000)
        assert set(median_by_sampler(rows)) == {"random", "lhs", "hvs-cv", "ga-adaptive"}


class TestBenchOutput:
    """Tests for benchmark aggregation and persistence."""

    ROWS = [
        BenchRow("lhs", 0, 1.0, 4.0),
        BenchRow("lhs", 1, 3.0, math.nan),
        BenchRow("lhs", 2, 2.0, 2.0),
        BenchRow("random", 0, 5.0, 6.0),
    ]

    def test_medians_ignore_nan(self):
        """Should take per-sampler medians over finite values, in first-seen order."""
        medians = median_by_sampler(self.ROWS)
        assert list(medians) == ["lhs", "random"]
        assert medians["lhs"] == (2.0, 3.0)
        assert medians["random"] == (5.0, 6.0)

    def test_persist(self, tmp_path):
        """Should write a header and one row per result."""
        path = tmp_path / "bench.csv"
        persist_bench(self.ROWS, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["sampler", "seed", "global_mae", "local_mae"]
        assert rows[2] == ["lhs", "1", "3", "nan"]
        assert len(rows) == 5
