"""Tests for validation reports and region analysis."""

import csv
import math

import pytest

from app.codegen.trees import build_trees
from app.core.exceptions import EncodingError, StoreFormatError
from app.driver.models import SampleRecord, SampleStatus
from app.optimize.grid import OptimizedPoint
from app.pipeline.validation import (
    ValidationRow,
    analyze_region,
    baseline_for,
    load_reference,
    persist_validation,
    summarize,
    validate,
)
from app.space.params import input_grid


def _row(tuned: float, baseline: float, status: SampleStatus = SampleStatus.OK) -> ValidationRow:
    return ValidationRow(
        (0.0,),
        (1,),
        (2,),
        SampleRecord((0.0, 1), tuned, status),
        SampleRecord((0.0, 2), baseline, SampleStatus.OK),
    )


@pytest.fixture
def quad_trees(quad_space):
    """Exact trees for the quadratic kernel on a 3x3 grid."""
    points = [
        OptimizedPoint(p, (p[0], 1.0 - p[1]), 0.1) for p in input_grid(quad_space, [3, 3])
    ]
    return build_trees(points, quad_space)


class TestSummarize:
    """Tests for speedup aggregates."""

    def test_symmetric_speedups(self):
        """Should give a geomean of 1 for speedups 2 and 0.5."""
        report = summarize([_row(1.0, 2.0), _row(2.0, 1.0)])
        assert report.geomean_speedup == pytest.approx(1.0)
        assert report.progressions_pct == 50.0
        assert report.regressions_pct == 50.0
        assert report.mean_progression_speedup == pytest.approx(2.0)
        assert report.mean_regression_slowdown == pytest.approx(2.0)
        assert report.excluded == 0

    def test_equal_objectives_are_neutral(self):
        """Should count speedup 1 as neither progression nor regression."""
        report = summarize([_row(1.0, 1.0), _row(1.0, 4.0)])
        assert report.progressions_pct == 50.0
        assert report.regressions_pct == 0.0
        assert math.isnan(report.mean_regression_slowdown)

    def test_failed_and_non_positive_are_excluded(self):
        """Should leave rows without a speedup out of the aggregates."""
        rows = [_row(1.0, 2.0), _row(5.0, 2.0, SampleStatus.TIMEOUT), _row(0.0, 2.0)]
        report = summarize(rows)
        assert report.excluded == 2
        assert report.speedups == [2.0]
        assert report.geomean_speedup == pytest.approx(2.0)

    def test_nothing_usable(self):
        """Should report NaN aggregates when every row is excluded."""
        report = summarize([_row(1.0, 2.0, SampleStatus.FAILED)])
        assert math.isnan(report.geomean_speedup)
        assert report.excluded == 1

    def test_clipped_rows_count(self):
        """Should use clipped measurements as measurements."""
        assert _row(4.0, 2.0, SampleStatus.CLIPPED).speedup == 0.5


class TestValidate:
    """Tests for grid validation."""

    def test_tuned_beats_fixed_baseline(self, quad_trees, make_driver):
        """Should measure the tuned optimum everywhere and never regress."""
        report = validate(quad_trees, (0.5, 0.5), [3, 3], make_driver("quad"))

        assert len(report.rows) == 9
        assert all(r.tuned.objective == pytest.approx(0.1) for r in report.rows)
        assert report.regressions_pct == 0.0
        assert report.progressions_pct == pytest.approx(100.0 * 8 / 9)
        assert report.geomean_speedup > 1.0

    def test_ignores_the_sampling_clip(self, quad_trees, make_driver):
        """Should compare raw objectives even when the driver clips samples."""
        clipped = validate(quad_trees, (0.5, 0.5), [3, 3], make_driver("quad", clip=0.2))
        raw = validate(quad_trees, (0.5, 0.5), [3, 3], make_driver("quad"))

        assert all(r.baseline.status == SampleStatus.OK for r in clipped.rows)
        assert max(r.baseline.objective for r in clipped.rows) > 0.2
        assert [r.speedup for r in clipped.rows] == [r.speedup for r in raw.rows]

    def test_reference_table_baseline(self, quad_trees, make_driver):
        """Should look the baseline up per input point."""
        grid = input_grid(quad_trees.space, [2, 2])
        table = {p: (p[0], 1.0 - p[1]) for p in grid}
        report = validate(quad_trees, table, [2, 2], make_driver("quad"))
        assert all(r.speedup == pytest.approx(1.0) for r in report.rows)

    def test_missing_reference_entry(self):
        """Should reject inputs absent from the reference table."""
        with pytest.raises(EncodingError):
            baseline_for({(0.0,): (1,)}, (1.0,))

    def test_persisted_rows(self, tmp_path, quad_trees, make_driver):
        """Should write one CSV row per input with the expected columns."""
        report = validate(quad_trees, (0.5, 0.5), [2, 2], make_driver("quad"))
        path = tmp_path / "validation.csv"
        persist_validation(report, quad_trees.space, path)

        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == [
            "x1",
            "x2",
            "tuned_d1",
            "tuned_d2",
            "baseline_d1",
            "baseline_d2",
            "tuned_objective",
            "baseline_objective",
            "speedup",
            "tuned_status",
            "baseline_status",
        ]
        assert len(rows) == 5
        assert all(float(r[8]) >= 1.0 for r in rows[1:])


class TestLoadReference:
    """Tests for reference tables."""

    def test_reads_table(self, tmp_path, cliff_space):
        """Should map input tuples to design tuples."""
        path = tmp_path / "ref.csv"
        path.write_text("n,T,b\n256,4,8\n4096,32,128\n")
        assert load_reference(path, cliff_space) == {(256,): (4, 8), (4096,): (32, 128)}

    def test_wrong_header(self, tmp_path, cliff_space):
        """Should reject a table with other columns."""
        path = tmp_path / "ref.csv"
        path.write_text("n,threads,b\n")
        with pytest.raises(StoreFormatError):
            load_reference(path, cliff_space)

    def test_bad_cell(self, tmp_path, cliff_space):
        """Should report the line of an unparsable cell."""
        path = tmp_path / "ref.csv"
        path.write_text("n,T,b\n256,4,8\n300,four,8\n")
        with pytest.raises(StoreFormatError) as exc:
            load_reference(path, cliff_space)
        assert exc.value.line == 3


class TestAnalyzeRegion:
    """Tests for single-input region analysis."""

    def test_ranks_tuned_and_baseline(self, quad_space, make_driver):
        """Should rank the optimum first and a poor baseline behind random designs."""
        analysis = analyze_region(
            make_driver("quad"), quad_space, (0.2, 0.9), (0.2, 0.1), (1.0, 1.0), 100, seed=1
        )
        assert len(analysis.objectives) == 100
        assert list(analysis.objectives) == sorted(analysis.objectives)
        assert analysis.failed == 0
        assert analysis.tuned_percentile == 0.0
        assert analysis.baseline_percentile > 90.0
        quantiles = analysis.quantiles()
        assert quantiles[0.0] <= quantiles[0.5] <= quantiles[1.0]
        counts, _ = analysis.histogram(bins=10)
        assert counts.sum() == 100

    def test_rejects_empty_sample(self, quad_space, make_driver):
        """Should require at least one random design."""
        with pytest.raises(ValueError):
            analyze_region(make_driver("quad"), quad_space, (0.2, 0.9), (0.2, 0.1), (0.5, 0.5), 0)
