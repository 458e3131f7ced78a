"""Tests for the expert-knowledge merge."""

import pytest

from app.codegen.merge import REFERENCE, expert_merge, pick_best
from app.codegen.trees import build_trees, predict_config
from app.core.exceptions import CodegenError
from app.driver.models import KernelRun, SampleRecord, SampleStatus
from app.optimize.grid import OptimizedPoint
from app.pipeline.kernels import builtin_kernel
from app.pipeline.runner import run_pipeline
from app.space.params import ParameterSpace, ParameterSpec, Role, input_grid

INPUTS = [(1,), (2,), (3,), (4,)]


@pytest.fixture
def space():
    return ParameterSpace(
        (
            ParameterSpec.integer("n", 1, 4, Role.INPUT),
            ParameterSpec.integer("T", 1, 8),
        )
    )


def best_is_double(values) -> float:
    return abs(values["T"] - 2 * values["n"]) + 1.0


@pytest.fixture
def candidate(space):
    """Right for small n, wrong for large n."""
    labels = [(2,), (4,), (1,), (1,)]
    return build_trees(
        [OptimizedPoint(p, d, 0.0) for p, d in zip(INPUTS, labels, strict=True)], space
    )


# Wrong for small n, right for large n
REFERENCE_TABLE = [(8,), (8,), (6,), (8,)]


def _record(objective: float, status: SampleStatus = SampleStatus.OK) -> SampleRecord:
    return SampleRecord((), objective, status)


class TestPickBest:
    """Tests for the pointwise choice."""

    def test_tie_keeps_reference(self):
        """Should keep the reference on equal objectives."""
        assert pick_best(_record(1.0), [_record(1.0)])[0] == REFERENCE

    def test_lower_candidate_wins(self):
        """Should choose the strictly faster candidate."""
        assert pick_best(_record(2.0), [_record(1.0)])[0] == "candidate"

    def test_failures_never_win(self):
        """Should skip failed records, even with a low recorded objective."""
        failed = _record(0.0, SampleStatus.FAILED)
        assert pick_best(failed, [_record(3.0)])[0] == "candidate"
        assert pick_best(_record(3.0), [failed])[0] == REFERENCE
        assert pick_best(failed, [failed]) is None

    def test_extra_candidates_are_numbered(self):
        """Should name later candidates candidate_2, candidate_3, ..."""
        assert pick_best(_record(3.0), [_record(2.0), _record(1.0)])[0] == "candidate_2"


class TestExpertMerge:
    """Tests for expert_merge."""

    def test_merged_trees_take_the_best_of_both(self, space, candidate, scripted_driver):
        """Should learn the pointwise best of candidate and reference."""
        driver, _ = scripted_driver(space, best_is_double)
        result = expert_merge(INPUTS, candidate, REFERENCE_TABLE, driver)

        assert [m.chosen for m in result.measurements] == [
            "candidate",
            "candidate",
            REFERENCE,
            REFERENCE,
        ]
        assert [p.design_config for p in result.labels] == [(2,), (4,), (6,), (8,)]
        assert all(p.predicted_objective == 1.0 for p in result.labels)
        assert [predict_config(result.trees, p) for p in INPUTS] == [(2,), (4,), (6,), (8,)]
        assert result.dropped == ()

    def test_measures_in_one_batch(self, space, candidate, scripted_driver):
        """Should measure the reference and the candidate at every input."""
        driver, kernel = scripted_driver(space, best_is_double)
        expert_merge(INPUTS, candidate, REFERENCE_TABLE, driver)
        assert len(kernel.calls) == 2 * len(INPUTS)
        assert kernel.calls[:2] == [{"n": 1, "T": 8}, {"n": 1, "T": 2}]

    def test_failed_inputs_are_dropped(self, space, candidate, scripted_driver):
        """Should drop inputs where every measurement failed."""

        def kernel(values):
            if values["n"] == 4:
                return KernelRun(SampleStatus.FAILED)
            return best_is_double(values)

        driver, _ = scripted_driver(space, kernel)
        result = expert_merge(INPUTS, candidate, REFERENCE_TABLE, driver)
        assert result.dropped == ((4,),)
        assert len(result.labels) == 3
        assert result.measurements[-1].chosen is None

    def test_everything_failed(self, space, candidate, scripted_driver):
        """Should raise when no input produced a label."""
        driver, _ = scripted_driver(space, lambda v: KernelRun(SampleStatus.TIMEOUT))
        with pytest.raises(CodegenError, match="every merge input failed"):
            expert_merge(INPUTS, candidate, REFERENCE_TABLE, driver)

    def test_reference_length_mismatch(self, space, candidate, scripted_driver):
        """Should reject a reference table not aligned with the inputs."""
        driver, _ = scripted_driver(space, best_is_double)
        with pytest.raises(CodegenError):
            expert_merge(INPUTS, candidate, REFERENCE_TABLE[:2], driver)

    def test_extra_candidates(self, space, candidate, scripted_driver):
        """Should let a second candidate win where it is best."""
        perfect = build_trees(
            [OptimizedPoint(p, (2 * p[0],), 0.0) for p in INPUTS], space
        )
        driver, kernel = scripted_driver(space, best_is_double)
        result = expert_merge(
            INPUTS, candidate, [(1,)] * 4, driver, extra_candidates=(perfect,)
        )
        assert len(kernel.calls) == 3 * len(INPUTS)
        assert [m.chosen for m in result.measurements] == [
            "candidate",
            "candidate",
            "candidate_2",
            "candidate_2",
        ]

    @pytest.mark.slow
    def test_cliff_merge_is_no_worse_than_either_source(self, make_experiment, make_driver):
        """Should match the better of tuned trees and reference at every label input."""
        config = make_experiment(
            kernel={"builtin": "cliff"},
            sampling={
                "method": "ga-adaptive",
                "subsampler": "hvs-cv",
                "schedule": {"b": 0.1, "i": 0.0, "f": 0.8, "s": 100, "n": 600},
            },
            surrogate={"n_trees": 100, "max_depth": 6, "min_leaf": 2, "learning_rate": 0.1},
            ga={"population": 32, "generations": 30},
            optimization_grid=[32],
            validation_grid=[4],
        )
        tuned = run_pipeline(config).trees
        cliff_space = tuned.space
        inputs = input_grid(cliff_space, [32])
        # Expert table: all threads, middle block size
        reference = [(32, 32)] * len(inputs)

        result = expert_merge(inputs, tuned, reference, make_driver("cliff"), max_depth=8)

        def objective(point, design) -> float:
            return builtin_kernel("cliff", cliff_space.combine(point, design))

        for point, ref in zip(inputs, reference, strict=True):
            merged = objective(point, predict_config(result.trees, point))
            best = min(objective(point, predict_config(tuned, point)), objective(point, ref))
            assert merged <= 1.02 * best, point
            assert merged <= objective(point, ref), point
