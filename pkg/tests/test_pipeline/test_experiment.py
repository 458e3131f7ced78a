"""Tests for the experiment configuration document."""

import json
from pathlib import Path

import pytest
import yaml

from app.core.exceptions import ConfigValidationError
from app.driver.subprocess_kernel import SubprocessKernel
from app.pipeline.kernels import BuiltinKernel
from app.schemas.experiment import (
    SamplerKind,
    dump_experiment,
    load_experiment,
    parse_experiment,
)

COMMAND_SPACE = [
    {"name": "n", "kind": "integer", "role": "input", "low": 100, "high": 1000},
    {"name": "threads", "kind": "integer", "low": 1, "high": 8},
    {"name": "a_nb", "kind": "real", "low": 0.0, "high": 1.0},
]


def _minimal(**overrides) -> dict:
    doc = {
        "kernel": {"builtin": "cliff"},
        "optimization_grid": [10],
        "validation_grid": [5],
        "baseline": {"builtin_default": True},
    }
    doc.update(overrides)
    return doc


def _errors(doc) -> list[str]:
    with pytest.raises(ConfigValidationError) as exc:
        parse_experiment(doc)
    return exc.value.errors


class TestParseExperiment:
    """Tests for validation of experiment documents."""

    def test_defaults(self):
        """Should fill every omitted section with defaults."""
        config = parse_experiment(_minimal())
        assert config.sampling.method == SamplerKind.GA_ADAPTIVE
        assert config.sampling.schedule.n == 1000
        assert config.tree_depth == 8
        assert config.build_space().names == ["n", "T", "b"]
        assert config.baseline_design() == (8, 32)

    def test_missing_kernel_path(self):
        """Should report missing fields with their dotted path."""
        doc = _minimal()
        del doc["kernel"]
        assert any(e.startswith("kernel:") for e in _errors(doc))

    def test_schedule_error_path(self):
        """Should report schedule violations under sampling.schedule."""
        doc = _minimal(sampling={"schedule": {"b": 0.001, "s": 10, "n": 100}})
        errors = _errors(doc)
        assert any(e.startswith("sampling.schedule") and "b*n" in e for e in errors)

    def test_both_kernels(self):
        """Should require exactly one kernel source."""
        doc = _minimal(kernel={"builtin": "quad", "command": {"executable": "k"}})
        assert any("exactly one" in e for e in _errors(doc))

    def test_grid_length(self):
        """Should require one grid count per input parameter."""
        assert any("optimization_grid" in e for e in _errors(_minimal(optimization_grid=[4, 4])))

    def test_command_kernel_needs_space(self):
        """Should require a space declaration for command kernels."""
        doc = _minimal(kernel={"command": {"executable": "k"}}, baseline={"design": {}})
        assert any("'space' is required" in e for e in _errors(doc))

    def test_builtin_default_needs_builtin(self):
        """Should refuse builtin_default baselines for command kernels."""
        doc = _minimal(kernel={"command": {"executable": "k"}}, space=COMMAND_SPACE)
        assert any("builtin_default" in e for e in _errors(doc))

    def test_baseline_design_checks(self):
        """Should reject incomplete, unknown or out-of-range baseline designs."""
        base = {"kernel": {"command": {"executable": "k"}}, "space": COMMAND_SPACE}
        assert any("misses" in e for e in _errors(_minimal(**base, baseline={"design": {}})))
        design = {"threads": 99, "a_nb": 0.5}
        assert any("outside" in e for e in _errors(_minimal(**base, baseline={"design": design})))

    def test_invalid_space(self):
        """Should surface space declaration violations."""
        space = [*COMMAND_SPACE, {"name": "bad", "kind": "real", "low": 2.0, "high": 1.0}]
        doc = _minimal(
            kernel={"command": {"executable": "k"}},
            space=space,
            baseline={"design": {"threads": 2, "a_nb": 0.5, "bad": 1.5}},
        )
        assert any("inverted bounds" in e for e in _errors(doc))

    def test_reformulations(self):
        """Should check reformulations against the space."""
        doc = _minimal(
            kernel={"command": {"executable": "k"}},
            space=COMMAND_SPACE,
            reformulations=[{"target": "nb", "alpha": "a_nb", "lower": "1", "upper": "n / m"}],
            baseline={"design": {"threads": 2, "a_nb": 0.5}},
        )
        assert any("unknown names" in e for e in _errors(doc))

        doc["reformulations"][0]["upper"] = "n / threads"
        config = parse_experiment(doc)
        assert config.build_reformulations()[0].target == "nb"


class TestBuildDriver:
    """Tests for building kernel drivers from a configuration."""

    def test_builtin(self):
        """Should wrap builtin kernels with the configured noise."""
        config = parse_experiment(_minimal(kernel={"builtin": "cliff", "noise": 0.05}, clip=9.0))
        driver = config.build_driver(jobs=3)
        assert isinstance(driver.kernel, BuiltinKernel)
        assert driver.kernel.noise == 0.05
        assert driver.clip == 9.0
        assert driver.jobs == 3

    def test_command(self):
        """Should copy repeats and aggregate from the command."""
        doc = _minimal(
            kernel={"command": {"executable": "k", "repeats": 3, "aggregate": "median"}},
            space=COMMAND_SPACE,
            baseline={"design": {"threads": 2, "a_nb": 0.5}},
        )
        driver = parse_experiment(doc).build_driver()
        assert isinstance(driver.kernel, SubprocessKernel)
        assert driver.repeats == 3
        assert driver.aggregate.value == "median"


class TestFiles:
    """Tests for reading and writing experiment files."""

    def test_yaml_and_json_agree(self, tmp_path):
        """Should parse equal configurations from both formats."""
        doc = _minimal(seed=5)
        (tmp_path / "e.yaml").write_text(yaml.safe_dump(doc))
        (tmp_path / "e.json").write_text(json.dumps(doc))
        assert load_experiment(tmp_path / "e.yaml") == load_experiment(tmp_path / "e.json")

    def test_dump_round_trip(self, make_experiment):
        """Should reload the canonical dump into an equal configuration."""
        config = make_experiment()
        assert parse_experiment(json.loads(dump_experiment(config))) == config

    def test_unparsable_file(self, tmp_path):
        """Should report syntax errors as configuration errors."""
        path = tmp_path / "e.json"
        path.write_text("{")
        with pytest.raises(ConfigValidationError, match="cannot parse"):
            load_experiment(path)


CONFIGS_DIR = Path(__file__).resolve().parents[2] / "configs"


class TestShippedConfigs:
    """Tests for the example experiments under configs/."""

    @pytest.mark.parametrize("path", sorted(CONFIGS_DIR.glob("*.*")), ids=lambda p: p.name)
    def test_valid(self, path):
        """Should load every shipped experiment without errors."""
        config = load_experiment(path)
        assert config.output_dir is not None
