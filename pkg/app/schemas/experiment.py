"""Experiment configuration document (JSON or YAML)."""

import json
from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from app.core.exceptions import ConfigValidationError, SpaceValidationError, TunerError
from app.driver.driver import KernelDriver
from app.driver.subprocess_kernel import KernelCommand
from app.optimize.ga import GAConfig
from app.sampling.ga_adaptive import ScheduleParams, Subsampler
from app.sampling.hvs import DEFAULT_MAX_DEPTH, DEFAULT_MIN_LEAF
from app.space.params import (
    Configuration,
    Label,
    ParameterSpace,
    ParameterSpec,
    ParamKind,
    Role,
    check_config,
    subspace,
    validate_space,
)
from app.space.reformulation import BoundReformulation, check_reformulations
from app.surrogate.gbdt import TrainConfig


class ParameterDecl(BaseModel):
    name: str
    kind: ParamKind
    role: Role = Role.DESIGN
    low: float | None = None
    high: float | None = None
    categories: list[Label] = Field(default_factory=list)

    def to_spec(self) -> ParameterSpec:
        if self.kind == ParamKind.BOOLEAN:
            return ParameterSpec.boolean(self.name, self.role)
        if self.kind == ParamKind.CATEGORICAL:
            return ParameterSpec.categorical(self.name, self.categories, self.role)
        return ParameterSpec(self.name, self.kind, self.role, self.low, self.high)


class ReformulationDecl(BaseModel):
    """`target` = lerp(`alpha`, `lower`, `upper`), bounds given as expressions."""

    target: str
    alpha: str
    lower: str
    upper: str
    integer: bool = False

    def to_reformulation(self) -> BoundReformulation:
        return BoundReformulation(self.target, self.alpha, self.lower, self.upper, self.integer)


class KernelConfig(BaseModel):
    """Either a builtin synthetic kernel or an external command."""

    builtin: str | None = None
    noise: float = Field(default=0.0, ge=0.0, lt=1.0)
    noise_seed: int = 0
    command: KernelCommand | None = None

    @model_validator(mode="after")
    def one_kernel(self) -> "KernelConfig":
        if (self.builtin is None) == (self.command is None):
            raise ValueError("exactly one of 'builtin' and 'command' must be set")
        return self


class SamplerKind(str, Enum):
    GA_ADAPTIVE = "ga-adaptive"
    HVS = "hvs"
    HVS_CV = "hvs-cv"
    LHS = "lhs"
    RANDOM = "random"


class SamplingConfig(BaseModel):
    method: SamplerKind = SamplerKind.GA_ADAPTIVE
    subsampler: Subsampler = Subsampler.HVS_CV
    schedule: ScheduleParams = Field(default_factory=ScheduleParams)
    min_leaf: int = Field(default=DEFAULT_MIN_LEAF, ge=1)
    partition_depth: int = Field(default=DEFAULT_MAX_DEPTH, ge=1)


class BaselineConfig(BaseModel):
    """Fixed design values, a per-input reference CSV, or the builtin kernel's default."""

    design: dict[str, Label] | None = None
    reference: Path | None = None
    builtin_default: bool = False

    @model_validator(mode="after")
    def one_baseline(self) -> "BaselineConfig":
        chosen = [self.design is not None, self.reference is not None, self.builtin_default]
        if sum(chosen) != 1:
            raise ValueError("exactly one of 'design', 'reference', 'builtin_default' must be set")
        return self


class ExperimentConfig(BaseModel):
    """Everything a pipeline run needs, validated up front."""

    space: list[ParameterDecl] = Field(default_factory=list)
    reformulations: list[ReformulationDecl] = Field(default_factory=list)
    kernel: KernelConfig
    clip: float | None = Field(default=None, gt=0)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    surrogate: TrainConfig = Field(default_factory=TrainConfig)
    ga: GAConfig = Field(default_factory=GAConfig)
    optimization_grid: list[int]
    tree_depth: int = Field(default=8, ge=0)
    symbol_prefix: str = "tuned"
    validation_grid: list[int]
    baseline: BaselineConfig
    seed: int = 0
    output_dir: Path | None = None

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        if self.kernel.builtin is None and not self.space:
            raise ValueError("'space' is required for command kernels")
        if self.baseline.builtin_default and self.kernel.builtin is None:
            raise ValueError("'baseline.builtin_default' needs a builtin kernel")
        try:
            space = self.build_space()
            check_reformulations(space, [r.to_reformulation() for r in self.reformulations])
        except SpaceValidationError as e:
            raise ValueError("; ".join(e.violations)) from e
        except TunerError as e:
            raise ValueError(str(e)) from e

        n_inputs = len(space.input_dims)
        for field_name in ("optimization_grid", "validation_grid"):
            dims = getattr(self, field_name)
            if len(dims) != n_inputs:
                raise ValueError(f"'{field_name}' needs {n_inputs} counts, got {len(dims)}")
            if any(d < 1 for d in dims):
                raise ValueError(f"'{field_name}' counts must be >= 1")
        if self.baseline.design is not None:
            self.baseline_design()
        return self

    def build_space(self) -> ParameterSpace:
        if self.space:
            space = ParameterSpace(tuple(p.to_spec() for p in self.space))
        else:
            from app.pipeline.kernels import get_builtin

            assert self.kernel.builtin is not None
            space = get_builtin(self.kernel.builtin).space
        validate_space(space)
        return space

    def build_reformulations(self) -> tuple[BoundReformulation, ...]:
        return tuple(r.to_reformulation() for r in self.reformulations)

    def build_driver(self, jobs: int = 1) -> KernelDriver:
        space = self.build_space()
        options: dict[str, Any] = {
            "reformulations": self.build_reformulations(),
            "clip": self.clip,
            "jobs": jobs,
        }
        if self.kernel.command is not None:
            return KernelDriver.from_command(self.kernel.command, space, **options)

        from app.pipeline.kernels import BuiltinKernel

        assert self.kernel.builtin is not None
        kernel = BuiltinKernel(self.kernel.builtin, self.kernel.noise, self.kernel.noise_seed)
        return KernelDriver(kernel, space, **options)

    def baseline_design(self) -> Configuration:
        """Fixed baseline design configuration (design or builtin default)."""
        space = self.build_space()
        design = subspace(space, Role.DESIGN)
        if self.baseline.builtin_default:
            from app.pipeline.kernels import get_builtin

            assert self.kernel.builtin is not None
            return get_builtin(self.kernel.builtin).baseline
        assert self.baseline.design is not None
        missing = set(design.names) - set(self.baseline.design)
        if missing:
            raise ValueError(f"baseline design misses {sorted(missing)}")
        extra = set(self.baseline.design) - set(design.names)
        if extra:
            raise ValueError(f"baseline design has unknown parameters {sorted(extra)}")
        values = tuple(self.baseline.design[name] for name in design.names)
        try:
            check_config(design, values)
        except TunerError as e:
            raise ValueError(str(e)) from e
        return values


def _format_errors(error: ValidationError) -> list[str]:
    lines = []
    for item in error.errors():
        path = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return lines


def parse_experiment(doc: Any) -> ExperimentConfig:
    """Validate a decoded document.

    Raises:
        ConfigValidationError: With one dotted-path message per problem
    """
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as e:
        raise ConfigValidationError(_format_errors(e)) from e


def load_experiment(path: Path) -> ExperimentConfig:
    """Read a JSON (or .yml/.yaml) experiment file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix in (".yml", ".yaml"):
            doc = yaml.safe_load(text)
        else:
            doc = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigValidationError([f"<file>: cannot parse {path.name}: {e}"]) from e
    return parse_experiment(doc)


def dump_experiment(config: ExperimentConfig) -> str:
    """Canonical JSON copy stored in the run directory."""
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=1) + "\n"
