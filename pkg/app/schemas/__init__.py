from app.schemas.experiment import (
    BaselineConfig,
    ExperimentConfig,
    KernelConfig,
    ParameterDecl,
    SamplerKind,
    SamplingConfig,
    load_experiment,
    parse_experiment,
)

__all__ = [
    "BaselineConfig",
    "ExperimentConfig",
    "KernelConfig",
    "ParameterDecl",
    "SamplerKind",
    "SamplingConfig",
    "load_experiment",
    "parse_experiment",
]
