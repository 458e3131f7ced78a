from app.pipeline.bench import benchmark_samplers
from app.pipeline.kernels import BuiltinKernel, builtin_kernel, get_builtin
from app.pipeline.runner import resume, run_pipeline
from app.pipeline.validation import ValidationReport, analyze_region, validate

__all__ = [
    "BuiltinKernel",
    "ValidationReport",
    "analyze_region",
    "benchmark_samplers",
    "builtin_kernel",
    "get_builtin",
    "resume",
    "run_pipeline",
    "validate",
]
