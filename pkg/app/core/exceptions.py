"""Exception hierarchy shared by every tuner component.

Per-sample kernel failures are never raised: they are recorded as sample
statuses. Everything below is a hard error that stops the current operation.
"""

from collections.abc import Sequence


class TunerError(Exception):
    """Base class for all tuner errors."""


class SpaceValidationError(TunerError):
    """A parameter space violates one or more declaration invariants."""

    def __init__(self, violations: Sequence[str]) -> None:
        self.violations = list(violations)
        super().__init__("invalid parameter space: " + "; ".join(self.violations))


class EncodingError(TunerError):
    """A configuration or vector cannot be converted for the given space."""


class ExpressionError(TunerError):
    """A bound expression is malformed or references an unknown name."""


class InfeasibleContextError(TunerError):
    """A bound reformulation has an empty admissible interval."""


class GridError(TunerError):
    """Input grid dimensions are invalid for the space."""


class DriverError(TunerError):
    """The kernel driver is misconfigured."""


class KernelNotFoundError(DriverError):
    """The kernel executable does not exist or is not executable."""


class StoreFormatError(TunerError):
    """A sample store file is malformed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class FingerprintMismatchError(TunerError):
    """Stored artifacts were produced for a different parameter space."""

    def __init__(self, expected: str, found: str) -> None:
        self.expected = expected
        self.found = found
        super().__init__(f"space fingerprint mismatch: expected {expected}, found {found}")


class FitError(TunerError):
    """A surrogate cannot be fitted on the given dataset."""


class ModelFormatError(TunerError):
    """A surrogate model document is malformed or has an unsupported version."""


class TreeFormatError(TunerError):
    """A tuning-trees document is malformed or has an unsupported version."""


class CodegenError(TunerError):
    """C emission failed (for example identifier collisions)."""


class OptimizationError(TunerError):
    """A genetic algorithm run could not be carried out."""


class ConfigValidationError(TunerError):
    """The experiment configuration is invalid."""

    def __init__(self, errors: Sequence[str]) -> None:
        self.errors = list(errors)
        super().__init__("invalid experiment configuration:\n  " + "\n  ".join(self.errors))


class StageError(TunerError):
    """A pipeline stage failed; wraps the underlying cause."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
