"""Kernel evaluation records."""

from dataclasses import dataclass
from enum import Enum

from app.space.params import Configuration


class SampleStatus(str, Enum):
    """Outcome of one sample."""

    OK = "ok"
    FAILED = "failed"  # Nonzero exit or unparsable output
    TIMEOUT = "timeout"
    CLIPPED = "clipped"  # Measured above the objective upper bound

    @property
    def usable(self) -> bool:
        """Whether the objective is a measurement (possibly clipped)."""
        return self in (SampleStatus.OK, SampleStatus.CLIPPED)


@dataclass(frozen=True)
class KernelRun:
    """One raw kernel execution, before repetition and clipping."""

    status: SampleStatus
    objective: float | None = None
    wall_time: float = 0.0
    message: str = ""


@dataclass(frozen=True)
class SampleRecord:
    """One kernel evaluation as stored in the sample store."""

    config: Configuration
    objective: float
    status: SampleStatus
    wall_time: float = 0.0
