from abc import ABC, abstractmethod
from collections.abc import Mapping

from app.driver.models import KernelRun
from app.space.params import Value


class BaseKernel(ABC):
    """A kernel executed once for a resolved name -> value mapping.

    Repetition, aggregation, clipping and parallelism belong to the driver.
    """

    name: str = "kernel"

    def check(self) -> None:
        """Raise a DriverError if the kernel cannot run at all."""
        return None

    @abstractmethod
    def run_once(self, values: Mapping[str, Value]) -> KernelRun:
        """Execute the kernel once."""
