from app.driver.base import BaseKernel
from app.driver.driver import KernelDriver
from app.driver.models import KernelRun, SampleRecord, SampleStatus
from app.driver.store import SampleStore, append, load, persist
from app.driver.subprocess_kernel import Aggregate, ArgStyle, KernelCommand, SubprocessKernel

__all__ = [
    "Aggregate",
    "ArgStyle",
    "BaseKernel",
    "KernelCommand",
    "KernelDriver",
    "KernelRun",
    "SampleRecord",
    "SampleStatus",
    "SampleStore",
    "SubprocessKernel",
    "append",
    "load",
    "persist",
]
