"""External executable kernels.

Protocol: the kernel receives parameter values (as flags, positional arguments
or environment variables), exits 0 on success and prints the objective as a
decimal real on the last non-empty stdout line.
"""

import math
import os
import shutil
import subprocess
import time
from collections.abc import Mapping
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field

from app.core.exceptions import KernelNotFoundError
from app.core.logging import get_logger
from app.driver.base import BaseKernel
from app.driver.models import KernelRun, SampleStatus
from app.space.params import Value, label_text

logger = get_logger(__name__)


class ArgStyle(str, Enum):
    NAMED_FLAGS = "named-flags"
    POSITIONAL = "positional"
    ENV_VARS = "env-vars"


class Aggregate(str, Enum):
    MIN = "min"
    MEDIAN = "median"
    MEAN = "mean"


class KernelCommand(BaseModel):
    """How to invoke an external kernel."""

    executable: str
    arg_style: ArgStyle = ArgStyle.NAMED_FLAGS
    timeout: float = Field(default=60.0, gt=0)
    repeats: int = Field(default=1, ge=1)
    aggregate: Aggregate = Aggregate.MIN
    extra_args: list[str] = Field(default_factory=list)


def _format(value: Value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return label_text(value)


def parse_objective(stdout: str) -> float | None:
    """Last non-empty stdout line as a finite real, or None."""
    lines = [line.strip() for line in stdout.splitlines() if line.strip()]
    if not lines:
        return None
    try:
        value = float(lines[-1])
    except ValueError:
        return None
    return value if math.isfinite(value) else None


class SubprocessKernel(BaseKernel):
    """Run a KernelCommand as a child process."""

    def __init__(self, command: KernelCommand) -> None:
        self.command = command
        self.name = Path(command.executable).name

    def _resolve_executable(self) -> str:
        path = Path(self.command.executable)
        if path.parent != Path(".") or path.exists():
            if path.is_file() and os.access(path, os.X_OK):
                return str(path)
            raise KernelNotFoundError(f"kernel executable not found or not executable: {path}")
        found = shutil.which(self.command.executable)
        if found is None:
            raise KernelNotFoundError(f"kernel executable not found on PATH: {path}")
        return found

    def check(self) -> None:
        self._resolve_executable()

    def build_invocation(
        self, values: Mapping[str, Value]
    ) -> tuple[list[str], dict[str, str] | None]:
        """Command line and environment for one run."""
        argv = [self._resolve_executable(), *self.command.extra_args]
        env = None
        match self.command.arg_style:
            case ArgStyle.NAMED_FLAGS:
                argv += [f"--{name}={_format(v)}" for name, v in values.items()]
            case ArgStyle.POSITIONAL:
                argv += [_format(v) for v in values.values()]
            case ArgStyle.ENV_VARS:
                env = {**os.environ, **{name: _format(v) for name, v in values.items()}}
        return argv, env

    def run_once(self, values: Mapping[str, Value]) -> KernelRun:
        argv, env = self.build_invocation(values)
        start = time.perf_counter()
        try:
            proc = subprocess.run(
                argv,
                env=env,
                capture_output=True,
                text=True,
                timeout=self.command.timeout,
            )
        except subprocess.TimeoutExpired:
            elapsed = time.perf_counter() - start
            logger.bind(kernel=self.name, timeout=self.command.timeout).debug("kernel_timeout")
            return KernelRun(SampleStatus.TIMEOUT, wall_time=elapsed, message="timeout")
        except OSError as e:
            elapsed = time.perf_counter() - start
            return KernelRun(SampleStatus.FAILED, wall_time=elapsed, message=str(e))
        elapsed = time.perf_counter() - start

        if proc.returncode != 0:
            logger.bind(kernel=self.name, returncode=proc.returncode).debug("kernel_failed")
            return KernelRun(
                SampleStatus.FAILED,
                wall_time=elapsed,
                message=f"exit code {proc.returncode}: {proc.stderr.strip()[-200:]}",
            )

        objective = parse_objective(proc.stdout)
        if objective is None:
            logger.bind(kernel=self.name).debug("kernel_output_malformed")
            return KernelRun(SampleStatus.FAILED, wall_time=elapsed, message="malformed output")
        return KernelRun(SampleStatus.OK, objective=objective, wall_time=elapsed)
