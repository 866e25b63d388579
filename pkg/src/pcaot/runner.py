"""Compile and execute generated programs; collect their timing lines.

Timed runs are serialized through a module-level lock so concurrent
validation work cannot distort measurements.  The environment mapping given
to run() is merged over the parent environment; its normal use is setting
OMP_NUM_THREADS.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, PcaotError
from .instrument import GeneratedSource

DEFAULT_FLAGS = ("-O3", "-fopenmp")
DEFAULT_THREADS = 4

_TIMING_RE = re.compile(r"^PCAOT_TIME_NS\s+(\d+)\s*$", re.MULTILINE)
_TIMED_RUN_LOCK = threading.Lock()


class CompileFailure(PcaotError):
    """Compiler exited nonzero; carries its stderr for diagnostics."""

    def __init__(self, message: str, stderr: str = "") -> None:
        super().__init__(message)
        self.stderr = stderr


class ToolMissing(PcaotError):
    """The compiler or tool executable could not be found."""


class SpawnFailure(PcaotError):
    """A built binary could not be started."""


class NoTimingLines(PcaotError):
    """A run produced no PCAOT_TIME_NS lines to collect."""


@dataclass(frozen=True)
class BuildSpec:
    """How to turn a generated source file into a binary.

    compiler_cmd is a shell-style template; {src} and {out} are replaced by
    the source and binary paths, then flags are appended.
    """

    compiler_cmd: str = "gcc {src} -o {out}"
    flags: tuple[str, ...] = DEFAULT_FLAGS
    workdir: Path = Path(".")

    def __post_init__(self) -> None:
        if "{src}" not in self.compiler_cmd or "{out}" not in self.compiler_cmd:
            raise ParseError("compiler_cmd must contain {src} and {out} placeholders")


@dataclass(frozen=True)
class RunResult:
    """Outcome of one process execution."""

    exit_code: int | None
    stdout: str
    stderr: str
    wall_time_ns: int
    timed_out: bool = False

    def __post_init__(self) -> None:
        if self.timed_out and self.exit_code is not None:
            raise ParseError("a timed-out run has no exit code")


@dataclass(frozen=True)
class TimingSample:
    """Per-repeat section times plus their median.

    The median of an even number of samples is the lower of the two middle
    values, so it is always one of the measurements.
    """

    samples_ns: tuple[int, ...]
    median_ns: int

    def __post_init__(self) -> None:
        if not self.samples_ns:
            raise ParseError("a timing sample needs at least one measurement")
        if self.median_ns != _lower_median(self.samples_ns):
            raise ParseError("median_ns does not match the samples")

    @classmethod
    def from_samples(cls, samples_ns: tuple[int, ...]) -> "TimingSample":
        return cls(samples_ns=samples_ns, median_ns=_lower_median(samples_ns))


def _lower_median(samples: tuple[int, ...]) -> int:
    ordered = sorted(samples)
    return ordered[(len(ordered) - 1) // 2]


def build(source: GeneratedSource, spec: BuildSpec) -> Path:
    """Write the source into the workdir and compile it.

    Returns the binary path; raises CompileFailure or ToolMissing.
    """
    workdir = Path(spec.workdir).resolve()
    workdir.mkdir(parents=True, exist_ok=True)
    src_path = workdir / f"{source.kind.value}.c"
    out_path = workdir / source.kind.value
    src_path.write_text(source.text, encoding="utf-8")
    command = shlex.split(spec.compiler_cmd.format(src=str(src_path), out=str(out_path)))
    command.extend(spec.flags)
    try:
        proc = subprocess.run(
            command, cwd=workdir, capture_output=True, text=True, check=False
        )
    except FileNotFoundError as exc:
        raise ToolMissing(f"compiler not found: {command[0]!r}") from exc
    if proc.returncode != 0:
        raise CompileFailure(
            f"compile of {src_path.name} failed with exit code {proc.returncode}",
            stderr=proc.stderr,
        )
    return out_path


def run(
    binary: Path,
    timeout_s: float = 60.0,
    env: dict[str, str] | None = None,
) -> RunResult:
    """Execute a binary in its own directory under a timeout.

    The process is killed on timeout; its partial output is kept.  Timed
    runs execute one at a time process-wide.
    """
    binary = Path(binary)
    full_env = dict(os.environ)
    full_env.setdefault("OMP_NUM_THREADS", str(DEFAULT_THREADS))
    if env:
        full_env.update({k: str(v) for k, v in env.items()})
    with _TIMED_RUN_LOCK:
        start = time.monotonic_ns()
        try:
            proc = subprocess.Popen(
                [str(binary)],
                cwd=binary.parent,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                env=full_env,
            )
        except (FileNotFoundError, PermissionError, OSError) as exc:
            raise SpawnFailure(f"cannot start {binary}: {exc}") from exc
        try:
            stdout, stderr = proc.communicate(timeout=timeout_s)
            timed_out = False
            exit_code: int | None = proc.returncode
        except subprocess.TimeoutExpired:
            proc.kill()
            try:
                stdout, stderr = proc.communicate(timeout=5.0)
            except subprocess.TimeoutExpired:
                stdout, stderr = "", ""
            timed_out = True
            exit_code = None
        wall = time.monotonic_ns() - start
    return RunResult(
        exit_code=exit_code,
        stdout=stdout or "",
        stderr=stderr or "",
        wall_time_ns=wall,
        timed_out=timed_out,
    )


def collect_timing(result: RunResult) -> TimingSample:
    """Parse PCAOT_TIME_NS lines from a successful run's stdout."""
    if result.exit_code != 0:
        raise ValueError("collect_timing needs a run that exited 0")
    samples = tuple(int(m) for m in _TIMING_RE.findall(result.stdout))
    if not samples:
        raise NoTimingLines("run produced no PCAOT_TIME_NS lines")
    return TimingSample.from_samples(samples)
