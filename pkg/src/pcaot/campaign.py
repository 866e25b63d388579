"""Campaign orchestration: plan, execute, aggregate, and report.

A campaign pairs section sources with manifests, fans each section out to
every configured backend (LLM strategies x attempts, plus compiler
backends, plus the serial original), validates every candidate against the
captured reference state, and aggregates the outcome records into metrics
and charts.

Filesystem contract under the output directory (shared by the staged CLI
subcommands and by run):

    sections/<id>/capture/      instrumented program + reference checkpoints
    sections/<id>/serial/       serial baseline driver scratch
    sections/<id>/candidates/<tool>__<strategy>__<attempt>/
    candidates.jsonl            produced candidate code + raw responses
    records.jsonl               one outcome record per line, appended as
                                validation progresses (resume skips done work)
    records.csv, metrics.json, failure_by_size.svg, pattern_categories.svg,
    speedups.svg                emitted by the report stage
"""

from __future__ import annotations

import json
import logging
import math
import re
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import checkpoint as ckpt
from ._svg import grouped_bar_chart
from .backends import (
    CompilerDriverConfig,
    MockLlm,
    OptimizationRequest,
    Origin,
    PromptStrategy,
    SamplingParams,
    request_compiler,
    request_llm,
)
from .checkpoint import ComparisonStatus, Tolerance
from .errors import ParseError, PcaotError
from .instrument import (
    generate_capture_program,
    generate_replay_driver,
    input_checkpoint_name,
    output_checkpoint_name,
)
from .pattern import (
    OutcomeCategory,
    ValidationStatus,
    categorize,
    detect,
    has_any_directive,
)
from .runner import DEFAULT_FLAGS, BuildSpec, build, collect_timing, run
from .sections import ExperimentalSection, StateManifest, extract_sections, load_manifest_file

log = logging.getLogger("pcaot")

SERIAL_TOOL_ID = "serial"
DEFAULT_SIZE_BUCKETS = (10, 20, 40, 80)
DEFAULT_STRATEGIES = (PromptStrategy.IP, PromptStrategy.DIP, PromptStrategy.COT)
CAPTURE_TIMEOUT_S = 60.0
TIMEOUT_FLOOR_S = 10.0
TIMEOUT_FACTOR = 10.0

CSV_COLUMNS = (
    "section_id",
    "tool",
    "strategy",
    "attempt",
    "status",
    "category",
    "detected_patterns",
    "lines",
    "median_time_ns",
    "speedup",
)


class EmptyCampaign(PcaotError):
    """A campaign without sections has nothing to do."""


class CaptureFailure(PcaotError):
    """The reference capture run for a section failed; the section is skipped."""


class IoFailure(PcaotError):
    """The output directory could not be written."""


@dataclass(frozen=True)
class SectionJob:
    """One (source file, manifest) pair, plus optional extras."""

    source_path: Path
    manifest_path: Path
    support_code: str = ""
    hand_optimized_ns: int | None = None


@dataclass(frozen=True)
class LlmEndpointConfig:
    """A real HTTP chat-completions backend."""

    tool_id: str
    endpoint: str
    params: SamplingParams


@dataclass(frozen=True)
class CampaignConfig:
    sections: tuple[SectionJob, ...]
    llm_backends: tuple[MockLlm | LlmEndpointConfig, ...] = ()
    compiler_backends: tuple[CompilerDriverConfig, ...] = ()
    strategies: tuple[PromptStrategy, ...] = DEFAULT_STRATEGIES
    attempts: int = 3
    timing_repeats: int = 3
    tolerance: Tolerance = Tolerance()
    build: BuildSpec = BuildSpec()
    threads: int = 4
    size_buckets: tuple[int, ...] = DEFAULT_SIZE_BUCKETS
    timeout_s: float | None = None
    max_inflight: int = 4

    def __post_init__(self) -> None:
        if self.attempts < 1:
            raise ParseError("attempts must be at least 1")
        if self.timing_repeats < 1:
            raise ParseError("timing_repeats must be at least 1")
        if self.threads < 1:
            raise ParseError("threads must be at least 1")
        if self.max_inflight < 1:
            raise ParseError("max_inflight must be at least 1")
        if any(b <= a for a, b in zip(self.size_buckets, self.size_buckets[1:])):
            raise ParseError("size_buckets must be strictly ascending")
        if any(b <= 0 for b in self.size_buckets):
            raise ParseError("size_buckets must be positive")
        tool_ids = [b.tool_id for b in self.llm_backends] + [
            c.tool_id for c in self.compiler_backends
        ]
        if len(set(tool_ids)) != len(tool_ids):
            raise ParseError("backend tool ids must be unique")
        if SERIAL_TOOL_ID in tool_ids:
            raise ParseError(f"tool id {SERIAL_TOOL_ID!r} is reserved for the baseline")

    @property
    def llm_tool_ids(self) -> frozenset[str]:
        return frozenset(b.tool_id for b in self.llm_backends)


@dataclass(frozen=True)
class ExperimentPlan:
    """The full candidate matrix a campaign will produce."""

    jobs: tuple[SectionJob, ...]
    candidate_origins: tuple[Origin, ...]
    llm_attempts_per_section: int

    @property
    def versions_per_section(self) -> int:
        # All backend candidates plus the serial original.
        return len(self.candidate_origins) + 1

    @property
    def total_versions(self) -> int:
        return len(self.jobs) * self.versions_per_section

    @property
    def total_llm_attempts(self) -> int:
        return len(self.jobs) * self.llm_attempts_per_section


def _origin_sort_key(origin: Origin) -> tuple[str, str, int]:
    return (
        origin.tool_id,
        origin.strategy.value if origin.strategy else "",
        origin.attempt or 0,
    )


def plan(config: CampaignConfig) -> ExperimentPlan:
    """Lay out the candidate matrix; raises EmptyCampaign on no sections."""
    if not config.sections:
        raise EmptyCampaign("campaign config lists no sections")
    origins = [
        Origin(tool_id=backend.tool_id, strategy=strategy, attempt=attempt)
        for backend in config.llm_backends
        for strategy in config.strategies
        for attempt in range(1, config.attempts + 1)
    ]
    origins.extend(Origin(tool_id=driver.tool_id) for driver in config.compiler_backends)
    origins.sort(key=_origin_sort_key)
    return ExperimentPlan(
        jobs=config.sections,
        candidate_origins=tuple(origins),
        llm_attempts_per_section=len(config.llm_backends)
        * len(config.strategies)
        * config.attempts,
    )


@dataclass(frozen=True)
class OutcomeRecord:
    """One validated version of one section."""

    section_id: str
    tool: str
    strategy: str | None
    attempt: int | None
    status: ValidationStatus
    category: OutcomeCategory
    detected: tuple[str, ...]
    pattern: str
    lines: int
    median_time_ns: int | None = None
    speedup: float | None = None

    def __post_init__(self) -> None:
        # Only passing candidates carry a speedup (it may still be absent
        # when the serial baseline itself failed to validate).
        if self.speedup is not None and self.status is not ValidationStatus.PASS:
            raise ParseError("speedup requires a Pass status")

    def to_dict(self) -> dict:
        return {
            "section_id": self.section_id,
            "tool": self.tool,
            "strategy": self.strategy,
            "attempt": self.attempt,
            "status": self.status.value,
            "category": self.category.value,
            "detected": list(self.detected),
            "pattern": self.pattern,
            "lines": self.lines,
            "median_time_ns": self.median_time_ns,
            "speedup": self.speedup,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OutcomeRecord":
        return cls(
            section_id=doc["section_id"],
            tool=doc["tool"],
            strategy=doc["strategy"],
            attempt=doc["attempt"],
            status=ValidationStatus(doc["status"]),
            category=OutcomeCategory(doc["category"]),
            detected=tuple(doc["detected"]),
            pattern=doc["pattern"],
            lines=doc["lines"],
            median_time_ns=doc["median_time_ns"],
            speedup=doc["speedup"],
        )


def _pattern_key(manifest: StateManifest) -> str:
    if manifest.parallelizable:
        assert manifest.expected_pattern is not None
        return manifest.expected_pattern
    return f"Non_Parallel_Loop_{manifest.non_parallel_reason}"


def _safe_name(section_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.\-]", "_", section_id)


@dataclass(frozen=True)
class _SectionContext:
    """Everything validation needs about one captured section."""

    job: SectionJob
    section: ExperimentalSection
    manifest: StateManifest
    capture_dir: Path
    in_ckpt: Path | None
    out_ckpt: Path
    reference: ckpt.Checkpoint
    capture_wall_ns: int


def _load_section(job: SectionJob) -> tuple[ExperimentalSection, StateManifest, str]:
    try:
        manifest = load_manifest_file(job.manifest_path)
        source_text = Path(job.source_path).read_text(encoding="utf-8")
        found = extract_sections(source_text, str(job.source_path))
    except OSError as exc:
        raise CaptureFailure(f"cannot read section inputs: {exc}") from exc
    except PcaotError as exc:
        raise CaptureFailure(f"cannot parse section inputs: {exc}") from exc
    matching = [s for s in found if s.id == manifest.section_id]
    if not matching:
        raise CaptureFailure(
            f"section {manifest.section_id!r} not found in {job.source_path}"
        )
    return matching[0], manifest, source_text


def capture_section(job: SectionJob, config: CampaignConfig, outdir: Path) -> _SectionContext:
    """Build and run the instrumented program; reuse artifacts when present.

    Raises CaptureFailure on any failure along the way.
    """
    section, manifest, source_text = _load_section(job)
    sid = manifest.section_id
    capture_dir = Path(outdir) / "sections" / _safe_name(sid) / "capture"
    in_path = capture_dir / input_checkpoint_name(sid)
    out_path = capture_dir / output_checkpoint_name(sid)
    meta_path = capture_dir / "meta.json"
    needs_input = bool(manifest.inputs)

    if not (out_path.is_file() and (not needs_input or in_path.is_file()) and meta_path.is_file()):
        generated = generate_capture_program(source_text, section, manifest)
        try:
            binary = build(generated, replace(config.build, workdir=capture_dir))
        except PcaotError as exc:
            raise CaptureFailure(f"capture build failed for {sid!r}: {exc}") from exc
        result = run(
            binary,
            timeout_s=config.timeout_s or CAPTURE_TIMEOUT_S,
            env={"OMP_NUM_THREADS": str(config.threads)},
        )
        if result.timed_out:
            raise CaptureFailure(f"capture run for {sid!r} timed out")
        if result.exit_code != 0:
            raise CaptureFailure(
                f"capture run for {sid!r} exited with {result.exit_code}: "
                f"{result.stderr.strip()[:400]}"
            )
        if not out_path.is_file() or (needs_input and not in_path.is_file()):
            raise CaptureFailure(f"capture run for {sid!r} left no checkpoint files")
        meta_path.write_text(
            json.dumps({"wall_time_ns": result.wall_time_ns}) + "\n", encoding="utf-8"
        )
    wall = int(json.loads(meta_path.read_text(encoding="utf-8"))["wall_time_ns"])
    try:
        reference = ckpt.read_checkpoint_file(out_path)
    except PcaotError as exc:
        raise CaptureFailure(f"reference checkpoint for {sid!r} unreadable: {exc}") from exc
    return _SectionContext(
        job=job,
        section=section,
        manifest=manifest,
        capture_dir=capture_dir,
        in_ckpt=in_path if needs_input else None,
        out_ckpt=out_path,
        reference=reference,
        capture_wall_ns=wall,
    )


@dataclass(frozen=True)
class CandidateRow:
    """One produced candidate (or production failure), as persisted."""

    section_id: str
    tool: str
    strategy: str | None
    attempt: int | None
    code: str | None
    raw_response: str | None = None
    error: str | None = None

    def key(self) -> tuple[str, str, str | None, int | None]:
        return (self.section_id, self.tool, self.strategy, self.attempt)

    def to_dict(self) -> dict:
        return {
            "section_id": self.section_id,
            "tool": self.tool,
            "strategy": self.strategy,
            "attempt": self.attempt,
            "code": self.code,
            "raw_response": self.raw_response,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CandidateRow":
        return cls(
            section_id=doc["section_id"],
            tool=doc["tool"],
            strategy=doc["strategy"],
            attempt=doc["attempt"],
            code=doc["code"],
            raw_response=doc.get("raw_response"),
            error=doc.get("error"),
        )


def _load_jsonl(path: Path, parse) -> list:
    if not path.is_file():
        return []
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                rows.append(parse(json.loads(line)))
    return rows


def _append_jsonl(path: Path, doc: dict) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(doc) + "\n")
        handle.flush()


def _backend_by_tool(config: CampaignConfig, tool_id: str):
    for backend in config.llm_backends:
        if backend.tool_id == tool_id:
            return backend
    for driver in config.compiler_backends:
        if driver.tool_id == tool_id:
            return driver
    raise ParseError(f"no backend with tool id {tool_id!r}")


def _produce_one(
    origin: Origin,
    section: ExperimentalSection,
    manifest: StateManifest,
    job: SectionJob,
    config: CampaignConfig,
) -> CandidateRow:
    request = OptimizationRequest(
        section_code=section.body_text,
        strategy=origin.strategy,
        attempt=origin.attempt or 1,
    )
    backend = _backend_by_tool(config, origin.tool_id)
    try:
        if isinstance(backend, MockLlm):
            candidate = backend.request(request, manifest.section_id)
        elif isinstance(backend, LlmEndpointConfig):
            candidate = request_llm(
                request, backend.params, backend.endpoint, tool_id=backend.tool_id
            )
        else:
            candidate = request_compiler(request, backend, manifest, job.support_code)
    except PcaotError as exc:
        log.warning("candidate %s/%s failed: %s", manifest.section_id, origin.tool_id, exc)
        return CandidateRow(
            section_id=manifest.section_id,
            tool=origin.tool_id,
            strategy=origin.strategy.value if origin.strategy else None,
            attempt=origin.attempt,
            code=None,
            error=str(exc),
        )
    return CandidateRow(
        section_id=manifest.section_id,
        tool=origin.tool_id,
        strategy=origin.strategy.value if origin.strategy else None,
        attempt=origin.attempt,
        code=candidate.code,
        raw_response=candidate.raw_response,
    )


def produce_candidates(
    config: CampaignConfig, outdir: Path, experiment: ExperimentPlan | None = None
) -> dict[tuple, CandidateRow]:
    """Obtain candidate code for every planned origin, persisting as it goes.

    Rows already present in candidates.jsonl are not re-requested, so an
    interrupted campaign never repeats LLM calls.  LLM-origin requests for
    one section run concurrently, bounded by config.max_inflight.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {outdir}: {exc}") from exc
    experiment = experiment or plan(config)
    path = outdir / "candidates.jsonl"
    rows: dict[tuple, CandidateRow] = {r.key(): r for r in _load_jsonl(path, CandidateRow.from_dict)}
    for job in experiment.jobs:
        try:
            section, manifest, _ = _load_section(job)
        except CaptureFailure as exc:
            log.warning("skipping candidate production: %s", exc)
            continue
        missing = [
            origin
            for origin in experiment.candidate_origins
            if (
                manifest.section_id,
                origin.tool_id,
                origin.strategy.value if origin.strategy else None,
                origin.attempt,
            )
            not in rows
        ]
        if not missing:
            continue
        llm_origins = [o for o in missing if o.strategy is not None]
        compiler_origins = [o for o in missing if o.strategy is None]
        produced: list[CandidateRow] = []
        if llm_origins:
            with ThreadPoolExecutor(max_workers=config.max_inflight) as pool:
                produced.extend(
                    pool.map(
                        lambda o: _produce_one(o, section, manifest, job, config), llm_origins
                    )
                )
        for origin in compiler_origins:
            produced.append(_produce_one(origin, section, manifest, job, config))
        produced.sort(key=lambda r: (r.tool, r.strategy or "", r.attempt or 0))
        for row in produced:
            rows[row.key()] = row
            _append_jsonl(path, row.to_dict())
    return rows


def _candidate_timeout(config: CampaignConfig, baseline_wall_ns: int) -> float:
    if config.timeout_s is not None:
        return config.timeout_s
    return max(TIMEOUT_FLOOR_S, TIMEOUT_FACTOR * baseline_wall_ns / 1e9)


def _validate_code(
    code: str,
    ctx: _SectionContext,
    config: CampaignConfig,
    scratch: Path,
    timeout_s: float,
) -> tuple[ValidationStatus, int | None, int]:
    """Build, run, time and compare one candidate body.

    Returns (status, median_ns, run_wall_ns)."""
    try:
        generated = generate_replay_driver(
            code, ctx.manifest, config.timing_repeats, ctx.job.support_code
        )
        binary = build(generated, replace(config.build, workdir=scratch))
    except PcaotError as exc:
        detail = getattr(exc, "stderr", "") or str(exc)
        log.debug("candidate build failed in %s: %s", scratch.name, detail[:400])
        return (ValidationStatus.COMPILE_ERROR, None, 0)
    if ctx.in_ckpt is not None:
        shutil.copyfile(ctx.in_ckpt, scratch / ctx.in_ckpt.name)
    result = run(binary, timeout_s=timeout_s, env={"OMP_NUM_THREADS": str(config.threads)})
    if result.timed_out:
        return (ValidationStatus.TIMEOUT, None, result.wall_time_ns)
    if result.exit_code != 0:
        return (ValidationStatus.RUNTIME_ERROR, None, result.wall_time_ns)
    try:
        timing = collect_timing(result)
        candidate_ckpt = ckpt.read_checkpoint_file(
            scratch / output_checkpoint_name(ctx.manifest.section_id)
        )
    except (PcaotError, OSError):
        return (ValidationStatus.RUNTIME_ERROR, None, result.wall_time_ns)
    report = ckpt.compare(ctx.reference, candidate_ckpt, ctx.manifest, config.tolerance)
    status = (
        ValidationStatus.PASS
        if report.status is ComparisonStatus.PASS
        else ValidationStatus.NUMERIC_MISMATCH
    )
    return (status, timing.median_ns, result.wall_time_ns)


def _make_record(
    ctx: _SectionContext,
    tool: str,
    strategy: str | None,
    attempt: int | None,
    code: str | None,
    status: ValidationStatus,
    median_ns: int | None,
    serial_median_ns: int | None,
) -> OutcomeRecord:
    detected = detect(code) if code else set()
    has_dirs = has_any_directive(code) if code else False
    category = categorize(ctx.manifest, detected, status, has_directives=has_dirs)
    speedup = None
    if status is ValidationStatus.PASS and median_ns and serial_median_ns:
        speedup = serial_median_ns / median_ns
    return OutcomeRecord(
        section_id=ctx.manifest.section_id,
        tool=tool,
        strategy=strategy,
        attempt=attempt,
        status=status,
        category=category,
        detected=tuple(sorted(label.value for label in detected)),
        pattern=_pattern_key(ctx.manifest),
        lines=ctx.section.line_count,
        median_time_ns=median_ns,
        speedup=speedup,
    )


def validate_candidates(config: CampaignConfig, outdir: Path) -> list[OutcomeRecord]:
    """Capture, produce and validate everything the config describes.

    Returns records in deterministic order: sections in config order, the
    serial baseline first, then candidates by (tool, strategy, attempt).
    Existing records.jsonl rows are reused, new ones appended.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {outdir}: {exc}") from exc
    experiment = plan(config)
    records_path = outdir / "records.jsonl"
    existing = {
        (r.section_id, r.tool, r.strategy, r.attempt): r
        for r in _load_jsonl(records_path, OutcomeRecord.from_dict)
    }
    rows = produce_candidates(config, outdir, experiment)
    records: list[OutcomeRecord] = []

    for job in experiment.jobs:
        try:
            ctx = capture_section(job, config, outdir)
        except CaptureFailure as exc:
            log.warning("section skipped: %s", exc)
            continue
        sid = ctx.manifest.section_id
        sdir = outdir / "sections" / _safe_name(sid)

        serial_key = (sid, SERIAL_TOOL_ID, None, None)
        if serial_key in existing:
            serial_record = existing[serial_key]
            baseline_wall = (serial_record.median_time_ns or 0) * config.timing_repeats
        else:
            serial_timeout = _candidate_timeout(config, ctx.capture_wall_ns)
            status, median, wall = _validate_code(
                ctx.section.body_text, ctx, config, sdir / "serial", serial_timeout
            )
            serial_record = _make_record(
                ctx, SERIAL_TOOL_ID, None, None, ctx.section.body_text, status, median,
                serial_median_ns=median,
            )
            baseline_wall = wall
            _append_jsonl(records_path, serial_record.to_dict())
        records.append(serial_record)
        if serial_record.status is not ValidationStatus.PASS:
            log.warning(
                "serial baseline for %r did not validate (%s); speedups unavailable",
                sid,
                serial_record.status.value,
            )
        serial_median = serial_record.median_time_ns
        timeout_s = _candidate_timeout(config, baseline_wall)

        for origin in experiment.candidate_origins:
            strategy = origin.strategy.value if origin.strategy else None
            key = (sid, origin.tool_id, strategy, origin.attempt)
            if key in existing:
                records.append(existing[key])
                continue
            row = rows.get(key)
            if row is None or row.code is None:
                record = _make_record(
                    ctx, origin.tool_id, strategy, origin.attempt, None,
                    ValidationStatus.EXTRACTION_ERROR, None, serial_median,
                )
            else:
                scratch = (
                    sdir
                    / "candidates"
                    / f"{origin.tool_id}__{strategy or 'na'}__{origin.attempt or 0}"
                )
                status, median, _ = _validate_code(row.code, ctx, config, scratch, timeout_s)
                record = _make_record(
                    ctx, origin.tool_id, strategy, origin.attempt, row.code,
                    status, median, serial_median,
                )
            _append_jsonl(records_path, record.to_dict())
            records.append(record)
    return records


def execute(experiment: ExperimentPlan, config: CampaignConfig, outdir: Path) -> list[OutcomeRecord]:
    """Run the full campaign described by a plan.

    Sections whose reference capture fails are skipped (and logged); all
    other failures become per-candidate statuses.  Never raises for
    candidate-level problems.
    """
    if not experiment.jobs:
        raise EmptyCampaign("experiment plan lists no sections")
    return validate_candidates(config, outdir)


@dataclass(frozen=True)
class Metrics:
    """Aggregated campaign statistics, all JSON-friendly."""

    failure_rate_by_bucket: dict = field(default_factory=dict)
    category_rates: dict = field(default_factory=dict)
    speedup_table: dict = field(default_factory=dict)
    overall_success_rate: float | None = None
    speedup_vs_hand_optimized: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        doc = {
            "failure_rate_by_bucket": self.failure_rate_by_bucket,
            "category_rates": self.category_rates,
            "speedup_table": self.speedup_table,
            "overall_success_rate": self.overall_success_rate,
        }
        if self.speedup_vs_hand_optimized:
            doc["speedup_vs_hand_optimized"] = self.speedup_vs_hand_optimized
        return doc


def _bucket_labels(bounds: tuple[int, ...]) -> list[str]:
    labels = []
    low = 0
    for bound in bounds:
        labels.append(f"({low},{bound}]")
        low = bound
    labels.append(f"({low},inf)")
    return labels


def _bucket_for(lines: int, bounds: tuple[int, ...]) -> str:
    low = 0
    for bound in bounds:
        if lines <= bound:
            return f"({low},{bound}]"
        low = bound
    return f"({low},inf)"


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def _speedup_map(records: list[OutcomeRecord], value_of) -> dict:
    """Per-tool {by_strategy: {strategy: mean}, max_mean} over passing records."""
    by_tool: dict[str, dict[str, list[float]]] = {}
    for record in records:
        value = value_of(record)
        if value is None:
            continue
        strategy = record.strategy if record.strategy is not None else "default"
        by_tool.setdefault(record.tool, {}).setdefault(strategy, []).append(value)
    table: dict = {}
    for tool in sorted(by_tool):
        means = {
            strategy: _mean(values) for strategy, values in sorted(by_tool[tool].items())
        }
        table[tool] = {
            "by_strategy": means,
            "max_mean": max(means.values()) if means else None,
        }
    return table


def aggregate(records: list[OutcomeRecord], config: CampaignConfig) -> Metrics:
    """Fold outcome records into campaign metrics.

    The serial baseline is excluded everywhere; failure-by-size and the
    overall success rate cover LLM-origin attempts only.
    """
    llm_tools = config.llm_tool_ids
    tool_records = [r for r in records if r.tool != SERIAL_TOOL_ID]
    llm_records = [r for r in tool_records if r.tool in llm_tools]

    buckets: dict[str, dict[str, int]] = {}
    for record in llm_records:
        label = _bucket_for(record.lines, config.size_buckets)
        stats = buckets.setdefault(label, {"failures": 0, "attempts": 0})
        stats["attempts"] += 1
        if record.status is not ValidationStatus.PASS:
            stats["failures"] += 1
    failure_rate_by_bucket = {
        label: {
            "failures": stats["failures"],
            "attempts": stats["attempts"],
            "rate": stats["failures"] / stats["attempts"],
        }
        for label, stats in buckets.items()
        if stats["attempts"]
    }
    failure_rate_by_bucket = {
        label: failure_rate_by_bucket[label]
        for label in _bucket_labels(config.size_buckets)
        if label in failure_rate_by_bucket
    }

    category_rates: dict = {}
    for record in tool_records:
        strategy = record.strategy if record.strategy is not None else "default"
        hist = (
            category_rates.setdefault(record.pattern, {})
            .setdefault(record.tool, {})
            .setdefault(strategy, {})
        )
        hist[record.category.value] = hist.get(record.category.value, 0) + 1

    speedup_table = _speedup_map(tool_records, lambda r: r.speedup)

    hand_ns: dict[str, int] = {}
    for job in config.sections:
        if job.hand_optimized_ns is not None:
            hand_ns[_job_section_id(job)] = job.hand_optimized_ns
    speedup_vs_hand = {}
    if hand_ns:
        speedup_vs_hand = _speedup_map(
            tool_records,
            lambda r: (
                hand_ns[r.section_id] / r.median_time_ns
                if r.section_id in hand_ns
                and r.status is ValidationStatus.PASS
                and r.median_time_ns
                else None
            ),
        )

    overall = None
    if llm_records:
        passes = sum(1 for r in llm_records if r.status is ValidationStatus.PASS)
        overall = passes / len(llm_records)

    return Metrics(
        failure_rate_by_bucket=failure_rate_by_bucket,
        category_rates=category_rates,
        speedup_table=speedup_table,
        overall_success_rate=overall,
        speedup_vs_hand_optimized=speedup_vs_hand,
    )


def _job_section_id(job: SectionJob) -> str:
    try:
        return load_manifest_file(job.manifest_path).section_id
    except (OSError, PcaotError):
        return ""


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _records_csv(records: list[OutcomeRecord]) -> str:
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(
            [
                record.section_id,
                record.tool,
                record.strategy or "",
                record.attempt if record.attempt is not None else "",
                record.status.value,
                record.category.value,
                ";".join(record.detected),
                record.lines,
                record.median_time_ns if record.median_time_ns is not None else "",
                repr(record.speedup) if record.speedup is not None else "",
            ]
        )
    return buffer.getvalue()


def emit_reports(metrics: Metrics, records: list[OutcomeRecord], outdir: Path) -> list[Path]:
    """Write records.csv, metrics.json and the three SVG charts.

    Byte-deterministic: the same metrics and records always produce
    identical files.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create report directory {outdir}: {exc}") from exc

    csv_path = outdir / "records.csv"
    _write_text(csv_path, _records_csv(records))

    metrics_path = outdir / "metrics.json"
    _write_text(
        metrics_path, json.dumps(metrics.to_json_dict(), indent=2, sort_keys=True) + "\n"
    )

    bucket_labels = list(metrics.failure_rate_by_bucket.keys())
    failure_svg = grouped_bar_chart(
        title="Failure rate by section size (lines)",
        ylabel="failure rate",
        groups=bucket_labels,
        series=[
            (
                "LLM attempts",
                [metrics.failure_rate_by_bucket[label]["rate"] for label in bucket_labels],
            )
        ],
    )
    failure_path = outdir / "failure_by_size.svg"
    _write_text(failure_path, failure_svg)

    patterns = sorted(metrics.category_rates)
    categories = [c.value for c in OutcomeCategory]
    series = []
    for category in categories:
        values: list[float | None] = []
        for pattern in patterns:
            total = 0
            for tool_hist in metrics.category_rates[pattern].values():
                for strat_hist in tool_hist.values():
                    total += strat_hist.get(category, 0)
            values.append(float(total) if total else None)
        series.append((category, values))
    categories_svg = grouped_bar_chart(
        title="Outcome categories by expected pattern",
        ylabel="candidates",
        groups=patterns,
        series=series,
    )
    categories_path = outdir / "pattern_categories.svg"
    _write_text(categories_path, categories_svg)

    tools = sorted(metrics.speedup_table)
    strategies = sorted(
        {s for tool in tools for s in metrics.speedup_table[tool]["by_strategy"]}
    )
    speedup_series = [
        (
            strategy,
            [metrics.speedup_table[tool]["by_strategy"].get(strategy) for tool in tools],
        )
        for strategy in strategies
    ]
    speedups_svg = grouped_bar_chart(
        title="Mean speedup over serial (passing candidates)",
        ylabel="speedup",
        groups=tools,
        series=speedup_series,
    )
    speedups_path = outdir / "speedups.svg"
    _write_text(speedups_path, speedups_svg)

    return [csv_path, metrics_path, failure_path, categories_path, speedups_path]


def _as_path(base: Path, value: str) -> Path:
    candidate = Path(value)
    return candidate if candidate.is_absolute() else base / candidate


def _parse_llm_backend(doc: dict, base: Path):
    kind = doc.get("kind", "llm")
    if not isinstance(doc.get("tool_id"), str) or not doc["tool_id"]:
        raise ParseError("llm backend entries need a tool_id")
    if kind == "mock":
        responses = dict(doc.get("responses", {}))
        for section_key, rel in doc.get("response_files", {}).items():
            try:
                responses[section_key] = _as_path(base, rel).read_text(encoding="utf-8")
            except OSError as exc:
                raise ParseError(f"cannot read mock response file {rel!r}: {exc}") from exc
        return MockLlm(tool_id=doc["tool_id"], responses=responses)
    if kind in ("llm", "http"):
        if not isinstance(doc.get("endpoint"), str) or not isinstance(doc.get("model"), str):
            raise ParseError("http llm backends need endpoint and model")
        params = SamplingParams(
            model=doc["model"],
            temperature=doc.get("temperature", 0.2),
            top_p=doc.get("top_p", 0.1),
        )
        return LlmEndpointConfig(tool_id=doc["tool_id"], endpoint=doc["endpoint"], params=params)
    raise ParseError(f"unknown llm backend kind {kind!r}")


def load_campaign_config(path: Path) -> CampaignConfig:
    """Parse a campaign config JSON file; paths resolve against its directory."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read campaign config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"campaign config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("campaign config root must be a JSON object")
    base = path.parent

    jobs = []
    for entry in doc.get("sections", []):
        if not isinstance(entry, dict) or "source" not in entry or "manifest" not in entry:
            raise ParseError("each section entry needs source and manifest paths")
        support = entry.get("support_code", "")
        if "support_code_path" in entry:
            try:
                support = _as_path(base, entry["support_code_path"]).read_text(encoding="utf-8")
            except OSError as exc:
                raise ParseError(f"cannot read support code: {exc}") from exc
        jobs.append(
            SectionJob(
                source_path=_as_path(base, entry["source"]),
                manifest_path=_as_path(base, entry["manifest"]),
                support_code=support,
                hand_optimized_ns=entry.get("hand_optimized_ns"),
            )
        )

    llm_backends = tuple(_parse_llm_backend(b, base) for b in doc.get("llm_backends", []))
    compiler_backends = tuple(
        CompilerDriverConfig(
            tool_id=b["tool_id"],
            command=b["command"],
            output_path=b.get("output_path", "{out}"),
        )
        for b in doc.get("compiler_backends", [])
    )

    try:
        strategies = tuple(PromptStrategy(s) for s in doc.get("strategies", ["IP", "DIP", "CoT"]))
    except ValueError as exc:
        raise ParseError(f"unknown prompt strategy: {exc}") from exc

    tolerance_doc = doc.get("tolerance", {})
    tolerance = Tolerance(
        abs=tolerance_doc.get("abs", 0.0), rel=tolerance_doc.get("rel", 1e-6)
    )
    build_doc = doc.get("build", {})
    build_spec = BuildSpec(
        compiler_cmd=build_doc.get("compiler_cmd", "gcc {src} -o {out}"),
        flags=tuple(build_doc.get("flags", list(DEFAULT_FLAGS))),
    )

    return CampaignConfig(
        sections=tuple(jobs),
        llm_backends=llm_backends,
        compiler_backends=compiler_backends,
        strategies=strategies,
        attempts=doc.get("attempts", 3),
        timing_repeats=doc.get("timing_repeats", 3),
        tolerance=tolerance,
        build=build_spec,
        threads=doc.get("threads", 4),
        size_buckets=tuple(doc.get("size_buckets", list(DEFAULT_SIZE_BUCKETS))),
        timeout_s=doc.get("timeout_s"),
        max_inflight=doc.get("max_inflight", 4),
    )
