"""Pragma-delimited experimental sections and their state manifests.

A section is a region of a C program fenced by experimental pragmas.  Two
spellings are accepted on input:

    #pragma experimental start [id=NAME]      /  #pragma experimental end
    #pragma experimental section start [id=NAME]  /  #pragma experimental section stop

with arbitrary internal whitespace; the long spelling is the canonical one
this package emits.  The state manifest is a JSON document naming the
variables that are live at the section boundary, their element types,
extents and flow direction.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass

from .errors import ParseError, PcaotError

ELEM_TYPES = ("i8", "i32", "i64", "f32", "f64")
ELEM_SIZES = {"i8": 1, "i32": 4, "i64": 8, "f32": 4, "f64": 8}
DIRECTIONS = ("in", "out", "inout")
PATTERN_NAMES = ("PO", "PF", "PR", "PA", "DS", "NW")
NON_PARALLEL_REASONS = ("DP", "FC")

START_PRAGMA = "#pragma experimental section start"
STOP_PRAGMA = "#pragma experimental section stop"

# Generated C reserves this identifier prefix for its own locals.
RESERVED_PREFIX = "pcaot_"

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_START_RE = re.compile(
    r"^\s*#\s*pragma\s+experimental\s+(?:section\s+)?start\b(?P<rest>.*)$"
)
_STOP_RE = re.compile(
    r"^\s*#\s*pragma\s+experimental\s+(?:section\s+)?(?:stop|end)\b(?P<rest>.*)$"
)
_ID_ARG_RE = re.compile(r"^\s*(?:id\s*=\s*(?P<id>[A-Za-z0-9_.:\-]+))?\s*$")


class UnmatchedPragma(PcaotError):
    """A start pragma without a stop, or a stop without a start."""


class NestedSection(PcaotError):
    """A start pragma inside an already open section."""


class DuplicateVariable(ParseError):
    """Two manifest variables share a name."""


class NoOutputVariable(ParseError):
    """Manifest declares no out or inout variable, so nothing is checkable."""


class InconsistentParallelFields(ParseError):
    """expected_pattern / non_parallel_reason disagree with parallelizable."""


@dataclass(frozen=True)
class ExperimentalSection:
    """One pragma-fenced region of a source file.

    Line numbers are 1-based and refer to the pragma lines themselves;
    body_text holds the lines strictly between them.
    """

    id: str
    source_path: str
    start_line: int
    end_line: int
    body_text: str

    def __post_init__(self) -> None:
        if self.end_line <= self.start_line:
            raise ParseError(f"section {self.id!r}: end_line must exceed start_line")

    @property
    def line_count(self) -> int:
        return self.end_line - self.start_line - 1


@dataclass(frozen=True)
class VariableSpec:
    """One live variable at a section boundary.

    extents == () means a scalar; otherwise row-major array extents.
    """

    name: str
    elem_type: str
    extents: tuple[int, ...] = ()
    direction: str = "inout"

    def __post_init__(self) -> None:
        if not _IDENT_RE.match(self.name):
            raise ParseError(f"variable name {self.name!r} is not a C identifier")
        if self.name.startswith(RESERVED_PREFIX):
            raise ParseError(
                f"variable name {self.name!r} uses the reserved prefix {RESERVED_PREFIX!r}"
            )
        if self.elem_type not in ELEM_TYPES:
            raise ParseError(f"unknown element type {self.elem_type!r}")
        if self.direction not in DIRECTIONS:
            raise ParseError(f"unknown direction {self.direction!r}")
        if any((not isinstance(e, int)) or isinstance(e, bool) or e <= 0 for e in self.extents):
            raise ParseError(f"variable {self.name!r}: extents must be positive integers")
        if self.element_count >= 2**64:
            raise ParseError(f"variable {self.name!r}: total element count overflows u64")

    @property
    def element_count(self) -> int:
        return math.prod(self.extents) if self.extents else 1

    @property
    def byte_size(self) -> int:
        return self.element_count * ELEM_SIZES[self.elem_type]

    @property
    def is_scalar(self) -> bool:
        return not self.extents


@dataclass(frozen=True)
class StateManifest:
    """Live-in/live-out declaration for one experimental section."""

    section_id: str
    variables: tuple[VariableSpec, ...]
    parallelizable: bool
    expected_pattern: str | None = None
    non_parallel_reason: str | None = None

    def __post_init__(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise DuplicateVariable(f"variable {dup!r} declared more than once")
        if not any(v.direction in ("out", "inout") for v in self.variables):
            raise NoOutputVariable(
                f"manifest {self.section_id!r} declares no out or inout variable"
            )
        if self.parallelizable:
            if self.expected_pattern is None or self.non_parallel_reason is not None:
                raise InconsistentParallelFields(
                    "parallelizable sections carry expected_pattern and no non_parallel_reason"
                )
            if self.expected_pattern not in PATTERN_NAMES:
                raise ParseError(f"unknown expected_pattern {self.expected_pattern!r}")
        else:
            if self.non_parallel_reason is None or self.expected_pattern is not None:
                raise InconsistentParallelFields(
                    "non-parallelizable sections carry non_parallel_reason and no expected_pattern"
                )
            if self.non_parallel_reason not in NON_PARALLEL_REASONS:
                raise ParseError(f"unknown non_parallel_reason {self.non_parallel_reason!r}")

    def captured(self, directions: tuple[str, ...]) -> tuple[VariableSpec, ...]:
        """Variables whose direction is one of the given directions, in manifest order."""
        return tuple(v for v in self.variables if v.direction in directions)

    @property
    def inputs(self) -> tuple[VariableSpec, ...]:
        return self.captured(("in", "inout"))

    @property
    def outputs(self) -> tuple[VariableSpec, ...]:
        return self.captured(("out", "inout"))


def extract_sections(source_text: str, source_path: str = "<memory>") -> list[ExperimentalSection]:
    """Scan a source file for experimental sections.

    Returns sections in order of appearance.  A start pragma without an id
    argument gets the default id "<filename>:<start_line>".  Raises
    UnmatchedPragma or NestedSection on ill-formed fencing.
    """
    lines = source_text.splitlines()
    sections: list[ExperimentalSection] = []
    open_start: tuple[int, str] | None = None
    for lineno, line in enumerate(lines, start=1):
        start = _START_RE.match(line)
        if start:
            if open_start is not None:
                raise NestedSection(
                    f"{source_path}:{lineno}: start pragma inside the section opened "
                    f"at line {open_start[0]}"
                )
            arg = _ID_ARG_RE.match(start.group("rest"))
            if arg is None:
                raise ParseError(f"{source_path}:{lineno}: malformed start pragma arguments")
            section_id = arg.group("id") or f"{os.path.basename(source_path)}:{lineno}"
            open_start = (lineno, section_id)
            continue
        stop = _STOP_RE.match(line)
        if stop:
            if open_start is None:
                raise UnmatchedPragma(f"{source_path}:{lineno}: stop pragma without a start")
            arg = _ID_ARG_RE.match(stop.group("rest"))
            if arg is None:
                raise ParseError(f"{source_path}:{lineno}: malformed stop pragma arguments")
            start_line, section_id = open_start
            if arg.group("id") and arg.group("id") != section_id:
                raise UnmatchedPragma(
                    f"{source_path}:{lineno}: stop pragma id {arg.group('id')!r} does not "
                    f"match the open section {section_id!r}"
                )
            body = "\n".join(lines[start_line : lineno - 1])
            sections.append(
                ExperimentalSection(
                    id=section_id,
                    source_path=source_path,
                    start_line=start_line,
                    end_line=lineno,
                    body_text=body,
                )
            )
            open_start = None
    if open_start is not None:
        raise UnmatchedPragma(
            f"{source_path}:{open_start[0]}: start pragma never closed"
        )
    return sections


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParseError(message)


_MANIFEST_KEYS = {"section_id", "parallelizable", "expected_pattern", "non_parallel_reason", "variables"}
_VARIABLE_KEYS = {"name", "elem_type", "extents", "direction"}


def load_manifest(text: str) -> StateManifest:
    """Parse a state manifest from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "manifest root must be a JSON object")
    unknown = set(doc) - _MANIFEST_KEYS
    _require(not unknown, f"unknown manifest keys: {sorted(unknown)}")
    _require(isinstance(doc.get("section_id"), str) and doc["section_id"] != "",
             "section_id must be a non-empty string")
    _require(isinstance(doc.get("parallelizable"), bool), "parallelizable must be a boolean")
    raw_vars = doc.get("variables")
    _require(isinstance(raw_vars, list) and raw_vars, "variables must be a non-empty list")
    variables = []
    for entry in raw_vars:
        _require(isinstance(entry, dict), "each variable must be a JSON object")
        unknown = set(entry) - _VARIABLE_KEYS
        _require(not unknown, f"unknown variable keys: {sorted(unknown)}")
        _require(isinstance(entry.get("name"), str), "variable name must be a string")
        _require(isinstance(entry.get("elem_type"), str), "variable elem_type must be a string")
        extents = entry.get("extents", [])
        _require(isinstance(extents, list), "variable extents must be a list")
        _require(isinstance(entry.get("direction", "inout"), str),
                 "variable direction must be a string")
        variables.append(
            VariableSpec(
                name=entry["name"],
                elem_type=entry["elem_type"],
                extents=tuple(extents),
                direction=entry.get("direction", "inout"),
            )
        )
    expected = doc.get("expected_pattern")
    reason = doc.get("non_parallel_reason")
    _require(expected is None or isinstance(expected, str), "expected_pattern must be a string")
    _require(reason is None or isinstance(reason, str), "non_parallel_reason must be a string")
    return StateManifest(
        section_id=doc["section_id"],
        variables=tuple(variables),
        parallelizable=doc["parallelizable"],
        expected_pattern=expected,
        non_parallel_reason=reason,
    )


def dump_manifest(manifest: StateManifest) -> str:
    """Serialize a manifest back to JSON; load_manifest(dump_manifest(m)) == m."""
    doc: dict = {
        "section_id": manifest.section_id,
        "parallelizable": manifest.parallelizable,
    }
    if manifest.expected_pattern is not None:
        doc["expected_pattern"] = manifest.expected_pattern
    if manifest.non_parallel_reason is not None:
        doc["non_parallel_reason"] = manifest.non_parallel_reason
    doc["variables"] = [
        {
            "name": v.name,
            "elem_type": v.elem_type,
            "extents": list(v.extents),
            "direction": v.direction,
        }
        for v in manifest.variables
    ]
    return json.dumps(doc, indent=2) + "\n"


def load_manifest_file(path: str | os.PathLike[str]) -> StateManifest:
    with open(path, "r", encoding="utf-8") as handle:
        return load_manifest(handle.read())
