"""Binary checkpoint format and tolerance-aware state comparison.

Wire layout, all integers little-endian regardless of host:

    magic "PCAO" | u32 version (currently 1) | u32 record count
    per record:
        u16 name length | name bytes (UTF-8)
        u8 type tag (0=i8, 1=i32, 2=i64, 3=f32, 4=f64)
        u8 rank | rank x u64 extents
        payload: row-major elements, little-endian
    terminator byte 0xFF

An empty checkpoint is exactly 13 bytes.  Capture programs write
"<section_id>.in.ckpt" and "<section_id>.out.ckpt"; replay drivers read the
former and write the latter into their own scratch directory.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParseError, PcaotError
from .sections import ELEM_SIZES, ELEM_TYPES, StateManifest

MAGIC = b"PCAO"
WIRE_VERSION = 1
EMPTY_CHECKPOINT_SIZE = 13

TYPE_TAGS = {"i8": 0, "i32": 1, "i64": 2, "f32": 3, "f64": 4}
TAG_TYPES = {tag: name for name, tag in TYPE_TAGS.items()}
FLOAT_TYPES = ("f32", "f64")

# Explicit little-endian dtypes so payload bytes match the wire on any host.
NUMPY_DTYPES = {"i8": "<i1", "i32": "<i4", "i64": "<i8", "f32": "<f4", "f64": "<f8"}


class BadMagic(PcaotError):
    """Leading bytes are not the checkpoint magic."""


class UnsupportedVersion(PcaotError):
    """Version field is not a version this codec understands."""


class TruncatedPayload(PcaotError):
    """The byte stream ends before the structure it promises."""


class UnknownTypeTag(PcaotError):
    """A record carries a type tag outside the supported range."""


@dataclass(frozen=True)
class VarRecord:
    """One named, typed, shaped payload inside a checkpoint."""

    name: str
    elem_type: str
    extents: tuple[int, ...]
    payload: bytes

    def __post_init__(self) -> None:
        if self.elem_type not in ELEM_TYPES:
            raise UnknownTypeTag(f"record {self.name!r}: unknown element type {self.elem_type!r}")
        expected = self.element_count * ELEM_SIZES[self.elem_type]
        if len(self.payload) != expected:
            raise ParseError(
                f"record {self.name!r}: payload is {len(self.payload)} bytes, "
                f"extents require {expected}"
            )

    @property
    def element_count(self) -> int:
        return math.prod(self.extents) if self.extents else 1

    @classmethod
    def from_values(cls, name: str, elem_type: str, values, extents: tuple[int, ...] | None = None) -> "VarRecord":
        """Build a record from array-like values; extents default to the value shape."""
        arr = np.asarray(values, dtype=NUMPY_DTYPES[elem_type])
        if extents is None:
            extents = tuple(int(d) for d in arr.shape)
        else:
            arr = arr.reshape(extents)
        return cls(name=name, elem_type=elem_type, extents=extents, payload=arr.tobytes())

    def values(self) -> np.ndarray:
        """Decode the payload to a numpy array shaped by the extents."""
        arr = np.frombuffer(self.payload, dtype=NUMPY_DTYPES[self.elem_type])
        return arr.reshape(self.extents) if self.extents else arr.reshape(())


@dataclass(frozen=True)
class Checkpoint:
    """An ordered collection of variable records."""

    records: tuple[VarRecord, ...] = ()
    version: int = WIRE_VERSION

    def __post_init__(self) -> None:
        names = [r.name for r in self.records]
        if len(set(names)) != len(names):
            raise ParseError("checkpoint records must have unique names")

    def record(self, name: str) -> VarRecord | None:
        for rec in self.records:
            if rec.name == name:
                return rec
        return None


def encode(checkpoint: Checkpoint) -> bytes:
    """Serialize a checkpoint to wire bytes."""
    parts = [MAGIC, struct.pack("<II", checkpoint.version, len(checkpoint.records))]
    for rec in checkpoint.records:
        name_bytes = rec.name.encode("utf-8")
        parts.append(struct.pack("<H", len(name_bytes)))
        parts.append(name_bytes)
        parts.append(struct.pack("<BB", TYPE_TAGS[rec.elem_type], len(rec.extents)))
        if rec.extents:
            parts.append(struct.pack(f"<{len(rec.extents)}Q", *rec.extents))
        parts.append(rec.payload)
    parts.append(b"\xff")
    return b"".join(parts)


class _Cursor:
    """Bounds-checked reader over the wire bytes."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.data):
            raise TruncatedPayload(
                f"checkpoint ends inside {what}: wanted {count} bytes, "
                f"{len(self.data) - self.pos} remain"
            )
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk


def decode(data: bytes) -> Checkpoint:
    """Parse wire bytes back into a Checkpoint.

    Raises BadMagic, UnsupportedVersion, UnknownTypeTag or TruncatedPayload.
    """
    cur = _Cursor(data)
    magic = cur.take(4, "magic")
    if magic != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, found {magic!r}")
    version, count = struct.unpack("<II", cur.take(8, "header"))
    if version != WIRE_VERSION:
        raise UnsupportedVersion(f"version {version} is not supported")
    records = []
    for index in range(count):
        (name_len,) = struct.unpack("<H", cur.take(2, f"record {index} name length"))
        name = cur.take(name_len, f"record {index} name").decode("utf-8")
        tag, rank = struct.unpack("<BB", cur.take(2, f"record {name!r} type/rank"))
        if tag not in TAG_TYPES:
            raise UnknownTypeTag(f"record {name!r}: type tag {tag}")
        extents = struct.unpack(f"<{rank}Q", cur.take(8 * rank, f"record {name!r} extents")) if rank else ()
        elem_type = TAG_TYPES[tag]
        nbytes = ELEM_SIZES[elem_type] * (math.prod(extents) if extents else 1)
        payload = cur.take(nbytes, f"record {name!r} payload")
        records.append(VarRecord(name=name, elem_type=elem_type, extents=tuple(int(e) for e in extents), payload=payload))
    terminator = cur.take(1, "terminator")
    if terminator != b"\xff":
        raise TruncatedPayload(f"expected terminator 0xFF, found {terminator!r}")
    if cur.pos != len(data):
        raise TruncatedPayload(f"{len(data) - cur.pos} trailing bytes after terminator")
    return Checkpoint(records=tuple(records), version=version)


class ComparisonStatus(Enum):
    PASS = "Pass"
    NUMERIC_MISMATCH = "NumericMismatch"
    MISSING_VARIABLE = "MissingVariable"
    SHAPE_MISMATCH = "ShapeMismatch"
    TYPE_MISMATCH = "TypeMismatch"


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative float tolerance; integers are always compared exactly."""

    abs: float = 0.0
    rel: float = 1e-6

    def __post_init__(self) -> None:
        for label, value in (("abs", self.abs), ("rel", self.rel)):
            if not math.isfinite(value) or value < 0:
                raise ParseError(f"tolerance {label} must be finite and non-negative")


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of comparing one candidate checkpoint against the reference.

    worst_abs_err / worst_rel_err are maxima over all compared float
    elements (passing ones included); offending names the failing element
    with the largest absolute error, as (variable name, flat index).
    """

    status: ComparisonStatus
    worst_abs_err: float = 0.0
    worst_rel_err: float = 0.0
    offending: tuple[str, int] | None = None

    def __post_init__(self) -> None:
        if self.status is ComparisonStatus.PASS and self.offending is not None:
            raise ParseError("a passing report cannot name an offending element")


def _float_errors(ref: np.ndarray, cand: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-element (abs_err, rel_err, allowed-is-valid mask baseline).

    NaN agreeing with NaN is zero error; NaN against a number is infinite
    error.  Relative error is against the reference magnitude.
    """
    ref = ref.astype(np.float64, copy=False).ravel()
    cand = cand.astype(np.float64, copy=False).ravel()
    nan_ref = np.isnan(ref)
    nan_cand = np.isnan(cand)
    one_nan = nan_ref ^ nan_cand
    numeric = ~nan_ref & ~nan_cand
    abs_err = np.zeros(ref.shape, dtype=np.float64)
    abs_err[one_nan] = np.inf
    abs_err[numeric] = np.abs(ref[numeric] - cand[numeric])
    denom = np.abs(ref)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rel_err = np.where(abs_err == 0.0, 0.0, abs_err / denom)
    rel_err = np.where((abs_err > 0.0) & ~(denom > 0.0), np.inf, rel_err)
    return abs_err, rel_err, nan_ref


def compare(
    reference: Checkpoint,
    candidate: Checkpoint,
    manifest: StateManifest,
    tol: Tolerance = Tolerance(),
) -> ComparisonReport:
    """Compare candidate output state against the reference.

    Only out/inout manifest variables participate.  Integer elements must be
    bit-equal; a float element passes iff |ref - cand| <= tol.abs +
    tol.rel * |ref|, with NaN matching NaN.  Status precedence:
    MissingVariable > ShapeMismatch > TypeMismatch > NumericMismatch.

    The reference must contain every out/inout manifest variable; a
    reference that does not is a caller error and raises ValueError.
    """
    checked = manifest.outputs
    ref_map = {r.name: r for r in reference.records}
    cand_map = {r.name: r for r in candidate.records}
    for var in checked:
        if var.name not in ref_map:
            raise ValueError(f"reference checkpoint lacks manifest variable {var.name!r}")

    for var in checked:
        if var.name not in cand_map:
            return ComparisonReport(
                status=ComparisonStatus.MISSING_VARIABLE, offending=(var.name, 0)
            )
    for var in checked:
        if cand_map[var.name].extents != var.extents:
            return ComparisonReport(
                status=ComparisonStatus.SHAPE_MISMATCH, offending=(var.name, 0)
            )
    for var in checked:
        if cand_map[var.name].elem_type != var.elem_type:
            return ComparisonReport(
                status=ComparisonStatus.TYPE_MISMATCH, offending=(var.name, 0)
            )

    worst_abs = 0.0
    worst_rel = 0.0
    offender: tuple[str, int] | None = None
    offender_err = -math.inf
    for var in checked:
        ref_vals = ref_map[var.name].values().ravel()
        cand_vals = cand_map[var.name].values().ravel()
        if var.elem_type in FLOAT_TYPES:
            abs_err, rel_err, nan_ref = _float_errors(ref_vals, cand_vals)
            allowed = tol.abs + tol.rel * np.abs(ref_vals.astype(np.float64, copy=False))
            allowed = np.where(nan_ref, 0.0, allowed)
            failing = abs_err > allowed
            if abs_err.size:
                worst_abs = max(worst_abs, float(abs_err.max()))
                worst_rel = max(worst_rel, float(rel_err.max()))
            if failing.any():
                fail_idx = np.flatnonzero(failing)
                best = fail_idx[int(np.argmax(abs_err[fail_idx]))]
                if float(abs_err[best]) > offender_err:
                    offender_err = float(abs_err[best])
                    offender = (var.name, int(best))
        else:
            failing = ref_vals != cand_vals
            if failing.any():
                diff = np.abs(
                    ref_vals.astype(np.float64, copy=False)
                    - cand_vals.astype(np.float64, copy=False)
                )
                fail_idx = np.flatnonzero(failing)
                best = fail_idx[int(np.argmax(diff[fail_idx]))]
                if float(diff[best]) > offender_err:
                    offender_err = float(diff[best])
                    offender = (var.name, int(best))

    if offender is not None:
        return ComparisonReport(
            status=ComparisonStatus.NUMERIC_MISMATCH,
            worst_abs_err=worst_abs,
            worst_rel_err=worst_rel,
            offending=offender,
        )
    return ComparisonReport(
        status=ComparisonStatus.PASS, worst_abs_err=worst_abs, worst_rel_err=worst_rel
    )


def write_checkpoint_file(path, checkpoint: Checkpoint) -> None:
    with open(path, "wb") as handle:
        handle.write(encode(checkpoint))


def read_checkpoint_file(path) -> Checkpoint:
    with open(path, "rb") as handle:
        return decode(handle.read())
