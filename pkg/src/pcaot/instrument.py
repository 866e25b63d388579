"""C source generation: capture rewrites and standalone replay drivers.

Two generators share one inlined helper block that reads and writes the
checkpoint wire format without any external dependency:

* generate_capture_program rewrites the original program so that running it
  dumps the section's live-in state right after the start pragma and its
  live-out state right before the stop pragma.  The rewrite only inserts
  lines; every original line survives byte-identical.
* generate_replay_driver wraps a section body (original or candidate) in a
  fresh main() that redeclares the manifest variables, reloads the captured
  input before each timed repeat, times the body alone with a monotonic
  clock, prints one "PCAOT_TIME_NS <n>" line per repeat and writes the
  resulting output checkpoint.

Arrays above 64 KiB are heap-allocated in drivers so large sections do not
blow the stack; smaller ones keep plain array declarations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .checkpoint import TYPE_TAGS
from .errors import PcaotError
from .sections import ExperimentalSection, StateManifest, VariableSpec, extract_sections

STACK_ARRAY_LIMIT = 64 * 1024
TIMING_LINE_PREFIX = "PCAOT_TIME_NS"

C_TYPES = {"i8": "int8_t", "i32": "int32_t", "i64": "int64_t", "f32": "float", "f64": "double"}


class UnknownSection(PcaotError):
    """The section to instrument is not present in the given source."""


class UnsupportedType(PcaotError):
    """A manifest variable's element type has no C mapping."""


class SourceKind(Enum):
    CAPTURE_PROGRAM = "capture"
    REPLAY_DRIVER = "driver"


@dataclass(frozen=True)
class GeneratedSource:
    """A self-contained generated C translation unit."""

    kind: SourceKind
    section_id: str
    text: str


_HELPERS = r'''/* pcaot checkpoint I/O helpers (generated; little-endian wire format) */
#include <stdio.h>
#include <stdlib.h>
#include <stdint.h>
#include <string.h>

static void pcaot_die(const char *msg) {
    fprintf(stderr, "pcaot: %s\n", msg);
    exit(3);
}

static void pcaot_put_le(FILE *f, uint64_t value, int nbytes) {
    int i;
    for (i = 0; i < nbytes; i++) {
        if (fputc((int)((value >> (8 * i)) & 0xFFu), f) == EOF) pcaot_die("checkpoint write failed");
    }
}

static uint64_t pcaot_get_le(FILE *f, int nbytes) {
    uint64_t value = 0;
    int i, c;
    for (i = 0; i < nbytes; i++) {
        c = fgetc(f);
        if (c == EOF) pcaot_die("checkpoint truncated");
        value |= (uint64_t)(c & 0xFF) << (8 * i);
    }
    return value;
}

static FILE *pcaot_ckpt_begin(const char *path, uint32_t record_count) {
    FILE *f = fopen(path, "wb");
    if (f == NULL) pcaot_die("cannot create checkpoint file");
    if (fwrite("PCAO", 1, 4, f) != 4) pcaot_die("checkpoint write failed");
    pcaot_put_le(f, 1u, 4);
    pcaot_put_le(f, record_count, 4);
    return f;
}

static void pcaot_ckpt_put(FILE *f, const char *name, int tag, int rank,
                           const uint64_t *extents, const void *data) {
    size_t name_len = strlen(name);
    uint64_t count = 1;
    uint64_t k;
    int i;
    pcaot_put_le(f, (uint64_t)name_len, 2);
    if (name_len > 0 && fwrite(name, 1, name_len, f) != name_len) pcaot_die("checkpoint write failed");
    pcaot_put_le(f, (uint64_t)tag, 1);
    pcaot_put_le(f, (uint64_t)rank, 1);
    for (i = 0; i < rank; i++) {
        pcaot_put_le(f, extents[i], 8);
        count *= extents[i];
    }
    switch (tag) {
    case 0: {
        const int8_t *p = (const int8_t *)data;
        for (k = 0; k < count; k++) pcaot_put_le(f, (uint64_t)(uint8_t)p[k], 1);
        break;
    }
    case 1: {
        const int32_t *p = (const int32_t *)data;
        for (k = 0; k < count; k++) pcaot_put_le(f, (uint64_t)(uint32_t)p[k], 4);
        break;
    }
    case 2: {
        const int64_t *p = (const int64_t *)data;
        for (k = 0; k < count; k++) pcaot_put_le(f, (uint64_t)p[k], 8);
        break;
    }
    case 3: {
        const float *p = (const float *)data;
        for (k = 0; k < count; k++) {
            uint32_t bits;
            memcpy(&bits, &p[k], 4);
            pcaot_put_le(f, (uint64_t)bits, 4);
        }
        break;
    }
    case 4: {
        const double *p = (const double *)data;
        for (k = 0; k < count; k++) {
            uint64_t bits;
            memcpy(&bits, &p[k], 8);
            pcaot_put_le(f, bits, 8);
        }
        break;
    }
    default:
        pcaot_die("unknown element type tag");
    }
}

static void pcaot_ckpt_end(FILE *f) {
    if (fputc(0xFF, f) == EOF) pcaot_die("checkpoint write failed");
    if (fclose(f) != 0) pcaot_die("checkpoint close failed");
}

static FILE *pcaot_ckpt_open(const char *path, uint32_t expect_records) {
    FILE *f = fopen(path, "rb");
    char magic[4];
    if (f == NULL) pcaot_die("cannot open checkpoint file");
    if (fread(magic, 1, 4, f) != 4 || memcmp(magic, "PCAO", 4) != 0) pcaot_die("bad checkpoint magic");
    if (pcaot_get_le(f, 4) != 1u) pcaot_die("unsupported checkpoint version");
    if ((uint32_t)pcaot_get_le(f, 4) != expect_records) pcaot_die("unexpected checkpoint record count");
    return f;
}

static void pcaot_ckpt_get(FILE *f, const char *name, int tag, int rank,
                           const uint64_t *extents, void *data) {
    char rec_name[256];
    uint64_t name_len = pcaot_get_le(f, 2);
    uint64_t count = 1;
    uint64_t k;
    int i;
    if (name_len >= sizeof(rec_name)) pcaot_die("checkpoint variable name too long");
    if (name_len > 0 && fread(rec_name, 1, (size_t)name_len, f) != (size_t)name_len) pcaot_die("checkpoint truncated");
    rec_name[name_len] = '\0';
    if (strcmp(rec_name, name) != 0) pcaot_die("checkpoint variable order mismatch");
    if ((int)pcaot_get_le(f, 1) != tag) pcaot_die("checkpoint element type mismatch");
    if ((int)pcaot_get_le(f, 1) != rank) pcaot_die("checkpoint rank mismatch");
    for (i = 0; i < rank; i++) {
        if (pcaot_get_le(f, 8) != extents[i]) pcaot_die("checkpoint extent mismatch");
        count *= extents[i];
    }
    switch (tag) {
    case 0: {
        int8_t *p = (int8_t *)data;
        for (k = 0; k < count; k++) p[k] = (int8_t)(uint8_t)pcaot_get_le(f, 1);
        break;
    }
    case 1: {
        int32_t *p = (int32_t *)data;
        for (k = 0; k < count; k++) p[k] = (int32_t)(uint32_t)pcaot_get_le(f, 4);
        break;
    }
    case 2: {
        int64_t *p = (int64_t *)data;
        for (k = 0; k < count; k++) p[k] = (int64_t)pcaot_get_le(f, 8);
        break;
    }
    case 3: {
        float *p = (float *)data;
        for (k = 0; k < count; k++) {
            uint32_t bits = (uint32_t)pcaot_get_le(f, 4);
            float v;
            memcpy(&v, &bits, 4);
            p[k] = v;
        }
        break;
    }
    case 4: {
        double *p = (double *)data;
        for (k = 0; k < count; k++) {
            uint64_t bits = pcaot_get_le(f, 8);
            double v;
            memcpy(&v, &bits, 8);
            p[k] = v;
        }
        break;
    }
    default:
        pcaot_die("unknown element type tag");
    }
}

static void pcaot_ckpt_close(FILE *f) {
    if (fgetc(f) != 0xFF) pcaot_die("checkpoint missing terminator");
    fclose(f);
}
/* end pcaot helpers */'''


def emit_helpers() -> str:
    """The self-contained C checkpoint reader/writer block."""
    return _HELPERS


def _ctype(var: VariableSpec) -> str:
    try:
        return C_TYPES[var.elem_type]
    except KeyError:
        raise UnsupportedType(f"variable {var.name!r}: no C type for {var.elem_type!r}") from None


def _data_expr(var: VariableSpec) -> str:
    # Scalars need their address taken; arrays and heap pointers decay.
    return f"&({var.name})" if var.is_scalar else f"({var.name})"


def _put_lines(var: VariableSpec, file_var: str, indent: str) -> list[str]:
    tag = TYPE_TAGS[var.elem_type]
    if var.is_scalar:
        return [
            f"{indent}pcaot_ckpt_put({file_var}, \"{var.name}\", {tag}, 0, "
            f"(const uint64_t *)0, (const void *){_data_expr(var)});"
        ]
    exts = ", ".join(f"{e}ull" for e in var.extents)
    return [
        f"{indent}{{ uint64_t pcaot_ext[] = {{ {exts} }}; "
        f"pcaot_ckpt_put({file_var}, \"{var.name}\", {tag}, {len(var.extents)}, "
        f"pcaot_ext, (const void *){_data_expr(var)}); }}"
    ]


def _get_lines(var: VariableSpec, file_var: str, indent: str) -> list[str]:
    tag = TYPE_TAGS[var.elem_type]
    if var.is_scalar:
        return [
            f"{indent}pcaot_ckpt_get({file_var}, \"{var.name}\", {tag}, 0, "
            f"(const uint64_t *)0, (void *){_data_expr(var)});"
        ]
    exts = ", ".join(f"{e}ull" for e in var.extents)
    return [
        f"{indent}{{ uint64_t pcaot_ext[] = {{ {exts} }}; "
        f"pcaot_ckpt_get({file_var}, \"{var.name}\", {tag}, {len(var.extents)}, "
        f"pcaot_ext, (void *){_data_expr(var)}); }}"
    ]


def _dump_block(variables: tuple[VariableSpec, ...], path: str, label: str, indent: str) -> list[str]:
    lines = [f"{indent}{{ /* pcaot: dump {label} state */"]
    inner = indent + "    "
    lines.append(f"{inner}FILE *pcaot_f = pcaot_ckpt_begin(\"{path}\", {len(variables)}u);")
    for var in variables:
        lines.extend(_put_lines(var, "pcaot_f", inner))
    lines.append(f"{inner}pcaot_ckpt_end(pcaot_f);")
    lines.append(f"{indent}}}")
    return lines


def input_checkpoint_name(section_id: str) -> str:
    return f"{section_id}.in.ckpt"


def output_checkpoint_name(section_id: str) -> str:
    return f"{section_id}.out.ckpt"


def generate_capture_program(
    original_source: str,
    section: ExperimentalSection,
    manifest: StateManifest,
) -> GeneratedSource:
    """Insert state dumps around the section in an otherwise untouched program.

    The helper block goes at the top of the file; the input dump (skipped
    when the manifest has no in/inout variables) right after the start
    pragma; the output dump right before the stop pragma.  Raises
    UnknownSection if the section does not match the source.
    """
    for var in manifest.variables:
        _ctype(var)
    if manifest.section_id != section.id:
        raise UnknownSection(
            f"manifest describes section {manifest.section_id!r}, got {section.id!r}"
        )
    found = [
        s
        for s in extract_sections(original_source, section.source_path)
        if s.start_line == section.start_line
        and s.end_line == section.end_line
        and s.body_text == section.body_text
    ]
    if not found:
        raise UnknownSection(
            f"section {section.id!r} (lines {section.start_line}-{section.end_line}) "
            f"not found in source"
        )

    lines = original_source.splitlines()
    start_idx = section.start_line - 1
    stop_idx = section.end_line - 1
    indent = lines[start_idx][: len(lines[start_idx]) - len(lines[start_idx].lstrip())]

    out: list[str] = [_HELPERS]
    out.extend(lines[: start_idx + 1])
    if manifest.inputs:
        out.extend(
            _dump_block(manifest.inputs, input_checkpoint_name(section.id), "input", indent)
        )
    out.extend(lines[start_idx + 1 : stop_idx])
    out.extend(
        _dump_block(manifest.outputs, output_checkpoint_name(section.id), "output", indent)
    )
    out.extend(lines[stop_idx:])
    return GeneratedSource(
        kind=SourceKind.CAPTURE_PROGRAM, section_id=section.id, text="\n".join(out) + "\n"
    )


def capture_insertion_line_count(manifest: StateManifest) -> int:
    """How many lines generate_capture_program adds to the original source."""
    helper_lines = len(_HELPERS.splitlines())
    out_dump = 4 + len(manifest.outputs)
    in_dump = 4 + len(manifest.inputs) if manifest.inputs else 0
    return helper_lines + in_dump + out_dump


def _declaration_lines(var: VariableSpec) -> list[str]:
    ctype = _ctype(var)
    if var.is_scalar:
        return [f"    {ctype} {var.name};"]
    dims = "".join(f"[{e}]" for e in var.extents)
    if var.byte_size <= STACK_ARRAY_LIMIT:
        return [f"    {ctype} {var.name}{dims};"]
    # Heap allocation keeps the a[i][j] access syntax via a row-pointer type.
    tail = "".join(f"[{e}]" for e in var.extents[1:])
    return [
        f"    {ctype} (*{var.name}){tail} = ({ctype} (*){tail})malloc(sizeof({ctype}{dims}));"
        if tail
        else f"    {ctype} *{var.name} = ({ctype} *)malloc(sizeof({ctype}{dims}));",
        f"    if ({var.name} == NULL) pcaot_die(\"out of memory\");",
    ]


def _zero_lines(var: VariableSpec) -> list[str]:
    if var.is_scalar:
        return [f"        {var.name} = 0;"]
    return [f"        memset((void *)({var.name}), 0, {var.byte_size}ull);"]


def generate_replay_driver(
    section_body: str,
    manifest: StateManifest,
    timing_repeats: int = 3,
    support_code: str = "",
) -> GeneratedSource:
    """Wrap a section body in a standalone timing-and-checkpoint driver.

    The driver reloads the captured input (and re-zeroes pure-out
    variables) before every repeat so each repeat starts from identical
    state, times only the body with CLOCK_MONOTONIC, writes the output
    checkpoint after the final repeat, then prints one timing line per
    repeat.  support_code is inserted at file scope for bodies that call
    helper functions.
    """
    if timing_repeats < 1:
        raise ValueError("timing_repeats must be at least 1")
    for var in manifest.variables:
        _ctype(var)

    sid = manifest.section_id
    lines: list[str] = [
        "#define _POSIX_C_SOURCE 200809L",
        "#include <time.h>",
        "#include <math.h>",
        _HELPERS,
    ]
    if support_code.strip():
        lines.append(support_code.rstrip("\n"))
    lines.append("")
    lines.append("int main(void) {")
    for var in manifest.variables:
        lines.extend(_declaration_lines(var))
    lines.append(f"    long long pcaot_ns[{timing_repeats}];")
    lines.append("    int pcaot_rep;")
    lines.append(f"    for (pcaot_rep = 0; pcaot_rep < {timing_repeats}; pcaot_rep++) {{")
    if manifest.inputs:
        lines.append(
            f"        {{ /* pcaot: reload input state */"
        )
        lines.append(
            f"            FILE *pcaot_f = pcaot_ckpt_open(\"{input_checkpoint_name(sid)}\", "
            f"{len(manifest.inputs)}u);"
        )
        for var in manifest.inputs:
            lines.extend(_get_lines(var, "pcaot_f", "            "))
        lines.append("            pcaot_ckpt_close(pcaot_f);")
        lines.append("        }")
    pure_out = tuple(v for v in manifest.variables if v.direction == "out")
    for var in pure_out:
        lines.extend(_zero_lines(var))
    lines.append("        {")
    lines.append("            struct timespec pcaot_t0, pcaot_t1;")
    lines.append("            clock_gettime(CLOCK_MONOTONIC, &pcaot_t0);")
    lines.append("            { /* pcaot: section body */")
    lines.append(section_body)
    lines.append("            } /* pcaot: end section body */")
    lines.append("            clock_gettime(CLOCK_MONOTONIC, &pcaot_t1);")
    lines.append(
        "            pcaot_ns[pcaot_rep] = (long long)(pcaot_t1.tv_sec - pcaot_t0.tv_sec) "
        "* 1000000000LL + (long long)(pcaot_t1.tv_nsec - pcaot_t0.tv_nsec);"
    )
    lines.append("        }")
    lines.append("    }")
    lines.extend(_dump_block(manifest.outputs, output_checkpoint_name(sid), "output", "    "))
    lines.append(f"    for (pcaot_rep = 0; pcaot_rep < {timing_repeats}; pcaot_rep++) {{")
    lines.append(f"        printf(\"{TIMING_LINE_PREFIX} %lld\\n\", pcaot_ns[pcaot_rep]);")
    lines.append("    }")
    for var in manifest.variables:
        if not var.is_scalar and var.byte_size > STACK_ARRAY_LIMIT:
            lines.append(f"    free((void *)({var.name}));")
    lines.append("    return 0;")
    lines.append("}")
    return GeneratedSource(kind=SourceKind.REPLAY_DRIVER, section_id=sid, text="\n".join(lines) + "\n")
