"""
Capture and replay: the differential testing loop
==================================================

Requires a C compiler (gcc by default).
"""

import tempfile
from pathlib import Path

from pcaot import (
    BuildSpec,
    Tolerance,
    build,
    collect_timing,
    compare,
    extract_sections,
    generate_capture_program,
    generate_replay_driver,
    load_manifest_file,
    output_checkpoint_name,
    read_checkpoint_file,
    run,
)

samples = Path(__file__).resolve().parent.parent / "samples"
source = (samples / "vecscale.c").read_text()
manifest = load_manifest_file(samples / "vecscale.manifest.json")
section = [s for s in extract_sections(source) if s.id == manifest.section_id][0]

workdir = Path(tempfile.mkdtemp(prefix="pcaot-demo-"))
print("working under", workdir)

# Step 1: instrument the original program.  The rewrite only inserts
# lines; every original line survives byte for byte.
capture = generate_capture_program(source, section, manifest)
binary = build(capture, BuildSpec(workdir=workdir / "capture"))
result = run(binary, timeout_s=60.0)
assert result.exit_code == 0, result.stderr
print("capture run produced:", sorted(p.name for p in (workdir / "capture").glob("*.ckpt")))

# Step 2: replay the original body against the captured input, three
# timed repeats, writing its own output checkpoint.
driver = generate_replay_driver(section.body_text, manifest, timing_repeats=3)
driver_bin = build(driver, BuildSpec(workdir=workdir / "replay"))
in_name = f"{manifest.section_id}.in.ckpt"
(workdir / "replay" / in_name).write_bytes((workdir / "capture" / in_name).read_bytes())
replay = run(driver_bin, timeout_s=60.0)
assert replay.exit_code == 0, replay.stderr
timing = collect_timing(replay)
print("per-repeat times (ns):", timing.samples_ns, "-> median", timing.median_ns)

# Step 3: compare output state.  The original replayed against itself
# must match exactly, so a zero tolerance is safe here.
reference = read_checkpoint_file(workdir / "capture" / output_checkpoint_name(manifest.section_id))
candidate = read_checkpoint_file(workdir / "replay" / output_checkpoint_name(manifest.section_id))
report = compare(reference, candidate, manifest, Tolerance(abs=0.0, rel=0.0))
print("replay vs capture:", report.status.value)
