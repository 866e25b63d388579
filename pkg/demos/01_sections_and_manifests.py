"""
Marking experimental sections and describing their state
=========================================================

"""

# A section is the region between a pair of pragmas.  The harness only
# needs the source text to find them.
from pathlib import Path

from pcaot import extract_sections, load_manifest_file

samples = Path(__file__).resolve().parent.parent / "samples"
source = (samples / "vecscale.c").read_text()

sections = extract_sections(source, "vecscale.c")
for section in sections:
    print(f"found section {section.id!r}: "
          f"lines {section.start_line}..{section.end_line}, "
          f"{section.line_count} line(s) of body")
    print(section.body_text)

# The manifest is the section's contract: every variable the body reads
# or writes, with element type, shape, and direction.
manifest = load_manifest_file(samples / "vecscale.manifest.json")
print(f"manifest for {manifest.section_id!r}, "
      f"parallelizable={manifest.parallelizable}, "
      f"expected={manifest.expected_pattern}")
for var in manifest.variables:
    shape = "x".join(map(str, var.extents)) if var.extents else "scalar"
    print(f"    {var.direction:>5}  {var.name}: {var.elem_type} [{shape}]")

# Directions drive the checkpoints: "in" and "inout" variables make up
# the input checkpoint, "out" and "inout" the output checkpoint.
print("captured on entry:", [v.name for v in manifest.inputs])
print("captured on exit: ", [v.name for v in manifest.outputs])
