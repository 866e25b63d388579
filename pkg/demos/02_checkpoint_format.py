"""
The checkpoint wire format
==========================

"""

# Checkpoints are the currency of validation: little-endian, versioned,
# self-describing snapshots of named variables.
import numpy as np

from pcaot import Checkpoint, Tolerance, VarRecord, compare, decode, encode
from pcaot.sections import StateManifest, VariableSpec

# An empty checkpoint is exactly 13 bytes: magic, version, record count,
# and the terminator byte.
empty = encode(Checkpoint())
print(f"empty checkpoint: {len(empty)} bytes -> {empty.hex(' ')}")

# One scalar f64 record.  The payload is the raw little-endian bytes.
record = VarRecord.from_values("s", "f64", np.float64(1.0))
blob = encode(Checkpoint(records=(record,)))
print(f"one f64 scalar: {len(blob)} bytes")

# decode() is the exact inverse of encode().
roundtrip = decode(blob)
print("roundtrip value:", roundtrip.record("s").values())

# Comparison is manifest-driven: only out/inout variables are judged,
# integers bit-exactly, floats within abs+rel tolerance.
manifest = StateManifest(
    section_id="demo",
    variables=(VariableSpec("s", "f64", (), "out"),),
    parallelizable=True,
    expected_pattern="PO",
)
candidate = Checkpoint(records=(VarRecord.from_values("s", "f64", np.float64(1.0 + 1e-9)),))
report = compare(decode(blob), candidate, manifest, Tolerance(abs=0.0, rel=1e-6))
print("status:", report.status.value, " worst rel err:", report.worst_rel_err)

tight = compare(decode(blob), candidate, manifest, Tolerance(abs=0.0, rel=1e-12))
print("tighter tolerance:", tight.status.value, "at", tight.offending)
