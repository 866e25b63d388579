"""
Detecting OpenMP parallelization patterns
=========================================

"""

# The detector is lexical: it strips comments and strings, folds pragma
# continuations, and reasons about loop nesting depth without a C parser.
from pcaot import PatternLabel, ValidationStatus, categorize, detect
from pcaot.sections import StateManifest, VariableSpec

snippets = {
    "plain parallel for": """
#pragma omp parallel for
for (i = 0; i < n; i++) a[i] = b[i];
""",
    "reduction on an array section": """
#pragma omp parallel for reduction(+:hist[:64])
for (i = 0; i < n; i++) hist[v[i]]++;
""",
    "dynamic schedule, call in body": """
#pragma omp parallel for schedule(dynamic, 8)
for (i = 0; i < n; i++) out[i] = work(in[i]);
""",
    "two loops in one region, second nowait": """
#pragma omp parallel
{
#pragma omp for
    for (i = 0; i < n; i++) a[i] = 0;
#pragma omp for nowait
    for (j = 0; j < n; j++) b[j] = 1;
}
""",
    "inner loop parallelized": """
for (i = 0; i < n; i++) {
#pragma omp parallel for
    for (j = 0; j < n; j++) a[i][j] = 0;
}
""",
}

for name, code in snippets.items():
    labels = sorted(label.value for label in detect(code))
    print(f"{name:<38} -> {labels}")

# Detection feeds categorization: did the tool do what the section's
# author expected?
manifest = StateManifest(
    section_id="demo",
    variables=(VariableSpec("a", "f64", (100,), "out"),),
    parallelizable=True,
    expected_pattern="PO",
)
print(categorize(manifest, {PatternLabel.PO}, ValidationStatus.PASS).value)
print(categorize(manifest, {PatternLabel.PA}, ValidationStatus.PASS).value)
print(categorize(manifest, {PatternLabel.PO}, ValidationStatus.NUMERIC_MISMATCH).value)
