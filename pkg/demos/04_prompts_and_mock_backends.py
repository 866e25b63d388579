"""
Prompt strategies and offline mock backends
===========================================

"""

from pathlib import Path

from pcaot import (
    MockLlm,
    OptimizationRequest,
    PromptStrategy,
    extract_code,
    extract_sections,
    render_prompt,
)

samples = Path(__file__).resolve().parent.parent / "samples"
source = (samples / "vecscale.c").read_text()
section = extract_sections(source)[0]

# Three strategies, one rendering rule: strategy text, a blank line, the
# section code.  CoT is DIP plus an explicit reasoning request.
for strategy in PromptStrategy:
    prompt = render_prompt(strategy, section.body_text)
    head = prompt.splitlines()[0]
    print(f"{strategy.value}: {len(prompt)} chars, starts {head[:60]!r}")

# A mock backend answers from a table, so campaigns run with no network
# and no key.  Keys fall back from most to least specific.
mock = MockLlm(
    tool_id="demo-mock",
    responses={
        "vecscale/IP/1": "```c\n#pragma omp parallel for\nfor (i = 0; i < 100000; i++) a[i] = scale * b[i] + 1.0;\n```",
        "vecscale": "```c\nfor (i = 0; i < 100000; i++) a[i] = scale * b[i] + 1.0;\n```",
    },
)
specific = mock.complete("vecscale", PromptStrategy.IP, 1, section.body_text)
general = mock.complete("vecscale", PromptStrategy.DIP, 2, section.body_text)
print("IP attempt 1 answer has omp:", "#pragma omp" in specific)
print("DIP attempt 2 answer has omp:", "#pragma omp" in general)

# extract_code pulls the most plausible fenced block out of a chatty
# response.
chatty = "Some prose.\n```\nx = 1\n```\nThe fix:\n```c\nfor (i = 0; i < 4; i++) a[i] = 0;\n```\nDone."
print("extracted:", extract_code(chatty))

# The request wrapper ties a candidate to its origin for bookkeeping.
request = OptimizationRequest(section.body_text, PromptStrategy.IP, attempt=1)
candidate = mock.request(request, "vecscale")
print("origin:", candidate.origin)
