"""
A complete campaign, offline
============================

Runs the shipped sample campaign: three sections, a mock LLM with three
prompt strategies, and a pass-through "compiler".  Needs gcc but no
network.  Equivalent to:

    pcaot run --config samples/campaign.json --out <dir>
"""

import tempfile
from pathlib import Path

from pcaot import aggregate, emit_reports, execute, load_campaign_config, plan

samples = Path(__file__).resolve().parent.parent / "samples"
config = load_campaign_config(samples / "campaign.json")

experiment = plan(config)
print(f"{len(experiment.jobs)} sections x {experiment.versions_per_section} versions "
      f"= {experiment.total_versions} runs, {experiment.total_llm_attempts} LLM attempts")

outdir = Path(tempfile.mkdtemp(prefix="pcaot-campaign-"))
records = execute(experiment, config, outdir)

for record in records:
    tag = f"{record.tool}/{record.strategy or '-'}/{record.attempt or '-'}"
    speed = f"{record.speedup:.2f}x" if record.speedup else "     "
    print(f"  {record.section_id:<10} {tag:<16} {record.status.value:<16} "
          f"{record.category.value:<22} {speed}")

metrics = aggregate(records, config)
print("overall LLM success rate:", metrics.overall_success_rate)

paths = emit_reports(metrics, records, outdir)
print("reports:")
for path in paths:
    print("  ", path)
