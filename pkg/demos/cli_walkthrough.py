"""
The command line, end to end
============================

Everything here can be typed in a shell as ``oslo <subcommand> ...``; it is
driven from Python so the demo runs anywhere. A feature file is written,
described, benchmarked and the resulting CSV read back.
"""

import tempfile
from pathlib import Path

from oslo.bench import read_results, summary_path
from oslo.cli import cli_main

work = Path(tempfile.mkdtemp())
features = work / "features.jsonl"
results = work / "results.csv"

# 30 classes; the first 10 land in the base split, the rest in test.
cli_main(["synth", "--classes", "30", "--dim", "32", "--separation", "1.0",
          "--per-class", "40", "--base-classes", "10", "--seed", "4",
          "--out", str(features)])
print(features.read_text().splitlines()[0][:100] + " ...")

cli_main(["diag", "--features", str(features)])

# --no-timing writes 0 for wall time, so reruns give identical files.
code = cli_main(["bench", "--features", str(features), "--tasks", "50",
                 "--methods", "oslo,oslo_no_xi,strong_baseline",
                 "--lambda-z", "0.15", "--lambda-xi", "1.0",
                 "--seed", "7", "--out", str(results), "--no-timing"])
print("exit code", code)

rows = read_results(results)
print(f"{len(rows)} rows, first: {rows[0]}")
print("summary written to", summary_path(results).name)

# Errors map to exit codes: 1 usage, 2 bad data, 3 runtime failure.
print("missing file ->", cli_main(["diag", "--features", str(work / "nope.jsonl")]))
