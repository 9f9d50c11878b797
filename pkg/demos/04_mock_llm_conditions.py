"""The full LLM pipeline without a model server.

Mock backends answer every prompt with well-formed text whose price follows
a recorded path, so prompts, parsing, logging, convergence, the results
table and the Welch test all run exactly as in a live experiment.
"""
# %%
import tempfile
from pathlib import Path

from collusionlab.cli import main

out = Path(tempfile.mkdtemp(prefix="collusionlab-"))
conds = ["mock-two-patient", "mock-two-myopic", "mock-data-asymmetry", "mock-five-sellers"]
for name in conds:
    main(["run", "--config", name, "--out", str(out / name), "--runs", "3"])

# %%
main(["report", *(str(out / c) for c in conds), "--compare", "mock-two-patient", "mock-two-myopic"])

# %% peek at what seller 1 was asked and what it answered in period 2
import json

rows = [json.loads(l) for l in (out / "mock-two-patient" / "run_000.io.jsonl").open()]
first = next(r for r in rows if r["t"] == 2 and r["agent"] == 0)
print(first["prompt"][-600:])
print("---")
print(first["response"])
print(f"\nlogs and plots in {out}")
