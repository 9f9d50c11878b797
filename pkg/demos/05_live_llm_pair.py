"""Run a real pair of LLM sellers against an OpenAI-compatible server.

Needs a running server (for example vLLM on localhost:8000) or a hosted
endpoint with its key in the environment variable named by the config.
Runs are long: each period makes one request per seller.
"""
# %%
import os
import sys

from collusionlab.agents.llm import make_backend
from collusionlab.config import build_spec, llm_config, load_config, preset_path
from collusionlab.engine import run_condition
from collusionlab.errors import CollusionLabError
from collusionlab.sanity import one_shot_check

model = load_config(preset_path("two-patient"))
model.max_periods = int(os.environ.get("PERIODS", "50"))

# %% screen the model on the one-shot pricing task first
try:
    backend = make_backend(llm_config(model.agents[0], "Seller 1").backend)
    check = one_shot_check(backend, trials=3)
except CollusionLabError as exc:
    sys.exit(f"backend not usable: {exc}")
print(f"one-shot: {check.valid}/{check.trials} parsed, {check.correct} within 5% of {check.target:.3f}")

# %%
spec = build_spec(model, runs=1, output_dir="runs/live-two-patient")
for log, s in run_condition(spec):
    print(f"converged={s.converged} rounds={s.rounds_to_convergence} avg price {s.avg_price:.3f}")
