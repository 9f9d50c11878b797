"""Two Q-learners discover supra-competitive prices in self-play.

Pretrains a few seeds, shows where greedy play settles, then lets a frozen
learner face a fresh adaptive one.
"""
# %%
import numpy as np

from collusionlab.agents.qlearning import PriceGrid, QParams, pretrain
from collusionlab.equilibrium import benchmarks
from collusionlab.market import LogitMarketParams

market = LogitMarketParams.baseline()
b = benchmarks(market)
params = QParams(PriceGrid.around(b["p_competitive"], b["p_monopoly"]))
print("grid:", np.round(params.grid.points, 3))

# %%
results = [pretrain(params, market, stability_window=10_000, seed=s) for s in range(5)]
for r in results:
    cyc = r.greedy_cycle()
    print(f"seed {r.seed}: converged={r.converged} after {r.periods} periods, "
          f"greedy cycle length {len(cyc)}, avg price {r.greedy_price():.3f}")

avg = np.mean([r.greedy_price() for r in results if r.converged])
print(f"mean greedy price {avg:.3f} vs p^C {b['p_competitive']:.3f} "
      f"({(avg / b['p_competitive'] - 1) * 100:+.1f}%)")

# %% the same pair inside the experiment engine: frozen tables, then both still learning
from collusionlab.config import build_spec, parse_config
from collusionlab.engine import run

for mode in ("frozen", "adaptive"):
    cfg = parse_config({
        "name": f"q-vs-q-{mode}",
        "agents": [{"kind": "qlearning", "mode": mode, "seller": k, "pretrain_seed": 0}
                   for k in (0, 1)],
        "max_periods": 1000,
    })
    log, summary = run(build_spec(cfg, runs=1))
    print(f"{mode}: converged={summary.converged} rounds={summary.rounds_to_convergence} "
          f"avg price {summary.avg_price:.3f}")
