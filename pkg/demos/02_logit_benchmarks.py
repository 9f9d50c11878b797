"""Competitive and collusive benchmarks of the logit market.

Every price-elevation number elsewhere is measured against the static Nash
price computed here.
"""
# %%
from collusionlab.equilibrium import benchmarks
from collusionlab.market import LogitMarketParams, market_outcome

for n in (2, 3, 4, 5):
    b = benchmarks(LogitMarketParams.baseline(n))
    print(f"n={n}: p^C = {b['p_competitive']:.4f}   p^M = {b['p_monopoly']:.4f}")

# %% the one-shot sanity market used to screen models before pairing
b = benchmarks(LogitMarketParams.sanity_check())
print(f"sanity market: p^C = {b['p_competitive']:.4f}   p^M = {b['p_monopoly']:.4f}")

# %% what a collusive outcome looks like for the sellers
m = LogitMarketParams.baseline()
for label, p in (("Nash", 1.4729), ("collusive", 1.80), ("monopoly", 1.9250)):
    out = market_outcome(m, [p, p])
    print(f"{label:10s} price {p:.3f}  share {out.quantities[0]:.3f}  profit {out.profits[0]:.4f}")
