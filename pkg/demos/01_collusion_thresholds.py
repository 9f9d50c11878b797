"""How patient must two sellers be to hold a collusive price?

Linear duopoly q_i = a - b p_i + d p_j. We sweep the target price between
the static Nash price and the joint-monopoly price, then weaken monitoring
and check the closed-form threshold against brute-force simulation.
"""
# %%
import numpy as np

from collusionlab.theory import (CollusionScenario, LinearMarketParams, MonitoringProfile,
                                 grim_trigger_mc_oracle, monitored_threshold,
                                 monopoly_price_linear, nash_price_linear, patience_threshold,
                                 payoff_quad)

params = LinearMarketParams(a=2.0, b=1.0, d=0.5, c=1.0)
p_star, p_m = nash_price_linear(params), monopoly_price_linear(params)
print(f"p* = {p_star:.3f}, p^M = {p_m:.3f}")

# %% payoffs at the monopoly target: deviate > collude > Nash > sucker
q = payoff_quad(params, p_m)
print(q)

# %% threshold rises with ambition
for p_c in np.linspace(p_star, p_m, 6)[1:]:
    print(f"p_c = {p_c:.2f}   delta_bar = {patience_threshold(params, p_c):.4f}")

# %% imperfect monitoring: a deviation is caught only with probability rho
for rho in (1.0, 0.75, 0.5, 0.25, 0.1):
    print(f"rho = {rho:4.2f}   delta_bar = {monitored_threshold(params, p_m, rho):.4f}")

# %% simulation check at a few (delta, rho) cells
# Seller 1 either conforms forever or undercuts once; compare discounted payoffs.
for delta, rho in ((0.4, 1.0), (0.6, 1.0), (0.6, 0.5), (0.8, 0.5), (0.9, 0.2)):
    sc = CollusionScenario(params, p_m, delta, delta)
    mon = MonitoringProfile(1.0, rho)
    stay = grim_trigger_mc_oracle(sc, mon, deviate=False, trials=20_000)
    dev = grim_trigger_mc_oracle(sc, mon, deviate=True, trials=20_000, seed=1)
    sim = "holds" if stay.mean[0] > dev.mean[0] else "breaks"
    theory = "holds" if delta >= monitored_threshold(params, p_m, rho) else "breaks"
    print(f"delta={delta:.1f} rho={rho:.1f}: simulated {sim}, closed form {theory}")
