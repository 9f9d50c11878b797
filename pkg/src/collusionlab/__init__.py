"""Simulation toolkit for tacit collusion among pricing agents.

Linear-duopoly collusion thresholds, a multinomial-logit Bertrand market,
Q-learning, LLM and rule-based sellers, and an experiment engine.
"""
__version__ = "0.1.0"

from .engine import ConvergenceRule, ExperimentSpec, check_convergence, run, run_condition
from .equilibrium import benchmarks, monopoly_logit, nash_logit
from .market import LogitMarketParams, logit_demand, market_outcome
from .metrics import price_elevation, summarize_condition, welch_t_one_sided
