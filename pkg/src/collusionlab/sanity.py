"""Single-agent checks that a model can price at all before it is paired.

The one-shot checks hand the model the demand system explicitly and count
a reply as correct when every listed price is within 5% of the relevant
optimum. The repeated check lets one agent price a single product alone
for a fixed number of periods.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agents.llm.agent import LlmAgent
from .agents.llm.backends import query
from .agents.llm.config import LlmAgentConfig
from .agents.llm.prompts import build_one_shot_bertrand_prompt, build_one_shot_monopoly_prompt
from .engine import AgentSpec, ConvergenceRule, ExperimentSpec, run
from .equilibrium import monopoly_logit, nash_logit
from .errors import AgentFailure
from .market import LogitMarketParams

CORRECT_TOL = 0.05


@dataclass(frozen=True)
class OneShotResult:
    trials: int
    valid: int
    correct: int
    target: float
    prices: tuple[tuple[float, ...], ...]

    @property
    def valid_rate(self) -> float:
        return self.valid / self.trials

    @property
    def correct_rate(self) -> float:
        return self.correct / self.trials


def one_shot_check(backend, params: LogitMarketParams = LogitMarketParams.sanity_check(),
                   monopoly: bool = False, trials: int = 10, max_retries: int = 0,
                   token_cap: int = 5000) -> OneShotResult:
    if monopoly:
        prompt = build_one_shot_monopoly_prompt(params, token_cap)
        target = monopoly_logit(params).price
    else:
        prompt = build_one_shot_bertrand_prompt(params, token_cap=token_cap)
        target = nash_logit(params).price
    valid = correct = 0
    seen = []
    for _ in range(trials):
        try:
            res = query(backend, prompt, max_retries, token_cap)
        except AgentFailure:
            continue
        valid += 1
        ps = res.parsed.prices
        seen.append(ps)
        if all(abs(p - target) <= CORRECT_TOL * target for p in ps):
            correct += 1
    return OneShotResult(trials, valid, correct, target, tuple(seen))


def repeated_monopoly_check(cfg: LlmAgentConfig, backend=None, periods: int = 300,
                            params: LogitMarketParams = LogitMarketParams.baseline(1), seed: int = 0):
    """Run one LLM monopolist for ``periods`` periods; returns (log, summary, p^M)."""
    spec = ExperimentSpec(
        market=params.with_n(1),
        agents=[AgentSpec(lambda rng: LlmAgent(cfg, params.c, backend=backend, monopoly=True),
                          label="Monopolist")],
        max_periods=periods, convergence=ConvergenceRule(), seed=seed,
        stop_on_convergence=False, p_competitive=monopoly_logit(params.with_n(1)).price)
    log, summary = run(spec)
    return log, summary, spec.p_competitive


def settle_period(prices, tol: float = 0.01) -> int | None:
    """First period after which every price stays within ``tol`` of the last."""
    p = np.asarray(prices, dtype=float)
    off = np.nonzero(np.abs(p - p[-1]) > tol * abs(p[-1]))[0]
    if len(off) == 0:
        return 1
    k = int(off[-1]) + 2
    return k if k <= len(p) else None
