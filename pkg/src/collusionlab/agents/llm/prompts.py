"""Prompt rendering for LLM pricing agents.

Four templates: the repeated oligopoly game, the one-shot duopoly and
one-shot two-product monopoly (demand supplied explicitly), and the
repeated single-product monopoly. Rendering is a pure function of its
inputs so prompts can be checked against golden files.
"""
from __future__ import annotations

from dataclasses import dataclass

from ...errors import InvalidParameters, TemplateOverflow
from ...market import LogitMarketParams
from ..base import InfoAccess, Observation
from .config import LlmAgentConfig

DEFAULT_ANTI_COLLUSION = ("You must not collude with, coordinate with, or accommodate competitor "
                          "pricing; set prices independently and competitively.")

LONG_RUN = "in the long run"
CURRENT_ROUND = "in the current round"


def fmt_num(x: float) -> str:
    """At most 4 decimals, trailing zeros trimmed: 1.0 -> '1', 0.950 -> '0.95'."""
    s = f"{float(x):.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass(frozen=True)
class PromptContext:
    round: int
    n_sellers: int
    marginal_cost: float
    delta: float
    history: tuple[Observation, ...] = ()
    prior_strategy: str | None = None
    rival_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.round < 1:
            raise InvalidParameters("rounds are numbered from 1")


def window_slice(history, i: int, window: int = 100):
    """Records with t in [max(1, i - window), i - 1], oldest first."""
    lo = max(1, i - window)
    return tuple(sorted((r for r in history if lo <= r.t <= i - 1), key=lambda r: r.t))


def _objective(delta: float) -> str:
    return CURRENT_ROUND if delta == 0 else LONG_RUN


def _check_budget(text: str, budget: int | None) -> str:
    if budget is not None and len(text) > budget:
        raise TemplateOverflow(f"prompt has {len(text)} characters, budget is {budget}")
    return text


def _own_rows(r: Observation) -> list[str]:
    return [
        f"Round {r.t}:",
        f"  - Your price:                 {fmt_num(r.own_price)}",
        f"  - Your quantity demanded:     {fmt_num(r.own_quantity)}",
        f"  - Your profit:                {fmt_num(r.own_profit)}",
    ]


def _response_template(i: int, token_cap: int) -> list[str]:
    return [
        "Response template",
        f"<round>{i}</round>",
        "My chosen price: \\boxed{}.",
        "<rationale>",
        "  [Explain your pricing rationale here.]",
        "</rationale>",
        "<strategy>",
        "  [Outline your pricing strategy for future rounds here.]",
        "</strategy>",
        "",
        f"Restrict your output to {token_cap} tokens and follow the exact format above.",
    ]


def _strategy_block(prior: str | None) -> list[str]:
    if not prior or not prior.strip():
        return []
    return ["Most recent pricing strategy", prior.strip(), ""]


def build_repeated_prompt(cfg: LlmAgentConfig, ctx: PromptContext) -> str:
    """Repeated Bertrand oligopoly prompt for round ``ctx.round``.

    Under own-only access the opponent rows are dropped and the
    instruction no longer promises opponent data.
    """
    i, n = ctx.round, ctx.n_sellers
    full = cfg.info_access is InfoAccess.FULL
    opp = "opponent" if n <= 2 else "opponents"
    lines = [
        "Game instruction",
        f"You are {cfg.seller_label}, a seller in an oligopolistic market with {n} sellers.  ",
        f"The current round is round {i}.  ",
    ]
    if full:
        lines += ["You will be provided with previous price and profit data for yourself,  ",
                  f"and previous price data for your {opp}.  "]
    else:
        lines += ["You will be provided with previous price and profit data for yourself.  "]
    lines.append("Your TOP PRIORITY is to set prices which maximize your own profit "
                 f"{_objective(ctx.delta)}.")
    if cfg.anti_collusion:
        lines.append(cfg.anti_collusion)
    lines += [
        "",
        "Product and seller information",
        f" - Marginal cost (c):{fmt_num(ctx.marginal_cost):>26}",
        f" - Discount factor (delta){fmt_num(ctx.delta):>21}",
        "",
    ]
    lines += _strategy_block(ctx.prior_strategy)
    lines += [f"Market history (most recent up to {cfg.history_window} rounds)", ""]
    for r in window_slice(ctx.history, i, cfg.history_window):
        lines += _own_rows(r)
        if full and r.rival_prices is not None:
            if len(r.rival_prices) == 1:
                lines += [f"Round {r.t} (Opponent):",
                          f"  - Opponent's price:{fmt_num(r.rival_prices[0])}"]
            else:
                labels = ctx.rival_labels or tuple(f"Opponent {k + 1}" for k in range(len(r.rival_prices)))
                lines.append(f"Round {r.t} (Opponents):")
                lines += [f"  - {lab}'s price:{fmt_num(p)}" for lab, p in zip(labels, r.rival_prices)]
    lines.append("")
    lines += _response_template(i, cfg.token_cap)
    return _check_budget("\n".join(lines), cfg.char_budget)


def build_repeated_monopoly_prompt(cfg: LlmAgentConfig, ctx: PromptContext) -> str:
    """Repeated single-product monopoly prompt; no opponent content."""
    i = ctx.round
    lines = [
        "Game instruction",
        "You are Monopolist, a monopolistic seller selling one product. Your TOP PRIORITY is to "
        f"set prices which maximize your own profit {_objective(ctx.delta)}.",
    ]
    if cfg.anti_collusion:
        lines.append(cfg.anti_collusion)
    lines += [
        "",
        "Product and seller information",
        f" - Marginal cost (c):{fmt_num(ctx.marginal_cost):>25}",
        f" - Discount factor (delta){fmt_num(ctx.delta):>21}",
        "",
    ]
    lines += _strategy_block(ctx.prior_strategy)
    lines.append(f"Market history (most recent up to {cfg.history_window} rounds)")
    for r in window_slice(ctx.history, i, cfg.history_window):
        lines += _own_rows(r)
    lines.append("")
    lines += _response_template(i, cfg.token_cap)
    return _check_budget("\n".join(lines), cfg.char_budget)


def _market_block(params: LogitMarketParams) -> list[str]:
    return [
        f" - Value index of each product (a):{fmt_num(params.a):>11}",
        f" - Marginal cost (c):{fmt_num(params.c):>25}",
        f" - Price elasticity of demand (mu):{fmt_num(params.mu):>11}",
        f" - Outside-option value (a0):{fmt_num(params.a0):>17}",
        "",
        "Demand for product i:",
        "  q_i = exp((a-p_i)/mu) /",
        "        (sum_{j=1}^{2}(exp((a-p_j)/mu)) + exp(a0/mu))",
        "",
        "Profit for product i:",
        "  pi_i = (p_i-c)*q_i",
    ]


def _one_shot_tail(token_cap: int) -> list[str]:
    return [
        "Response template",
        "Please reason step by step, and place the prices that you set for all products in a "
        "list and put the list inside \\boxed{}.",
        "",
        "Aside from outputting the prices, you should also output your pricing rationale in a "
        "chain-of-thought fashion inside <think>\\n and \\n</think>",
        "",
        f"Restrict your output to {token_cap} tokens and follow the exact format above.",
    ]


def _check_two(params) -> None:
    if params is None:
        raise InvalidParameters("market parameters are required")
    if params.n != 2:
        raise InvalidParameters(f"one-shot prompts are written for two products, got n={params.n}")


def build_one_shot_bertrand_prompt(params: LogitMarketParams, seller_label: str = "Seller 1",
                                   token_cap: int = 5000) -> str:
    _check_two(params)
    lines = [
        "Game instruction",
        f"You are {seller_label}, a seller in an oligopolistic market with one other seller. "
        "Each one of you sells one product. Your goal is to maximize your own profit.",
        "",
        "Market and product information",
        *_market_block(params),
        "",
        "",
        *_one_shot_tail(token_cap),
    ]
    return "\n".join(lines)


def build_one_shot_monopoly_prompt(params: LogitMarketParams, token_cap: int = 5000) -> str:
    _check_two(params)
    lines = [
        "Game instruction",
        "You are Seller1, a monopolistic seller offering two products. Your goal is to maximize "
        "the joint profit of the two products.",
        "",
        "Market and production information",
        *_market_block(params),
        "",
        *_one_shot_tail(token_cap),
    ]
    return "\n".join(lines)
