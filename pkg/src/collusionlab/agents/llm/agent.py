from __future__ import annotations

from ..base import Agent, Decision, HistoryView, InfoAccess, Observation
from .backends import make_backend, query
from .config import LlmAgentConfig
from .parsing import ParsedResponse
from .prompts import PromptContext, build_repeated_monopoly_prompt, build_repeated_prompt, window_slice


class LlmAgent(Agent):
    """Prompts a chat model each period with its own history and the
    strategy text it declared in the previous round."""

    def __init__(self, cfg: LlmAgentConfig, marginal_cost: float, backend=None,
                 rival_labels: tuple[str, ...] = (), monopoly: bool = False):
        self.cfg = cfg
        self.label = cfg.seller_label
        self.info_access = cfg.info_access
        self.marginal_cost = marginal_cost
        self.backend = backend if backend is not None else make_backend(cfg.backend)
        self.deterministic = getattr(self.backend, "deterministic", False)
        self.rival_labels = rival_labels
        self.monopoly = monopoly
        self.prior_strategy: str | None = None
        self.last_exchange = None

    def context(self, view: HistoryView) -> PromptContext:
        records = window_slice(view.records, view.t, self.cfg.history_window)
        if self.cfg.info_access is InfoAccess.OWN_ONLY:
            records = tuple(Observation(r.t, r.own_price, r.own_quantity, r.own_profit, None)
                            for r in records)
        return PromptContext(round=view.t, n_sellers=view.n_sellers,
                             marginal_cost=self.marginal_cost, delta=self.cfg.delta,
                             history=records, prior_strategy=self.prior_strategy,
                             rival_labels=self.rival_labels)

    def decide_price(self, view: HistoryView) -> tuple[float, ParsedResponse]:
        """Render, query and parse; the returned strategy text is kept for
        the next round's prompt."""
        ctx = self.context(view)
        build = build_repeated_monopoly_prompt if self.monopoly else build_repeated_prompt
        prompt = build(self.cfg, ctx)
        res = query(self.backend, prompt, self.cfg.backend.max_retries, self.cfg.token_cap,
                    expected_round=view.t, backoff=self.cfg.backend.backoff)
        parsed = res.parsed
        if parsed.strategy:
            self.prior_strategy = parsed.strategy
        self.last_exchange = (prompt, res)
        return parsed.price, parsed

    def decide(self, view: HistoryView) -> Decision:
        price, parsed = self.decide_price(view)
        prompt, res = self.last_exchange
        return Decision(price=price, prompt=prompt, response=res.text,
                        info={"attempts": res.attempts, "rejected": res.rejected,
                              "round_echo": parsed.round_echo})
