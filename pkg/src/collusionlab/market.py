"""Multinomial-logit Bertrand market shared by every agent."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters


@dataclass(frozen=True)
class LogitMarketParams:
    a: float = 2.0
    mu: float = 0.25
    a0: float = 0.0
    c: float = 1.0
    n: int = 2

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidParameters(f"mu must be positive, got {self.mu}")
        if not self.c >= 0:
            raise InvalidParameters(f"marginal cost must be nonnegative, got {self.c}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameters(f"seller count must be an integer >= 1, got {self.n}")
        if not all(math.isfinite(v) for v in (self.a, self.mu, self.a0, self.c)):
            raise InvalidParameters("non-finite market parameter")

    @classmethod
    def baseline(cls, n: int = 2) -> "LogitMarketParams":
        return cls(a=2.0, mu=0.25, a0=0.0, c=1.0, n=n)

    @classmethod
    def sanity_check(cls, n: int = 2) -> "LogitMarketParams":
        """Non-default parameters of the one-shot sanity checks."""
        return cls(a=4.0, mu=0.1, a0=1.0, c=3.0, n=n)

    def with_n(self, n: int) -> "LogitMarketParams":
        return LogitMarketParams(self.a, self.mu, self.a0, self.c, n)


@dataclass(frozen=True)
class MarketOutcome:
    quantities: np.ndarray
    profits: np.ndarray
    outside_share: float


def as_price_vector(prices, n: int | None = None) -> np.ndarray:
    """Validate and convert to a float array: finite, nonnegative, length n."""
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1:
        raise InvalidParameters(f"price vector must be one-dimensional, got shape {p.shape}")
    if n is not None and p.shape[0] != n:
        raise InvalidParameters(f"expected {n} prices, got {p.shape[0]}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidParameters(f"prices must be finite and nonnegative: {p.tolist()}")
    return p


def _shares(params: LogitMarketParams, p: np.ndarray) -> tuple[np.ndarray, float]:
    u = np.append((params.a - p) / params.mu, params.a0 / params.mu)
    u = u - u.max()
    e = np.exp(u)
    total = e.sum()
    q = e[:-1] / total
    return q, float(e[-1] / total)


def logit_demand(params: LogitMarketParams, prices) -> np.ndarray:
    p = as_price_vector(prices, params.n)
    return _shares(params, p)[0]


def market_outcome(params: LogitMarketParams, prices) -> MarketOutcome:
    p = as_price_vector(prices, params.n)
    q, outside = _shares(params, p)
    return MarketOutcome(quantities=q, profits=q * (p - params.c), outside_share=outside)


def discounted_value(profit_stream, delta: float) -> float:
    if not 0.0 <= delta < 1.0:
        raise InvalidParameters(f"discount factor {delta} outside [0, 1)")
    stream = np.asarray(profit_stream, dtype=float)
    if stream.size == 0:
        return 0.0
    return float(np.sum(stream * delta ** np.arange(stream.size)))
