"""What an agent sees and what it returns each period."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class InfoAccess(str, Enum):
    FULL = "full"
    OWN_ONLY = "own_only"


@dataclass(frozen=True)
class Observation:
    """One past period from a single seller's point of view.

    ``rival_prices`` is None when the seller has no access to rival data.
    """

    t: int
    own_price: float
    own_quantity: float
    own_profit: float
    rival_prices: tuple[float, ...] | None = None


@dataclass(frozen=True)
class HistoryView:
    """Everything an agent may condition on when choosing the price of
    period ``t`` (1-based): observations of periods 1 .. t-1 only."""

    t: int
    seller: int
    n_sellers: int
    records: tuple[Observation, ...] = ()


@dataclass
class Decision:
    price: float
    prompt: str | None = None
    response: str | None = None
    info: dict = field(default_factory=dict)


class Agent:
    """Base class. Subclasses implement :meth:`decide`; :meth:`observe` is
    called with the agent's own view of each finished period."""

    label: str = "agent"
    info_access: InfoAccess = InfoAccess.FULL
    deterministic: bool = True

    def decide(self, view: HistoryView) -> Decision:
        raise NotImplementedError

    def observe(self, obs: Observation) -> None:
        pass
