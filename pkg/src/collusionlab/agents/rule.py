"""Rule-based reference agents: grim trigger, constant price, scripted."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidParameters, ScriptExhausted
from .base import Agent, Decision, HistoryView

DEVIATION_TOL = 1e-9


@dataclass(frozen=True)
class GrimTriggerConfig:
    p_collusive: float
    p_competitive: float
    rho_detect: float = 1.0

    def __post_init__(self):
        if not self.p_competitive < self.p_collusive:
            raise InvalidParameters("p_competitive must be below p_collusive")
        if not 0.0 <= self.rho_detect <= 1.0:
            raise InvalidParameters("rho_detect outside [0, 1]")


class PublicSignal:
    """Shared good/bad signal stream for a pairing of grim-trigger sellers.

    A seller pricing away from ``p_collusive`` turns the signal bad with the
    probability that its rival detects it; the draw for period t is made
    once and every subscriber reads the same value.
    """

    def __init__(self, p_collusive: float, detect_by_seller, rng: np.random.Generator):
        self.p_collusive = p_collusive
        # detect_by_seller[k]: probability that a deviation BY seller k is caught
        self.detect = np.asarray(detect_by_seller, dtype=float)
        self.rng = rng
        self._signals: dict[int, str] = {}

    def signal(self, t: int, prices) -> str:
        if t not in self._signals:
            draws = self.rng.random(len(self.detect))
            off = np.abs(np.asarray(prices, dtype=float) - self.p_collusive) > DEVIATION_TOL
            self._signals[t] = "B" if np.any(off & (draws < self.detect)) else "G"
        return self._signals[t]


def grim_trigger_act(cfg: GrimTriggerConfig, triggered: bool, last_own: float | None,
                     last_rivals, rng: np.random.Generator) -> tuple[float, bool]:
    """One grim-trigger decision from the previous period's prices.

    Returns ``(price, triggered)``. Without history (t = 0) the collusive
    price is played. A rival deviation flips the absorbing trigger with
    probability ``rho_detect``; at rho = 1 no random draw is consumed.
    """
    if not triggered and last_rivals is not None:
        rivals_off = any(abs(p - cfg.p_collusive) > DEVIATION_TOL for p in last_rivals)
        own_off = last_own is not None and abs(last_own - cfg.p_collusive) > DEVIATION_TOL
        if own_off:
            triggered = True
        elif rivals_off:
            triggered = cfg.rho_detect >= 1.0 or rng.random() < cfg.rho_detect
    return (cfg.p_competitive if triggered else cfg.p_collusive), triggered


class GrimTriggerAgent(Agent):
    def __init__(self, cfg: GrimTriggerConfig, rng: np.random.Generator | None = None,
                 signal: PublicSignal | None = None, label: str = "grim"):
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.signal = signal
        self.label = label
        self.triggered = False

    def decide(self, view: HistoryView) -> Decision:
        if view.records:
            last = view.records[-1]
            if self.signal is not None:
                prices = list(last.rival_prices or ())
                prices.insert(view.seller, last.own_price)
                if self.signal.signal(last.t, prices) == "B":
                    self.triggered = True
            else:
                _, self.triggered = grim_trigger_act(self.cfg, self.triggered, last.own_price,
                                                     last.rival_prices, self.rng)
        price = self.cfg.p_competitive if self.triggered else self.cfg.p_collusive
        return Decision(price=price, info={"triggered": self.triggered})


class ConstantAgent(Agent):
    def __init__(self, price: float, label: str = "constant"):
        if not price > 0:
            raise InvalidParameters("price must be positive")
        self.price = float(price)
        self.label = label

    def decide(self, view: HistoryView) -> Decision:
        return Decision(price=self.price)


@dataclass(frozen=True)
class ScriptedAgent:
    trajectory: tuple[float, ...]
    hold_last: bool = True

    def __post_init__(self):
        if not self.trajectory:
            raise InvalidParameters("trajectory must be nonempty")
        if any(not p > 0 for p in self.trajectory):
            raise InvalidParameters("scripted prices must be positive")


def scripted_act(agent: ScriptedAgent, t: int) -> float:
    """Price at 0-based index t."""
    if t < 0:
        raise InvalidParameters("t must be nonnegative")
    if t < len(agent.trajectory):
        return agent.trajectory[t]
    if agent.hold_last:
        return agent.trajectory[-1]
    raise ScriptExhausted(f"script of length {len(agent.trajectory)} has no period {t}")


class ScriptedPriceAgent(Agent):
    """Engine adapter around :class:`ScriptedAgent` (period t uses index t-1)."""

    def __init__(self, script: ScriptedAgent, label: str = "scripted"):
        self.script = script
        self.label = label

    def decide(self, view: HistoryView) -> Decision:
        return Decision(price=scripted_act(self.script, view.t - 1))


def expand_segments(segments) -> tuple[float, ...]:
    """Expand ``[[value_or_cycle, repeat], ...]`` into a flat trajectory.

    ``[1.8, 3]`` gives three periods at 1.8; ``[[2.5, 2.0], 2]`` gives the
    cycle twice, i.e. 2.5, 2.0, 2.5, 2.0.
    """
    out: list[float] = []
    for item in segments:
        if isinstance(item, (int, float)):
            out.append(float(item))
            continue
        value, repeat = item
        cycle = value if isinstance(value, (list, tuple)) else [value]
        out.extend(float(v) for _ in range(int(repeat)) for v in cycle)
    return tuple(out)
