"""Two-seller linear-demand theory of grim-trigger collusion.

Closed-form payoffs, the static Nash and joint-monopoly prices, the
patience threshold under perfect monitoring, and its generalisation to
stochastic detection of deviations. A Monte-Carlo simulation of the
grim-trigger game is provided as an independent check of the thresholds.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMonitoringWarning, InvalidParameters, OutOfRangeTarget

# slack used only when p_c sits at the p* boundary, where the ordering degenerates
ORDER_SLACK = 1e-12


@dataclass(frozen=True)
class LinearMarketParams:
    a: float
    b: float
    d: float
    c: float

    def __post_init__(self):
        vals = (self.a, self.b, self.d, self.c)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameters(f"non-finite parameters: {vals}")
        if not self.b > self.d > 0:
            raise InvalidParameters(f"need b > d > 0, got b={self.b}, d={self.d}")
        if not self.a > self.c * (self.b - self.d):
            raise InvalidParameters("need a > c(b - d)")
        if not self.c < self.a / self.b:
            raise InvalidParameters("need c < a/b")


@dataclass(frozen=True)
class PayoffQuad:
    """Per-period payoffs of the seller whose perspective is taken.

    ``pi_dev``: undercut to p* while the rival holds p_c.
    ``pi_c``: both at p_c.  ``pi_star``: both at p*.
    ``pi_sucker``: hold p_c while the rival undercuts to p*.
    """

    pi_dev: float
    pi_c: float
    pi_star: float
    pi_sucker: float

    def is_ordered(self, slack: float = 0.0) -> bool:
        return (self.pi_dev > self.pi_c - slack
                and self.pi_c > self.pi_star - slack
                and self.pi_star > self.pi_sucker - slack)


@dataclass(frozen=True)
class MonitoringProfile:
    """Detection probabilities: ``rho_1`` is seller 1's chance of catching a
    deviation by seller 2, and vice versa."""

    rho_1: float = 1.0
    rho_2: float = 1.0

    def __post_init__(self):
        for r in (self.rho_1, self.rho_2):
            if not 0.0 <= r <= 1.0:
                raise InvalidParameters(f"detection probability {r} outside [0, 1]")


@dataclass(frozen=True)
class CollusionScenario:
    params: LinearMarketParams
    p_c: float
    delta_1: float
    delta_2: float

    def __post_init__(self):
        check_target(self.params, self.p_c)
        for dl in (self.delta_1, self.delta_2):
            if not 0.0 <= dl < 1.0:
                raise InvalidParameters(f"discount factor {dl} outside [0, 1)")


def linear_demand(params: LinearMarketParams, own_price, rival_price):
    """Quantity a - b*own + d*rival. Can be negative; callers decide."""
    return params.a - params.b * own_price + params.d * rival_price


def linear_profit(params: LinearMarketParams, own_price, rival_price):
    return (own_price - params.c) * linear_demand(params, own_price, rival_price)


def nash_price_linear(params: LinearMarketParams) -> float:
    return (params.a + params.b * params.c) / (2 * params.b - params.d)


def monopoly_price_linear(params: LinearMarketParams) -> float:
    # first-order condition of (p - c)(a - (b - d)p)
    s = params.b - params.d
    return (params.a + s * params.c) / (2 * s)


def check_target(params: LinearMarketParams, p_c: float) -> None:
    p_star = nash_price_linear(params)
    p_m = monopoly_price_linear(params)
    if not p_star < p_c <= p_m:
        raise OutOfRangeTarget(f"p_c={p_c} outside ({p_star}, {p_m}]")


def payoff_quad(params: LinearMarketParams, p_c: float) -> PayoffQuad:
    check_target(params, p_c)
    p_star = nash_price_linear(params)
    quad = PayoffQuad(
        pi_dev=linear_profit(params, p_star, p_c),
        pi_c=linear_profit(params, p_c, p_c),
        pi_star=linear_profit(params, p_star, p_star),
        pi_sucker=linear_profit(params, p_c, p_star),
    )
    if not quad.is_ordered(slack=ORDER_SLACK):
        # unreachable for valid params; kept as a guard against silent misuse
        raise AssertionError(f"payoff ordering violated: {quad}")
    return quad


def patience_threshold(params: LinearMarketParams, p_c: float) -> float:
    """Smallest common discount factor that sustains grim-trigger collusion at
    ``p_c`` under perfect monitoring."""
    q = payoff_quad(params, p_c)
    return (q.pi_dev - q.pi_c) / (q.pi_dev - q.pi_star)


def monitored_threshold(params: LinearMarketParams, p_c: float, rho_rival: float) -> float:
    """Patience threshold when the rival detects a deviation with probability
    ``rho_rival``.

    At ``rho_rival == 0`` a deviation is never punished, the threshold is 1
    and a :class:`DegenerateMonitoringWarning` is emitted.
    """
    if not 0.0 <= rho_rival <= 1.0:
        raise InvalidParameters(f"detection probability {rho_rival} outside [0, 1]")
    q = payoff_quad(params, p_c)
    if rho_rival == 0.0:
        warnings.warn("rho = 0: collusion unsustainable for any delta < 1",
                      DegenerateMonitoringWarning, stacklevel=2)
        return 1.0
    gain = q.pi_dev - q.pi_c
    return gain / (gain + rho_rival * (q.pi_c - q.pi_star))


def default_horizon(delta: float, bound: float = 1e-6) -> int:
    """Smallest T with delta**T < bound; the neglected tail of a payoff stream
    bounded by M is then below M * bound / (1 - delta)."""
    if delta <= 0.0:
        return 1
    return int(math.floor(math.log(bound) / math.log(delta))) + 1


@dataclass(frozen=True)
class OracleEstimate:
    """Monte-Carlo estimate of each seller's discounted payoff."""

    mean: tuple[float, float]
    stderr: tuple[float, float]
    horizon: int
    trials: int


def grim_trigger_mc_oracle(scenario: CollusionScenario, rho: MonitoringProfile,
                           deviate: bool, horizon: int | None = None,
                           trials: int = 10_000, seed: int = 0) -> OracleEstimate:
    """Simulate two grim-trigger sellers on the linear market.

    Seller 1 (index 0) optionally deviates to p* in period 0 and conforms
    afterwards. Each period in which a seller prices away from p_c while the
    cartel is intact, the public signal turns bad with the rival's detection
    probability; a bad signal sends both sellers to p* forever from the next
    period. Payoffs are truncated at ``horizon`` (default: delta**T < 1e-6
    for the more patient seller).
    """
    if trials < 1:
        raise InvalidParameters("trials must be >= 1")
    params, p_c = scenario.params, scenario.p_c
    p_star = nash_price_linear(params)
    deltas = np.array([scenario.delta_1, scenario.delta_2])
    if horizon is None:
        horizon = default_horizon(float(deltas.max()))
    detect = np.array([rho.rho_2, rho.rho_1])  # prob. a deviation by seller k is caught

    rng = np.random.default_rng(seed)
    punished = np.zeros(trials, dtype=bool)
    totals = np.zeros((2, trials))
    weight = np.ones(2)
    for t in range(horizon):
        p1 = np.where(punished, p_star, p_star if (deviate and t == 0) else p_c)
        p2 = np.where(punished, p_star, p_c)
        totals[0] += weight[0] * linear_profit(params, p1, p2)
        totals[1] += weight[1] * linear_profit(params, p2, p1)
        weight = weight * deltas

        draws = rng.random((2, trials))
        off_path = np.stack([np.abs(p1 - p_c) > 1e-12, np.abs(p2 - p_c) > 1e-12])
        bad = (~punished) & np.any(off_path & (draws < detect[:, None]), axis=0)
        punished = punished | bad

    mean = totals.mean(axis=1)
    se = totals.std(axis=1, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(2)
    return OracleEstimate(mean=(float(mean[0]), float(mean[1])),
                          stderr=(float(se[0]), float(se[1])),
                          horizon=horizon, trials=trials)


def deviation_value(params: LinearMarketParams, p_c: float, delta: float, rho_rival: float) -> float:
    """Expected discounted payoff of a one-shot deviation followed by
    conformity, with punishment only if the rival detects it."""
    q = payoff_quad(params, p_c)
    return q.pi_dev + delta / (1 - delta) * (rho_rival * q.pi_star + (1 - rho_rival) * q.pi_c)


def collusion_value(params: LinearMarketParams, p_c: float, delta: float) -> float:
    return linear_profit(params, p_c, p_c) / (1 - delta)
