"""Tabular Q-learning pricing agents.

The state is the previous period's (own, rival) price-index pair on a
discrete grid, exploration is epsilon-greedy with epsilon = exp(-beta t),
and two learners are pretrained in self-play until every greedy action
has been stable for a given number of consecutive periods.
"""
from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import InvalidParameters
from ..equilibrium import nash_logit
from ..market import LogitMarketParams, market_outcome
from .base import Agent, Decision, HistoryView, Observation

TABLE_MAGIC = b"CLQT"
TABLE_VERSION = 1


class QMode(str, Enum):
    FROZEN = "frozen"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class PriceGrid:
    points: tuple[float, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size < 2:
            raise InvalidParameters("price grid needs at least two points")
        if not np.all(np.diff(pts) > 0):
            raise InvalidParameters("price grid must be strictly increasing")

    @classmethod
    def around(cls, p_competitive: float, p_monopoly: float, m: int = 15, xi: float = 0.1):
        """m equispaced points on [p^C - xi*gap, p^M + xi*gap], gap = p^M - p^C."""
        gap = p_monopoly - p_competitive
        return cls(tuple(np.linspace(p_competitive - xi * gap, p_monopoly + xi * gap, m).tolist()))

    @property
    def m(self) -> int:
        return len(self.points)

    def nearest(self, price: float) -> int:
        return int(np.argmin(np.abs(np.asarray(self.points) - price)))


@dataclass(frozen=True)
class QParams:
    grid: PriceGrid
    alpha: float = 0.15
    beta: float = 0.004
    delta: float = 0.95

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidParameters("alpha must lie in (0, 1]")
        if not self.beta > 0:
            raise InvalidParameters("beta must be positive")
        if not 0.0 <= self.delta < 1.0:
            raise InvalidParameters("delta must lie in [0, 1)")


def epsilon(t: int, beta: float) -> float:
    if t < 0:
        raise InvalidParameters("t must be nonnegative")
    return math.exp(-t * beta)


def select_action(table: np.ndarray, state, eps: float, rng: np.random.Generator) -> int:
    """Greedy with probability 1 - eps, uniform otherwise. Ties go to the
    lowest index. Exactly one uniform draw is consumed, plus one integer
    draw when exploring."""
    row = table[state]
    if rng.random() < eps:
        return int(rng.integers(row.shape[-1]))
    return int(np.argmax(row))


def q_update(table: np.ndarray, state, action: int, reward: float, next_state, params: QParams) -> float:
    """Q(s,a) <- (1-alpha) Q(s,a) + alpha (reward + delta max_a' Q(s',a')), in place."""
    row = table[state]
    target = reward + params.delta * float(np.max(table[next_state]))
    row[action] = (1 - params.alpha) * row[action] + params.alpha * target
    return float(row[action])


def profit_matrix(market: LogitMarketParams, grid: PriceGrid) -> np.ndarray:
    """profits[i, j] = profit of a seller pricing grid[i] against grid[j]."""
    if market.n != 2:
        raise InvalidParameters("Q-learning agents are defined for two sellers")
    m = grid.m
    out = np.empty((m, m))
    for i, pi in enumerate(grid.points):
        for j, pj in enumerate(grid.points):
            out[i, j] = market_outcome(market, [pi, pj]).profits[0]
    return out


def initial_table(params: QParams, profits: np.ndarray, init: str = "uniform_rival") -> np.ndarray:
    """Dense (m, m, m) table indexed [own_prev, rival_prev, action].

    ``uniform_rival``: every state starts at the discounted payoff of the
    action against a uniformly randomising rival. ``zero``: all zeros.
    """
    m = params.grid.m
    if init == "zero":
        return np.zeros((m, m, m))
    if init != "uniform_rival":
        raise InvalidParameters(f"unknown table initialisation {init!r}")
    row = profits.mean(axis=1) / (1 - params.delta)
    return np.broadcast_to(row, (m, m, m)).copy()


def act(table: np.ndarray, mode: QMode, state, t: int, params: QParams,
        rng: np.random.Generator) -> int:
    """Frozen: greedy, no exploration. Adaptive: epsilon-greedy on clock t."""
    if QMode(mode) is QMode.FROZEN:
        return int(np.argmax(table[state]))
    return select_action(table, state, epsilon(t, params.beta), rng)


@dataclass
class PretrainResult:
    tables: np.ndarray          # shape (2, m, m, m)
    periods: int
    converged: bool
    final_state: tuple[int, int]  # (seller 0 index, seller 1 index) of the last period
    params: QParams
    seed: int
    stability_window: int
    cap: int
    explorations: tuple[int, int] = (0, 0)
    meta: dict = field(default_factory=dict)

    def greedy_cycle(self, max_periods: int = 10_000):
        return greedy_cycle(self.tables, self.final_state, max_periods)

    def greedy_price(self) -> float:
        """Average price over the greedy self-play cycle reached from the
        final state."""
        cycle = self.greedy_cycle()
        pts = np.asarray(self.params.grid.points)
        return float(np.mean([pts[list(s)].mean() for s in cycle]))


def greedy_cycle(tables: np.ndarray, start: tuple[int, int], max_periods: int = 10_000):
    """Joint index pairs visited repeatedly under pure greedy self-play."""
    seen: dict[tuple[int, int], int] = {}
    path = []
    s = tuple(start)
    for k in range(max_periods):
        if s in seen:
            return path[seen[s]:]
        seen[s] = k
        path.append(s)
        s = (int(np.argmax(tables[0][s[0], s[1]])), int(np.argmax(tables[1][s[1], s[0]])))
    return path


def pretrain(params: QParams, market: LogitMarketParams, stability_window: int = 10_000,
             cap: int = 5_000_000, seed: int = 0, init: str = "uniform_rival",
             initial_price: float | None = None) -> PretrainResult:
    """Self-play of two Q-learners until every greedy action of both agents
    has been unchanged for ``stability_window`` consecutive periods, or
    ``cap`` periods have elapsed (``converged=False``).

    ``initial_price`` sets both sellers' period -1 price (snapped to the
    grid); by default the static Nash price is used.
    """
    if stability_window < 1:
        raise InvalidParameters("stability_window must be >= 1")
    if cap < stability_window:
        raise InvalidParameters("cap must be >= stability_window")
    grid = params.grid
    profits = profit_matrix(market, grid)
    tables = np.stack([initial_table(params, profits, init), initial_table(params, profits, init)])
    greedy = tables.argmax(axis=3)
    rng = np.random.default_rng(seed)
    if initial_price is None:
        initial_price = nash_logit(market).price
    s0 = grid.nearest(initial_price)
    own, riv = s0, s0  # seller 0's and seller 1's previous indices
    m = grid.m
    alpha, delta, beta = params.alpha, params.delta, params.beta
    stable = 0
    explored = [0, 0]
    t = 0
    for t in range(cap):
        eps = math.exp(-beta * t)
        acts = []
        for i, (a_own, a_riv) in enumerate(((own, riv), (riv, own))):
            if rng.random() < eps:
                acts.append(int(rng.integers(m)))
                explored[i] += 1
            else:
                acts.append(int(greedy[i, a_own, a_riv]))
        a0, a1 = acts
        changed = False
        for i, (so, sr, a, no, nr) in enumerate(((own, riv, a0, a0, a1), (riv, own, a1, a1, a0))):
            q = tables[i]
            row = q[so, sr]
            row[a] = (1 - alpha) * row[a] + alpha * (profits[a, nr] + delta * q[no, nr].max())
            g = int(row.argmax())
            if g != greedy[i, so, sr]:
                greedy[i, so, sr] = g
                changed = True
        own, riv = a0, a1
        stable = 0 if changed else stable + 1
        if stable >= stability_window:
            break
    return PretrainResult(tables=tables, periods=t + 1, converged=stable >= stability_window,
                          final_state=(own, riv), params=params, seed=seed,
                          stability_window=stability_window, cap=cap,
                          explorations=(explored[0], explored[1]))


def save_tables(result: PretrainResult, path) -> None:
    """Write the versioned binary table file: magic, version, JSON header
    length, JSON header, then float64 little-endian values in row-major
    order with shape (2, m, m, m)."""
    header = {
        "grid": list(result.params.grid.points),
        "alpha": result.params.alpha, "beta": result.params.beta, "delta": result.params.delta,
        "seed": result.seed, "periods": result.periods, "converged": result.converged,
        "stability_window": result.stability_window, "cap": result.cap,
        "final_state": list(result.final_state), "explorations": list(result.explorations),
        "shape": list(result.tables.shape), "meta": result.meta,
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(TABLE_MAGIC)
    buf.write(struct.pack("<HI", TABLE_VERSION, len(raw)))
    buf.write(raw)
    buf.write(np.ascontiguousarray(result.tables, dtype="<f8").tobytes())
    Path(path).write_bytes(buf.getvalue())


def load_tables(path) -> PretrainResult:
    data = Path(path).read_bytes()
    if data[:4] != TABLE_MAGIC:
        raise InvalidParameters(f"{path} is not a Q-table file")
    version, hlen = struct.unpack("<HI", data[4:10])
    if version != TABLE_VERSION:
        raise InvalidParameters(f"unsupported Q-table file version {version}")
    header = json.loads(data[10:10 + hlen].decode("utf-8"))
    tables = np.frombuffer(data[10 + hlen:], dtype="<f8").reshape(header["shape"]).astype(float)
    params = QParams(grid=PriceGrid(tuple(header["grid"])), alpha=header["alpha"],
                     beta=header["beta"], delta=header["delta"])
    return PretrainResult(tables=tables, periods=header["periods"], converged=header["converged"],
                          final_state=tuple(header["final_state"]), params=params,
                          seed=header["seed"], stability_window=header["stability_window"],
                          cap=header["cap"], explorations=tuple(header["explorations"]),
                          meta=header.get("meta", {}))


class QLearningAgent(Agent):
    """A pretrained Q-learner playing in the engine.

    Rival prices off the grid are snapped to the nearest point to build the
    state; the market still sees the rival's true price. In adaptive mode
    the exploration clock restarts at pairing onset unless
    ``continue_clock_from`` gives the pretraining period count.
    """

    def __init__(self, table: np.ndarray, params: QParams, mode: QMode = QMode.FROZEN,
                 rng: np.random.Generator | None = None, initial_price: float | None = None,
                 continue_clock_from: int = 0, label: str = "Q-learner"):
        self.table = np.array(table, dtype=float)
        self.params = params
        self.mode = QMode(mode)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.clock0 = continue_clock_from
        self.label = label
        self.deterministic = self.mode is QMode.FROZEN
        grid = params.grid
        s0 = grid.nearest(initial_price) if initial_price is not None else grid.m // 2
        self.state = (s0, s0)
        self.steps = 0
        self.last_action: int | None = None

    def decide(self, view: HistoryView) -> Decision:
        a = act(self.table, self.mode, self.state, self.clock0 + self.steps, self.params, self.rng)
        self.last_action = a
        return Decision(price=self.params.grid.points[a], info={"action": a, "state": list(self.state)})

    def observe(self, obs: Observation) -> None:
        if obs.rival_prices is None or len(obs.rival_prices) != 1:
            raise InvalidParameters("a Q-learner needs exactly one observed rival price")
        next_state = (self.last_action, self.params.grid.nearest(obs.rival_prices[0]))
        if self.mode is QMode.ADAPTIVE:
            q_update(self.table, self.state, self.last_action, obs.own_profit, next_state, self.params)
        self.state = next_state
        self.steps += 1
