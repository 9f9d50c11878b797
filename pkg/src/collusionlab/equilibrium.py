"""Static benchmark prices for the logit market.

The competitive benchmark is the symmetric static Nash price, found by
iterating the best response; the monopoly benchmark maximises joint
profit at a common price. Both one-dimensional maximisations use a coarse
grid scan to bracket the peak, then golden-section refinement.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters, NonUnimodalWarning
from .market import LogitMarketParams

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverConfig:
    bracket_lo: float | None = None
    bracket_hi: float | None = None
    tol: float = 1e-6
    max_iter: int = 10_000
    grid_points: int = 201

    def __post_init__(self):
        if self.tol <= 0:
            raise InvalidParameters("tol must be positive")
        if self.max_iter < 1:
            raise InvalidParameters("max_iter must be >= 1")
        if self.grid_points < 3:
            raise InvalidParameters("grid_points must be >= 3")
        if (self.bracket_lo is not None and self.bracket_hi is not None
                and not self.bracket_lo < self.bracket_hi):
            raise InvalidParameters("bracket_lo must be below bracket_hi")

    def bracket(self, params: LogitMarketParams) -> tuple[float, float]:
        lo = params.c if self.bracket_lo is None else self.bracket_lo
        hi = params.a + 5 * params.mu if self.bracket_hi is None else self.bracket_hi
        if not lo < hi:
            raise InvalidParameters(f"empty bracket [{lo}, {hi}]")
        return lo, hi


@dataclass(frozen=True)
class EquilibriumResult:
    price: float
    iterations: int
    residual: float
    converged: bool


def _own_profit(params: LogitMarketParams, rivals: np.ndarray):
    # log of the rivals' plus outside option's exp-utilities, computed once
    rest = np.logaddexp.reduce(np.append((params.a - rivals) / params.mu, params.a0 / params.mu))

    def f(x):
        u = (params.a - np.asarray(x, dtype=float)) / params.mu
        return (x - params.c) * np.exp(u - np.logaddexp(u, rest))

    return f


def _joint_profit(params: LogitMarketParams):
    log_n, u0 = math.log(params.n), params.a0 / params.mu

    def f(x):
        u = (params.a - np.asarray(x, dtype=float)) / params.mu
        return params.n * (x - params.c) * np.exp(u - np.logaddexp(log_n + u, u0))

    return f


def golden_section_max(f, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Maximise a unimodal f on [lo, hi]; returns (x, iterations, half-width)."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = float(f(x1)), float(f(x2))
    it = 0
    while (hi - lo) / 2 > tol and it < max_iter:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = float(f(x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = float(f(x2))
        it += 1
    return (lo + hi) / 2, it, (hi - lo) / 2


def _scan_then_refine(f, lo: float, hi: float, cfg: SolverConfig):
    xs = np.linspace(lo, hi, cfg.grid_points)
    ys = f(xs)
    k = int(np.argmax(ys))
    interior = [i for i in range(1, len(xs) - 1) if ys[i] > ys[i - 1] and ys[i] >= ys[i + 1]]
    if len(interior) > 1 and xs[interior[-1]] - xs[interior[0]] > cfg.tol:
        warnings.warn(f"several local maxima at {xs[interior].tolist()}; using grid argmax",
                      NonUnimodalWarning, stacklevel=3)
        # finest-grid fallback around the global grid maximum
        fine = np.linspace(xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)], cfg.grid_points)
        j = int(np.argmax(f(fine)))
        return float(fine[j]), 0, float(fine[1] - fine[0])
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    return golden_section_max(f, float(a), float(b), cfg.tol)


def best_response(params: LogitMarketParams, rival_prices, cfg: SolverConfig = SolverConfig()) -> float:
    """Own price maximising own profit with rivals' prices held fixed."""
    rivals = np.asarray(rival_prices, dtype=float).reshape(-1)
    if rivals.shape[0] != params.n - 1:
        raise InvalidParameters(f"expected {params.n - 1} rival prices, got {rivals.shape[0]}")
    lo, hi = cfg.bracket(params)
    x, _, _ = _scan_then_refine(_own_profit(params, rivals), lo, hi, cfg)
    return x


def _iterate(params: LogitMarketParams, cfg: SolverConfig, start: float, damping: float):
    p, step, prev_step = start, math.inf, math.inf
    growing = 0
    for it in range(1, cfg.max_iter + 1):
        br = best_response(params, np.full(params.n - 1, p), cfg)
        step = abs(br - p)
        if step <= cfg.tol:
            return br, it, step, False
        growing = growing + 1 if step >= prev_step else 0
        if growing >= 3:
            return p, it, step, True
        prev_step = step
        p = p + damping * (br - p)
    return p, cfg.max_iter, step, False


def nash_logit(params: LogitMarketParams, cfg: SolverConfig = SolverConfig()) -> EquilibriumResult:
    """Symmetric static Nash price by best-response iteration.

    Undamped iteration is tried first; if the displacement stops shrinking
    the iteration restarts with damping 0.5. Returns the last iterate with
    ``converged=False`` when neither run meets ``tol``.
    """
    if params.n == 1:
        return monopoly_logit(params, cfg)
    lo, hi = cfg.bracket(params)
    start = (lo + hi) / 2
    price, its, _, oscillating = _iterate(params, cfg, start, 1.0)
    if oscillating:
        price, more, _, _ = _iterate(params, cfg, start, 0.5)
        its += more
    residual = abs(best_response(params, np.full(params.n - 1, price), cfg) - price)
    return EquilibriumResult(price=price, iterations=its, residual=residual,
                             converged=residual <= cfg.tol)


def monopoly_logit(params: LogitMarketParams, cfg: SolverConfig = SolverConfig()) -> EquilibriumResult:
    """Common price maximising the joint profit of all n products."""
    lo, hi = cfg.bracket(params)
    x, its, half_width = _scan_then_refine(_joint_profit(params), lo, hi, cfg)
    return EquilibriumResult(price=x, iterations=its, residual=half_width,
                             converged=half_width <= cfg.tol)


def benchmarks(params: LogitMarketParams, cfg: SolverConfig = SolverConfig()) -> dict:
    nash = nash_logit(params, cfg)
    mono = monopoly_logit(params, cfg)
    return {"p_competitive": nash.price, "p_monopoly": mono.price,
            "nash_converged": nash.converged, "monopoly_converged": mono.converged}
