"""Run summaries, condition reports and the one-sided Welch test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import InsufficientSample, InvalidParameters

DID_NOT_CONVERGE = "Did not converge"


@dataclass(frozen=True)
class RunSummary:
    converged: bool
    rounds_to_convergence: int | None
    avg_price: float
    terminal_lowest_price: float
    price_elevation: float

    def __post_init__(self):
        if self.converged and self.rounds_to_convergence is None:
            raise InvalidParameters("a converged run needs rounds_to_convergence")


def price_elevation(avg: float, p_competitive: float) -> float:
    if not p_competitive > 0:
        raise InvalidParameters("p_competitive must be positive")
    return (avg - p_competitive) / p_competitive


def avg_price(prices, rule, converged: bool | None = None, first: int | None = None) -> float:
    """Pooled mean over the final convergence window for converged runs,
    lowest price of the last period otherwise.

    ``prices`` is a (T, n) array. When ``converged`` is not given the rule is
    evaluated here.
    """
    p = np.asarray(prices, dtype=float)
    if p.ndim != 2 or len(p) == 0:
        raise InvalidParameters("prices must be a nonempty (T, n) array")
    if converged is None:
        from .engine import check_convergence
        converged, first = check_convergence(p, rule)
    if not converged:
        return float(p[-1].min())
    return float(p[first - rule.window:first].mean())


def welch_t_one_sided(sample_a, sample_b) -> tuple[float, float, float]:
    """Welch t for mean(a) > mean(b) with Satterthwaite degrees of freedom.

    Returns ``(t, dof, p)``.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise InsufficientSample("each sample needs at least two observations")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0:
        raise InsufficientSample("both samples have zero variance")
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    dof = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    return float(t), float(dof), float(stats.t.sf(t, dof))


def _mean_sd(x: Sequence[float]) -> tuple[float, float | None]:
    arr = np.asarray(x, dtype=float)
    return float(arr.mean()), (float(arr.std(ddof=1)) if arr.size > 1 else None)


def _cell(mean: float, sd: float | None, digits: int) -> str:
    s = f"{mean:.{digits}f}"
    return s if sd is None else f"{s} ({sd:.{digits}f})"


def fmt_elevation(e: float) -> str:
    return f"{e * 100:+.1f}%"


@dataclass(frozen=True)
class ConditionReport:
    name: str
    runs: int
    n_converged: int
    rounds_mean: float | None
    rounds_sd: float | None
    price_mean: float
    price_sd: float | None
    elevation: float

    @property
    def fraction_converged(self) -> float:
        return self.n_converged / self.runs

    @property
    def rounds_cell(self) -> str:
        if self.n_converged == 0:
            return DID_NOT_CONVERGE
        return _cell(self.rounds_mean, self.rounds_sd, 1)

    @property
    def price_cell(self) -> str:
        return _cell(self.price_mean, self.price_sd, 3)

    def row(self) -> list[str]:
        return [self.name, self.rounds_cell, self.price_cell,
                f"{self.n_converged}/{self.runs}", fmt_elevation(self.elevation)]


REPORT_HEADER = ["Condition", "Rounds to Convergence (SD)", "Avg. Price (SD)", "Converged", "Elevation"]


def summarize_condition(summaries: Sequence[RunSummary], p_competitive: float,
                        name: str = "condition") -> ConditionReport:
    """Means and SDs in the shape of one results-table row.

    Rounds are averaged over converged runs only; the price column pools
    every run (terminal lowest price for runs that did not converge).
    """
    if not summaries:
        raise InsufficientSample("no run summaries")
    rounds = [s.rounds_to_convergence for s in summaries if s.converged]
    r_mean, r_sd = _mean_sd(rounds) if rounds else (None, None)
    p_mean, p_sd = _mean_sd([s.avg_price for s in summaries])
    return ConditionReport(name=name, runs=len(summaries), n_converged=len(rounds),
                           rounds_mean=r_mean, rounds_sd=r_sd, price_mean=p_mean, price_sd=p_sd,
                           elevation=price_elevation(p_mean, p_competitive))


def render_table(reports: Sequence[ConditionReport]) -> str:
    rows = [REPORT_HEADER] + [r.row() for r in reports]
    widths = [max(len(r[k]) for r in rows) for k in range(len(REPORT_HEADER))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)
