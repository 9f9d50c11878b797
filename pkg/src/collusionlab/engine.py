"""Period loop, convergence detection and run persistence.

A run asks every agent for a price (agents see periods 1..t-1 only),
evaluates the logit market, appends one JSON line per period and stops
once the convergence rule holds or the horizon is reached.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .agents.base import Agent, Decision, HistoryView, InfoAccess, Observation
from .errors import AgentFailure, InvalidParameters, RunAborted
from .market import LogitMarketParams, market_outcome
from .metrics import RunSummary, avg_price, price_elevation

SCHEMA_VERSION = 1

# relative slack so that a spread of exactly the band (e.g. 1.05 - 1.00) still passes
BAND_SLACK = 1e-12

# builds a fresh agent for one run from its own seeded generator
AgentFactory = Callable[[np.random.Generator], Agent]


@dataclass(frozen=True)
class ConvergenceRule:
    window: int = 100
    band: float = 0.05

    def __post_init__(self):
        if self.window < 1:
            raise InvalidParameters("window must be >= 1")
        if not self.band > 0:
            raise InvalidParameters("band must be positive")


@dataclass
class AgentSpec:
    factory: AgentFactory
    label: str = "agent"
    meta: dict = field(default_factory=dict)


@dataclass
class ExperimentSpec:
    market: LogitMarketParams
    agents: Sequence[AgentSpec]
    max_periods: int = 1000
    convergence: ConvergenceRule = ConvergenceRule()
    runs: int = 1
    seed: int = 0
    output_dir: Path | str | None = None
    name: str = "condition"
    stop_on_convergence: bool = True
    agent_threads: int = 1
    p_competitive: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.agents) != self.market.n:
            raise InvalidParameters(f"{len(self.agents)} agents for a market with n={self.market.n}")
        if self.runs < 1:
            raise InvalidParameters("runs must be >= 1")
        if self.max_periods < 1:
            raise InvalidParameters("max_periods must be >= 1")


@dataclass
class PeriodRecord:
    t: int
    prices: tuple[float, ...]
    quantities: tuple[float, ...]
    profits: tuple[float, ...]
    outputs: tuple[str | None, ...] = ()
    latency: tuple[float, ...] = ()

    def to_json(self) -> str:
        # latency is wall-clock and goes to the latency CSV so logs stay reproducible
        return json.dumps({"schema": SCHEMA_VERSION, "t": self.t, "prices": list(self.prices),
                           "quantities": list(self.quantities), "profits": list(self.profits),
                           "outputs": list(self.outputs)})

    @classmethod
    def from_json(cls, line: str) -> "PeriodRecord":
        d = json.loads(line)
        if d.get("schema") != SCHEMA_VERSION:
            raise InvalidParameters(f"unsupported log schema {d.get('schema')}")
        return cls(t=d["t"], prices=tuple(d["prices"]), quantities=tuple(d["quantities"]),
                   profits=tuple(d["profits"]), outputs=tuple(d.get("outputs", ())))


@dataclass
class RunLog:
    run_index: int
    records: list[PeriodRecord] = field(default_factory=list)
    path: Path | None = None
    aborted: dict | None = None

    def prices(self) -> np.ndarray:
        return np.array([r.prices for r in self.records], dtype=float)


def load_run_log(path) -> RunLog:
    path = Path(path)
    records = []
    aborted = None
    for line in path.read_text(encoding="utf-8").splitlines():
        d = json.loads(line)
        if "aborted" in d:
            aborted = d["aborted"]
        else:
            records.append(PeriodRecord.from_json(line))
    idx = int(path.stem.split("_")[1]) if path.stem.startswith("run_") else 0
    return RunLog(run_index=idx, records=records, path=path, aborted=aborted)


def check_convergence(history, rule: ConvergenceRule = ConvergenceRule()) -> tuple[bool, int | None]:
    """First period ending a run of ``rule.window`` consecutive periods in
    which max |p_i - p_j| <= band * min_k p_k (boundary inclusive).

    ``history`` is a sequence of price vectors or PeriodRecords; periods are
    numbered from 1.
    """
    if len(history) == 0:
        raise InvalidParameters("history is empty")
    streak = 0
    for k, row in enumerate(history, start=1):
        p = row.prices if isinstance(row, PeriodRecord) else row
        if _period_ok(p, rule.band):
            streak += 1
            if streak >= rule.window:
                return True, k
        else:
            streak = 0
    return False, None


def _period_ok(prices, band: float) -> bool:
    p = np.asarray(prices, dtype=float)
    lo = float(p.min())
    return float(p.max()) - lo <= band * lo * (1 + BAND_SLACK)


def _view_of(record: PeriodRecord, i: int, access: InfoAccess) -> Observation:
    rivals = tuple(p for k, p in enumerate(record.prices) if k != i)
    return Observation(t=record.t, own_price=record.prices[i], own_quantity=record.quantities[i],
                       own_profit=record.profits[i],
                       rival_prices=rivals if access is InfoAccess.FULL else None)


@dataclass
class RunState:
    agents: list[Agent]
    views: list[list[Observation]]
    log: RunLog
    pool: ThreadPoolExecutor | None = None
    writer: "RunWriter | None" = None


def agent_rngs(seed: int, run_index: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(np.random.SeedSequence([seed, run_index, i])) for i in range(n)]


def init_state(spec: ExperimentSpec, run_index: int) -> RunState:
    rngs = agent_rngs(spec.seed, run_index, len(spec.agents))
    agents = [a.factory(r) for a, r in zip(spec.agents, rngs)]
    pool = ThreadPoolExecutor(spec.agent_threads) if spec.agent_threads > 1 else None
    return RunState(agents=agents, views=[[] for _ in agents], log=RunLog(run_index), pool=pool)


def _timed(agent: Agent, view: HistoryView) -> tuple[Decision, float]:
    t0 = time.perf_counter()
    d = agent.decide(view)
    return d, time.perf_counter() - t0


def step(spec: ExperimentSpec, state: RunState, t: int) -> PeriodRecord:
    """Play period t (1-based) and append it to the log."""
    n = len(state.agents)
    views = [HistoryView(t=t, seller=i, n_sellers=n, records=tuple(state.views[i])) for i in range(n)]
    results: list = [None] * n
    if state.pool is not None:
        futures = [state.pool.submit(_timed, a, v) for a, v in zip(state.agents, views)]
        calls = [f.result for f in futures]
    else:
        calls = [lambda a=a, v=v: _timed(a, v) for a, v in zip(state.agents, views)]
    for i, call in enumerate(calls):
        try:
            results[i] = call()
        except AgentFailure as exc:
            diag = {"t": t, "agent": i, "label": state.agents[i].label, "error": str(exc)}
            state.log.aborted = diag
            if state.writer is not None:
                state.writer.abort(diag)
            raise RunAborted(f"agent {i} failed in period {t}: {exc}", period=t, agent=i) from exc

    prices = [float(d.price) for d, _ in results]
    out = market_outcome(spec.market, prices)
    refs = tuple(f"t={t}/agent={i}" if d.prompt is not None or d.response is not None else None
                 for i, (d, _) in enumerate(results))
    rec = PeriodRecord(t=t, prices=tuple(prices), quantities=tuple(out.quantities.tolist()),
                       profits=tuple(out.profits.tolist()), outputs=refs,
                       latency=tuple(lat for _, lat in results))
    state.log.records.append(rec)
    if state.writer is not None:
        state.writer.period(rec, [d for d, _ in results])
    for i, agent in enumerate(state.agents):
        obs = _view_of(rec, i, agent.info_access)
        state.views[i].append(obs)
        agent.observe(obs)
    return rec


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


class RunWriter:
    """Append-only writer for ``run_KKK.jsonl``, its prompt/response sidecar
    and a ``run_KKK.latency.csv`` of wall-clock query times.

    Both JSONL files depend only on the experiment settings and seed; timing is kept apart.
    """

    def __init__(self, out_dir, run_index: int):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.path = out_dir / f"run_{run_index:03d}.jsonl"
        self.io_path = out_dir / f"run_{run_index:03d}.io.jsonl"
        self._log = open(self.path, "w", encoding="utf-8", newline="\n")
        self._io = open(self.io_path, "w", encoding="utf-8", newline="\n")
        self.latency_path = out_dir / f"run_{run_index:03d}.latency.csv"
        self._lat = open(self.latency_path, "w", encoding="utf-8", newline="\n")
        self._lat.write("t,agent,seconds\n")

    def period(self, rec: PeriodRecord, decisions: list[Decision]) -> None:
        self._log.write(rec.to_json() + "\n")
        for i, d in enumerate(decisions):
            self._io.write(json.dumps({"t": rec.t, "agent": i, "prompt": d.prompt,
                                       "response": d.response, "info": d.info},
                                      default=_jsonable) + "\n")
            if i < len(rec.latency):
                self._lat.write(f"{rec.t},{i},{rec.latency[i]:.6f}\n")
        self._log.flush()
        self._io.flush()
        self._lat.flush()

    def abort(self, diag: dict) -> None:
        self._log.write(json.dumps({"schema": SCHEMA_VERSION, "aborted": diag}) + "\n")
        self._log.flush()

    def close(self) -> None:
        self._log.close()
        self._io.close()
        self._lat.close()


def summarize_run(log: RunLog, rule: ConvergenceRule, p_competitive: float) -> RunSummary:
    converged, first = check_convergence(log.records, rule)
    terminal = float(min(log.records[-1].prices))
    avg = avg_price(log.prices(), rule, converged=converged, first=first)
    return RunSummary(converged=converged, rounds_to_convergence=first, avg_price=avg,
                      terminal_lowest_price=terminal,
                      price_elevation=price_elevation(avg, p_competitive))


def competitive_price(spec: ExperimentSpec) -> float:
    if spec.p_competitive is None:
        from .equilibrium import nash_logit
        spec.p_competitive = nash_logit(spec.market).price
    return spec.p_competitive


def run(spec: ExperimentSpec, run_index: int = 0) -> tuple[RunLog, RunSummary]:
    """Loop :func:`step` until convergence or ``max_periods``.

    Logs are flushed every period; on an agent failure the diagnostic record
    is written and :class:`RunAborted` propagates.
    """
    p_c = competitive_price(spec)
    state = init_state(spec, run_index)
    if spec.output_dir is not None:
        state.writer = RunWriter(spec.output_dir, run_index)
        state.log.path = state.writer.path
    rule = spec.convergence
    streak = 0
    try:
        for t in range(1, spec.max_periods + 1):
            rec = step(spec, state, t)
            streak = streak + 1 if _period_ok(rec.prices, rule.band) else 0
            if spec.stop_on_convergence and streak >= rule.window:
                break
    finally:
        if state.writer is not None:
            state.writer.close()
        if state.pool is not None:
            state.pool.shutdown()
    return state.log, summarize_run(state.log, rule, p_c)


def run_condition(spec: ExperimentSpec, parallel: int = 1, plots: bool = True):
    """Execute ``spec.runs`` independent runs, up to ``parallel`` at a time,
    and write the manifest, summary CSV and trajectory plots."""
    from .equilibrium import benchmarks

    bench = benchmarks(spec.market)
    if spec.p_competitive is None:
        spec.p_competitive = bench["p_competitive"]
    out = Path(spec.output_dir) if spec.output_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(spec, bench, out / "manifest.json")
    idx = list(range(spec.runs))
    if parallel > 1 and spec.runs > 1:
        with ThreadPoolExecutor(parallel) as pool:
            results = list(pool.map(lambda k: run(spec, k), idx))
    else:
        results = [run(spec, k) for k in idx]
    summaries = [s for _, s in results]
    if out is not None:
        write_summary_csv(spec.name, summaries, out / "summary.csv")
        if plots:
            from .plotting import plot_run
            for log, _ in results:
                plot_run(log, bench["p_competitive"], bench["p_monopoly"],
                         out / f"run_{log.run_index:03d}.svg", title=f"{spec.name} run {log.run_index}")
    return results


def write_manifest(spec: ExperimentSpec, bench: dict, path) -> None:
    from . import __version__

    doc = {
        "schema": SCHEMA_VERSION,
        "name": spec.name,
        "version": __version__,
        "market": asdict(spec.market),
        "agents": [{"label": a.label, **a.meta} for a in spec.agents],
        "max_periods": spec.max_periods,
        "convergence": asdict(spec.convergence),
        "runs": spec.runs,
        "seed": spec.seed,
        "run_seeds": [[spec.seed, k, i] for k in range(spec.runs) for i in range(len(spec.agents))],
        "benchmarks": bench,
        "meta": spec.meta,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n",
                          encoding="utf-8")


SUMMARY_COLUMNS = ("condition", "run", "converged", "rounds", "avg_price", "elevation", "terminal_lowest")


def write_summary_csv(condition: str, summaries: Sequence[RunSummary], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for k, s in enumerate(summaries):
            w.writerow([condition, k, int(s.converged),
                        "" if s.rounds_to_convergence is None else s.rounds_to_convergence,
                        repr(s.avg_price), repr(s.price_elevation), repr(s.terminal_lowest_price)])


def read_summary_csv(path) -> tuple[str, list[RunSummary]]:
    name = ""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            name = row["condition"]
            out.append(RunSummary(converged=row["converged"] == "1",
                                  rounds_to_convergence=int(row["rounds"]) if row["rounds"] else None,
                                  avg_price=float(row["avg_price"]),
                                  terminal_lowest_price=float(row["terminal_lowest"]),
                                  price_elevation=float(row["elevation"])))
    return name, out
