"""Command-line entry point: ``collusionlab {theory,solve,pretrain,run,report}``."""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .errors import (CollusionLabError, ConfigError, InsufficientSample, InvalidParameters,
                     OutOfRangeTarget, RunAborted)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_AGENT = 3
EXIT_NONCONVERGENCE = 4


def _resolve_config(name: str) -> Path:
    from .config import preset_path
    p = Path(name)
    return p if p.exists() else preset_path(name)


def cmd_theory(args) -> int:
    from .theory import (LinearMarketParams, monitored_threshold, monopoly_price_linear,
                         nash_price_linear, patience_threshold)

    params = LinearMarketParams(args.a, args.b, args.d, args.c)
    p_star, p_m = nash_price_linear(params), monopoly_price_linear(params)
    lo = args.pc_min if args.pc_min is not None else p_star + (p_m - p_star) / args.points
    hi = args.pc_max if args.pc_max is not None else p_m
    grid = np.linspace(lo, hi, args.points)
    thresholds = [patience_threshold(params, float(p)) for p in grid]
    print(f"p* = {p_star:.6g}  p^M = {p_m:.6g}")
    print(f"{'p_c':>10}  {'delta_bar':>10}")
    for p, d in zip(grid, thresholds):
        print(f"{p:10.4f}  {d:10.6f}")
    p_ref = args.pc if args.pc is not None else hi
    rhos = np.linspace(args.rho_min, args.rho_max, args.rho_points)
    print(f"\nmonitoring sweep at p_c = {p_ref:.4f}")
    print(f"{'rho':>10}  {'delta_bar':>10}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sweep = [monitored_threshold(params, p_ref, float(r)) for r in rhos]
    for r, d in zip(rhos, sweep):
        print(f"{r:10.4f}  {d:10.6f}")
    bad = int(np.sum(np.diff(thresholds) <= 0)) + int(np.sum(np.diff(sweep) >= 0))
    print(f"\nmonotonicity violations: {bad}")
    return EXIT_OK if bad == 0 else 1


def _market_from_args(args):
    from .config import load_config
    from .market import LogitMarketParams

    if args.config:
        m = load_config(_resolve_config(args.config)).market
        return LogitMarketParams(**m.model_dump())
    if args.sanity_market:
        return LogitMarketParams.sanity_check(args.n)
    return LogitMarketParams(args.a, args.mu, args.a0, args.c, args.n)


def cmd_solve(args) -> int:
    from .equilibrium import benchmarks

    params = _market_from_args(args)
    t0 = time.perf_counter()
    b = benchmarks(params)
    dt = time.perf_counter() - t0
    print(f"market: a={params.a} mu={params.mu} a0={params.a0} c={params.c} n={params.n}")
    print(f"p^C = {b['p_competitive']:.6f}")
    print(f"p^M = {b['p_monopoly']:.6f}")
    print(f"solved in {dt:.3f} s")
    if args.json:
        print(json.dumps(b))
    return EXIT_OK


def cmd_pretrain(args) -> int:
    from .agents.qlearning import PriceGrid, QParams, pretrain, save_tables
    from .config import PROFILES
    from .equilibrium import benchmarks

    market = _market_from_args(args).with_n(2)
    prof = dict(PROFILES[args.profile])
    if args.window:
        prof["stability_window"] = args.window
    if args.cap:
        prof["cap"] = args.cap
    b = benchmarks(market)
    params = QParams(PriceGrid.around(b["p_competitive"], b["p_monopoly"], args.m, args.xi))
    out = Path(args.out or "qtables")
    out.mkdir(parents=True, exist_ok=True)
    report = []
    for s in range(args.seed, args.seed + args.runs):
        t0 = time.perf_counter()
        res = pretrain(params, market, prof["stability_window"], prof["cap"], seed=s)
        res.meta.update({"profile": args.profile, "market": [market.a, market.mu, market.a0, market.c]})
        path = out / f"qtable_seed{s}.bin"
        save_tables(res, path)
        row = {"seed": s, "converged": res.converged, "periods": res.periods,
               "greedy_price": res.greedy_price(), "seconds": round(time.perf_counter() - t0, 3),
               "file": str(path)}
        report.append(row)
        print(f"seed {s}: converged={res.converged} periods={res.periods} "
              f"greedy price={row['greedy_price']:.4f} ({row['seconds']} s)")
    (out / "pretrain_report.json").write_text(json.dumps({"p_competitive": b["p_competitive"],
                                                          "p_monopoly": b["p_monopoly"],
                                                          "runs": report}, indent=2) + "\n")
    n_conv = sum(r["converged"] for r in report)
    print(f"{n_conv}/{len(report)} converged")
    if args.fail_on_nonconvergence and n_conv < len(report):
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_run(args) -> int:
    from .config import build_spec, canonical_yaml, load_config
    from .engine import run_condition
    from .metrics import render_table, summarize_condition

    path = _resolve_config(args.config)
    model = load_config(path)
    out = Path(args.out) if args.out else Path(model.output_dir or "runs") / model.name
    spec = build_spec(model, runs=args.runs, seed=args.seed, output_dir=out, profile=args.profile)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(canonical_yaml(model), encoding="utf-8")
    try:
        results = run_condition(spec, parallel=args.parallel, plots=not args.no_plots)
    except RunAborted as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_AGENT
    summaries = [s for _, s in results]
    report = summarize_condition(summaries, spec.p_competitive, model.name)
    print(render_table([report]))
    print(f"p^C = {spec.p_competitive:.4f}; logs in {out}")
    if args.fail_on_nonconvergence and report.n_converged < report.runs:
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _load_condition(d: Path):
    from .engine import read_summary_csv

    name, summaries = read_summary_csv(d / "summary.csv")
    manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    return name, summaries, manifest["benchmarks"]["p_competitive"]


def cmd_report(args) -> int:
    from .metrics import render_table, summarize_condition, welch_t_one_sided

    conds = {}
    for d in args.dirs:
        name, summaries, p_c = _load_condition(Path(d))
        conds[name] = (summaries, p_c)
    reports = [summarize_condition(s, p_c, name) for name, (s, p_c) in conds.items()]
    print(render_table(reports))
    if args.compare:
        a, b = args.compare
        if a not in conds or b not in conds:
            raise ConfigError(f"unknown condition in --compare; have {sorted(conds)}")
        try:
            t, dof, p = welch_t_one_sided([s.avg_price for s in conds[a][0]],
                                          [s.avg_price for s in conds[b][0]])
        except InsufficientSample as exc:
            print(f"\nWelch one-sided test, avg price {a} > {b}: not defined ({exc})")
        else:
            print(f"\nWelch one-sided test, avg price {a} > {b}: t = {t:.4f}, dof = {dof:.2f}, p = {p:.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="collusionlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    th = sub.add_parser("theory", help="patience thresholds of the linear duopoly")
    th.add_argument("--a", type=float, default=2.0)
    th.add_argument("--b", type=float, default=1.0)
    th.add_argument("--d", type=float, default=0.5)
    th.add_argument("--c", type=float, default=1.0)
    th.add_argument("--pc-min", type=float)
    th.add_argument("--pc-max", type=float)
    th.add_argument("--pc", type=float, help="target price for the monitoring sweep")
    th.add_argument("--points", type=int, default=10)
    th.add_argument("--rho-min", type=float, default=0.1)
    th.add_argument("--rho-max", type=float, default=1.0)
    th.add_argument("--rho-points", type=int, default=10)
    th.set_defaults(func=cmd_theory)

    def market_flags(p):
        p.add_argument("--config", help="config file or preset name (market section is used)")
        p.add_argument("--a", type=float, default=2.0)
        p.add_argument("--mu", type=float, default=0.25)
        p.add_argument("--a0", type=float, default=0.0)
        p.add_argument("--c", type=float, default=1.0)
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--sanity-market", action="store_true",
                       help="use the sanity-check parameters a=4, mu=0.1, a0=1, c=3")

    so = sub.add_parser("solve", help="static Nash and joint-monopoly prices of the logit market")
    market_flags(so)
    so.add_argument("--json", action="store_true")
    so.set_defaults(func=cmd_solve)

    pt = sub.add_parser("pretrain", help="pretrain pairs of Q-learners in self-play")
    market_flags(pt)
    pt.add_argument("--profile", choices=["desk", "paper"], default="desk")
    pt.add_argument("--runs", type=int, default=1)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--m", type=int, default=15)
    pt.add_argument("--xi", type=float, default=0.1)
    pt.add_argument("--window", type=int, help="override the profile's stability window")
    pt.add_argument("--cap", type=int, help="override the profile's period cap")
    pt.add_argument("--out")
    pt.add_argument("--fail-on-nonconvergence", action="store_true")
    pt.set_defaults(func=cmd_pretrain)

    rn = sub.add_parser("run", help="run one experimental condition")
    rn.add_argument("--config", required=True, help="config file or preset name")
    rn.add_argument("--runs", type=int)
    rn.add_argument("--seed", type=int)
    rn.add_argument("--parallel", type=int, default=1)
    rn.add_argument("--profile", choices=["desk", "paper"], default="desk")
    rn.add_argument("--out")
    rn.add_argument("--no-plots", action="store_true")
    rn.add_argument("--fail-on-nonconvergence", action="store_true")
    rn.set_defaults(func=cmd_run)

    rp = sub.add_parser("report", help="summarise finished conditions")
    rp.add_argument("dirs", nargs="+")
    rp.add_argument("--compare", nargs=2, metavar=("A", "B"),
                    help="one-sided Welch test that condition A prices above B")
    rp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameters, OutOfRangeTarget, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAborted as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_AGENT
    except CollusionLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
