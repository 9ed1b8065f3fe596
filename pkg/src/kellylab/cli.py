"""Command-line laboratory driver.

Subcommands: optimize, drawdown, constrained, probe-convexity, adaptive,
ingest. Every run is fully determined by its flags plus the seed; reports
echo the configuration, and file outputs are byte-identical across repeated
runs. Human tables go to stdout, machine output (CSV/JSON) to --out paths.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
4 infeasible constraint.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import approx, drawdown, growth
from .adaptive import run_adaptive, trace_rows
from .config import DEFAULT_DT_YEARS
from .gamble import (GambleModel, ModelValidationError, dump_model, independent_join,
                     load_model, make_coin)
from .ingest import PriceDataError, load_prices, to_returns

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INFEASIBLE = 4


def _parse_coin(text: str) -> GambleModel:
    parts = text.split(",")
    if len(parts) != 3:
        raise ModelValidationError(f"--coin wants win,loss,p but got {text!r}")
    try:
        win, loss, p = (float(v) for v in parts)
    except ValueError:
        raise ModelValidationError(f"--coin values must be numeric, got {text!r}")
    return make_coin(win, loss, p)


def _resolve_model(args) -> GambleModel:
    if getattr(args, "model", None):
        model = load_model(args.model)
    elif getattr(args, "coin", None):
        model = _parse_coin(args.coin)
    else:
        raise ModelValidationError("supply a model via --model or --coin")
    if getattr(args, "coin2", None):
        model = independent_join(model, _parse_coin(args.coin2))
    return model


def _echo(args, keys) -> None:
    parts = [f"{k.replace('_', '-')}={getattr(args, k)}" for k in keys
             if getattr(args, k, None) is not None]
    print("config: " + " ".join(parts))


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return f"{x:.6f}"
    return str(x)


def _fmt_vec(v) -> str:
    return "[" + ", ".join(f"{float(x):.6f}" for x in np.atleast_1d(v)) + "]"


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _is_even_coin(model: GambleModel) -> bool:
    if model.n_assets != 1 or model.n_atoms != 2:
        return False
    vals = sorted(model.xs[:, 0])
    return vals == [-1.0, 1.0]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_optimize(args) -> int:
    model = _resolve_model(args)
    _echo(args, ["model", "coin", "coin2", "dt", "out", "format"])

    exact = growth.maximize_growth(model)
    rows = [("exact", None, exact.k_star, exact.g_star)]
    for method in ("taylor", "gbm"):
        try:
            sol = approx.approx_solution(model, method)
        except approx.DegenerateModelError as exc:
            print(f"{method}: {exc}")
            continue
        rows.append((method, sol.kappa_raw, sol.k_repaired, growth.log_growth(sol.k_repaired, model)))

    print(f"{'solution':<10} {'kappa_raw':<22} {'K':<22} {'g':>12} {'r':>12}")
    report = []
    for name, raw, k, g in rows:
        r = growth.annualized_return(g, args.dt)
        raw_s = _fmt_vec(raw) if raw is not None else "-"
        print(f"{name:<10} {raw_s:<22} {_fmt_vec(k):<22} {_fmt(g):>12} {_fmt(r):>12}")
        report.append({
            "solution": name,
            "kappa_raw": None if raw is None else [float(v) for v in np.atleast_1d(raw)],
            "k": [float(v) for v in np.atleast_1d(k)],
            "g": float(g),
            "r": float(r),
        })
    if not exact.converged:
        print(f"warning: optimizer did not converge in {exact.iterations} iterations")
        return EXIT_NO_CONVERGENCE
    if args.out:
        if args.format == "json":
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump({"dt": args.dt, "solutions": report}, fh, indent=2)
                fh.write("\n")
        else:
            _write_csv(args.out, ["solution", "kappa_raw", "k", "g", "r"],
                       [[s["solution"],
                         "" if s["kappa_raw"] is None else ";".join(map(repr, s["kappa_raw"])),
                         ";".join(map(repr, s["k"])), repr(s["g"]), repr(s["r"])]
                        for s in report])
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_drawdown(args) -> int:
    model = _resolve_model(args)
    if model.n_assets != 1:
        raise ModelValidationError("drawdown sweep requires a 1-asset model")
    _echo(args, ["model", "coin", "n", "paths", "seed", "eps", "delta", "k_grid",
                 "exact", "out"])

    k_values = np.linspace(0.0, 1.0, args.k_grid)
    indices = drawdown.sample_path_indices(model, args.paths, args.n, args.seed)
    even = _is_even_coin(model)
    analytic = None
    if even:
        p_win = float(model.probs[np.argmax(model.xs[:, 0])])
        analytic = drawdown.coin_drawdown_probability(p_win, args.n)
        print(f"even coin: analytic P(D >= K) = 1 - p^N = {_fmt(analytic)} for K in (0,1)")

    expected_rows, prob_rows = [], []
    print(f"{'K':>8} {'E[D]':>10} {'se':>10} {'P(D<=eps)':>10} {'se':>10}"
          + ("  exceed(MC)  analytic" if even else "")
          + ("  exact" if args.exact else ""))
    for kk in k_values:
        kv = np.array([kk])
        dbar = drawdown.dbar_samples(model, kv, indices)
        ed, ed_se = drawdown._mean_se(1.0 - dbar)
        pe, pe_se = drawdown._mean_se((dbar >= 1.0 - args.eps).astype(float))
        line = f"{kk:>8.4f} {ed:>10.4f} {ed_se:>10.5f} {pe:>10.4f} {pe_se:>10.5f}"
        erow = [repr(float(kk)), repr(ed), repr(ed_se), int(ed <= args.eps)]
        prow = [repr(float(kk)), repr(pe), repr(pe_se), int(pe >= 1.0 - args.delta)]
        if even:
            exceed, exceed_se = drawdown._mean_se((dbar <= 1.0 - kk).astype(float))
            a = analytic if 0.0 < kk < 1.0 else ""
            line += f"  {exceed:>10.4f}  {_fmt(a) if a != '' else '-':>8}"
            prow += [repr(exceed), repr(exceed_se), "" if a == "" else repr(a)]
        if args.exact:
            ed_exact = drawdown.expected_drawdown_exact(model, kv, args.n)
            line += f"  {ed_exact:>8.4f}"
            erow.append(repr(ed_exact))
        print(line)
        expected_rows.append(erow)
        prob_rows.append(prow)

    if args.out:
        eh = ["k1", "estimate", "std_error", "in_set"] + (["exact"] if args.exact else [])
        ph = ["k1", "estimate", "std_error", "in_set"]
        if even:
            ph += ["exceed_estimate", "exceed_std_error", "analytic_exceed"]
        _write_csv(f"{args.out}.expected.csv", eh, expected_rows)
        _write_csv(f"{args.out}.prob.csv", ph, prob_rows)
        print(f"wrote {args.out}.expected.csv and {args.out}.prob.csv")
    return EXIT_OK


def cmd_constrained(args) -> int:
    model = _resolve_model(args)
    _echo(args, ["model", "coin", "coin2", "kind", "eps", "delta", "n", "paths",
                 "seed", "dt"])
    spec = drawdown.ConstraintSpec(kind=args.kind, epsilon=args.eps, delta=args.delta)
    mc = drawdown.MonteCarloConfig(paths=args.paths, seed=args.seed)
    result = drawdown.maximize_growth_constrained(model, args.n, spec, mc=mc)

    if spec.kind == "expected":
        slack = spec.epsilon - result.constraint_estimate
    elif spec.kind == "probabilistic":
        slack = result.constraint_estimate - (1.0 - spec.delta)
    else:
        slack = result.constraint_estimate - math.log(1.0 - spec.epsilon)
    print(f"method:              {result.method}")
    print(f"K:                   {_fmt_vec(result.k_star)}")
    print(f"g(K):                {_fmt(result.g_star)}")
    print(f"r(K):                {_fmt(growth.annualized_return(result.g_star, args.dt))}")
    print(f"constraint estimate: {_fmt(result.constraint_estimate)}"
          + (f" (se {_fmt(result.constraint_std_error)})"
             if result.constraint_std_error is not None else ""))
    print(f"constraint slack:    {_fmt(slack)}")
    if not result.converged:
        print("warning: constrained search did not converge")
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_probe_convexity(args) -> int:
    model = _resolve_model(args)
    if model.n_assets != 2:
        raise ModelValidationError("probe-convexity requires a 2-asset model")
    _echo(args, ["model", "coin", "coin2", "kind", "eps", "delta", "n", "paths",
                 "seed", "grid_resolution", "pairs", "out"])
    spec = drawdown.ConstraintSpec(kind=args.kind, epsilon=args.eps, delta=args.delta)
    mc = drawdown.MonteCarloConfig(paths=args.paths, seed=args.seed)
    report = drawdown.convexity_probe(model, args.n, spec, grid_resolution=args.grid_resolution,
                                      pair_samples=args.pairs, mc=mc)
    inside = sum(1 for p in report.grid if p.in_set)
    print(f"grid points:            {len(report.grid)} ({inside} in set)")
    print(f"midpoint pairs tested:  {report.pairs_tested}")
    print(f"violations:             {len(report.violations)}")
    print(f"  significant:          {report.significant_violations}")
    print(f"  inconclusive:         {report.inconclusive_violations}")
    for c in report.checks:
        if c.violation:
            tag = "SIGNIFICANT" if c.significant else "inconclusive"
            print(f"  {tag}: mid={c.k_mid} estimate={_fmt(c.estimate)} se={_fmt(c.std_error)}")
    if args.out:
        drawdown.write_level_set_csv(report, f"{args.out}.grid.csv")
        print(f"wrote {args.out}.grid.csv")
    return EXIT_OK


def cmd_adaptive(args) -> int:
    if args.window >= args.n:
        raise ModelValidationError("--window must be smaller than --n")
    _echo(args, ["p_true", "n", "window", "runs", "seed", "out"])
    terminal, grand_sum, grand_count = [], 0.0, 0
    k_min, k_max = math.inf, -math.inf
    for i in range(args.runs):
        run = run_adaptive(args.p_true, args.n, args.window, seed=args.seed + i)
        terminal.append(float(run.path.values[-1]))
        grand_sum += float(run.estimates.sum())
        grand_count += run.estimates.size
        k_min = min(k_min, float(run.fractions.min()))
        k_max = max(k_max, float(run.fractions.max()))
        if args.out:
            path = f"{args.out}.run{i}.csv"
            _write_csv(path, ["k", "outcome", "p_hat", "k_hat", "wealth"],
                       list(trace_rows(run)))
    print(f"runs:                {args.runs}")
    print(f"mean p_hat:          {_fmt(grand_sum / grand_count)}")
    print(f"K_hat range:         [{_fmt(k_min)}, {_fmt(k_max)}]")
    print(f"mean terminal V:     {_fmt(float(np.mean(terminal)))}")
    print(f"median terminal V:   {_fmt(float(np.median(terminal)))}")
    if args.out:
        print(f"wrote {args.runs} trace file(s) under {args.out}.run*.csv")
    return EXIT_OK


def cmd_ingest(args) -> int:
    _echo(args, ["data", "symbols", "out"])
    symbols = args.symbols.split(",") if args.symbols else None
    series, report = load_prices(args.data, symbols=symbols)
    model = to_returns(series)
    print(f"rows read:    {report.rows_read}")
    print(f"rows dropped: {len(report.dropped_rows)}"
          + (f" (indices {list(report.dropped_rows)})" if report.dropped_rows else ""))
    print(f"symbols:      {', '.join(s.symbol for s in series)}")
    print(f"atoms:        {model.n_atoms} (weight {1.0 / model.n_atoms:.6g} each)")
    if args.out:
        dump_model(model, args.out, provenance=model.provenance)
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_model_flags(sp) -> None:
    sp.add_argument("--model", help="JSON model file")
    sp.add_argument("--coin", help="inline coin model: win,loss,p")
    sp.add_argument("--coin2", help="second coin, joined independently (2 assets)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kellylab",
                                     description="Log-growth betting laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="exact vs approximate growth solutions")
    _add_model_flags(p)
    p.add_argument("--dt", type=float, default=DEFAULT_DT_YEARS,
                   help="years between bets (default 1/252)")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("drawdown", help="drawdown curves over a fraction grid")
    _add_model_flags(p)
    p.add_argument("--n", type=int, default=252)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--k-grid", type=int, default=21, dest="k_grid")
    p.add_argument("--exact", action="store_true",
                   help="add an exact-enumeration column (small N only)")
    p.add_argument("--out", help="CSV path prefix")
    p.set_defaults(func=cmd_drawdown)

    p = sub.add_parser("constrained", help="growth maximization under a drawdown constraint")
    _add_model_flags(p)
    p.add_argument("--kind", choices=["expected", "probabilistic", "surrogate"],
                   required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int, default=252)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=DEFAULT_DT_YEARS)
    p.set_defaults(func=cmd_constrained)

    p = sub.add_parser("probe-convexity", help="empirical convexity probe (2 assets)")
    _add_model_flags(p)
    p.add_argument("--kind", choices=["expected", "probabilistic"], default="expected")
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--paths", type=int, default=2_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-resolution", type=int, default=20, dest="grid_resolution")
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--out", help="CSV path prefix")
    p.set_defaults(func=cmd_probe_convexity)

    p = sub.add_parser("adaptive", help="sliding-window adaptive betting runs")
    p.add_argument("--p-true", type=float, default=0.6, dest="p_true")
    p.add_argument("--n", type=int, default=1_000)
    p.add_argument("--window", type=int, default=50)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trace CSV path prefix")
    p.set_defaults(func=cmd_adaptive)

    p = sub.add_parser("ingest", help="price CSV -> empirical model JSON")
    p.add_argument("--data", required=True, help="CSV with date + symbol columns")
    p.add_argument("--symbols", help="comma-separated column subset")
    p.add_argument("--out", help="model JSON path")
    p.set_defaults(func=cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except drawdown.InfeasibleConstraintError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ModelValidationError, PriceDataError, drawdown.EnumerationBudgetError,
            approx.DegenerateModelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
