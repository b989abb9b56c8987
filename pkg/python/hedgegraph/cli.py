"""
CLI module for hedgegraph
"""

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config.settings import settings
from .logging_config import setup_logging
from .models.allocation import Formulation
from .models.backtest import BacktestReport, EpsilonRule, EpsilonRuleKind
from .models.panel import ReturnKind, ReturnPanel, WindowSpec, year_windows
from .services.backtest import (
    build_configs,
    load_grid,
    run_grid,
    write_report_csv,
    write_report_json,
)
from .services.estimators import sample_corr, sample_cov
from .services.hedge_select import (
    hedge_scores,
    hedge_table,
    selection_table,
    write_hedge_csv,
    write_hedge_table_csv,
)
from .services.manifest import build_manifest, write_json, write_manifest
from .services.market_data import (
    Equicorrelated,
    Layout,
    compute_returns,
    full_window,
    ingest,
    ingest_wide_csv,
    slice_panel,
    synth_price_panel,
    write_wide_csv,
)
from .services.signed_graph import (
    from_matrix,
    graph_to_json_dict,
    is_balanced,
    triangle_census,
    write_edge_list,
)
from .utils.error_handling import EXIT_OK, ValidationError, handle_exception

logger = logging.getLogger(__name__)

# Echoed in the manifest but left out of its id: paths and execution knobs
_UNHASHED = frozenset({"out_dir", "verbose", "workers", "panel", "input", "grid"})


def _load_returns(args) -> ReturnPanel:
    return compute_returns(ingest_wide_csv(args.panel), ReturnKind(args.returns))


def _window(panel: ReturnPanel, text: str | None) -> WindowSpec:
    return full_window(panel) if text in (None, "full") else WindowSpec.parse(text)


def _manifest(args, inputs: dict[str, str]):
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("command", "handler")
    }
    manifest = build_manifest(args.command, config, inputs, unhashed=_UNHASHED)
    write_manifest(manifest, args.out_dir)
    return manifest


def cmd_ingest(args) -> int:
    panel, stats = ingest(args.input, Layout(args.layout), args.price_column)
    out = write_wide_csv(panel, Path(args.out_dir) / "panel.csv")
    manifest = _manifest(args, {"input": args.input})
    print(
        f"rows_kept={stats.rows_kept} rows_dropped={stats.rows_dropped} "
        f"tickers={stats.tickers} panel={out} manifest={manifest.manifest_id}"
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    recipe = Equicorrelated(rho=args.rho, volatility=args.volatility, drift=args.drift)
    panel = synth_price_panel(args.seed, args.n_assets, args.n_days, recipe)
    out = write_wide_csv(panel, Path(args.out_dir) / "panel.csv")
    manifest = _manifest(args, {})
    print(f"rows={panel.n_rows} tickers={panel.n_assets} panel={out} manifest={manifest.manifest_id}")
    return EXIT_OK


def cmd_hedge(args) -> int:
    panel = _load_returns(args)
    out_dir = Path(args.out_dir)
    if args.years:
        reports = hedge_table(panel, year_windows(" ".join(args.years)), workers=args.workers)
        manifest = _manifest(args, {"panel": args.panel})
        write_hedge_table_csv(reports, out_dir / "hedge.csv")
        payload = {"reports": [r.to_json_dict() for r in reports]}
    else:
        reports = [hedge_scores(panel, _window(panel, args.window), args.workers)]
        manifest = _manifest(args, {"panel": args.panel})
        write_hedge_csv(reports[0], out_dir / "hedge.csv")
        payload = reports[0].to_json_dict()
    write_json({"manifest_id": manifest.manifest_id, **payload}, out_dir / "hedge.json")
    for report in reports:
        print(
            f"window={report.window.label} days={report.sample_size} "
            f"tickers={len(report.tickers)}"
        )
    return EXIT_OK


def cmd_select(args) -> int:
    panel = _load_returns(args)
    if args.years:
        windows = year_windows(" ".join(args.years))
    else:
        windows = [_window(panel, args.window)]
    table = selection_table(panel, windows, args.k, workers=args.workers)
    selections = [sel for by_k in table.values() for sel in by_k.values()]

    manifest = _manifest(args, {"panel": args.panel})
    if len(selections) == 1:
        payload = selections[0].model_dump(mode="json")
        lines = [" ".join(selections[0].chosen)]
    else:
        payload = {"selections": [sel.model_dump(mode="json") for sel in selections]}
        lines = [f"{s.window_label} k={s.k}: {' '.join(s.chosen)}" for s in selections]
    write_json(
        {"manifest_id": manifest.manifest_id, **payload},
        Path(args.out_dir) / "selection.json",
    )
    print("\n".join(lines))
    return EXIT_OK


def _epsilon_rule(args) -> EpsilonRule:
    kind = EpsilonRuleKind(args.epsilon_rule)
    if kind == EpsilonRuleKind.EXPLICIT and args.epsilon is None:
        raise ValidationError("--epsilon-rule value needs --epsilon")
    return EpsilonRule(kind=kind, value=args.epsilon)


def cmd_backtest(args) -> int:
    panel = _load_returns(args)
    if args.grid:
        cfgs = load_grid(args.grid)
    else:
        cfgs = build_configs(
            args.methods,
            args.k,
            gamma=args.gamma,
            epsilon_rule=_epsilon_rule(args),
            return_kind=ReturnKind(args.returns),
            formulation=Formulation(args.formulation),
        )
    windows = year_windows(" ".join(args.years))
    report = run_grid(panel, windows, cfgs, workers=args.workers, soft_errors=True)

    inputs = {"panel": args.panel}
    if args.grid:
        inputs["grid"] = args.grid
    manifest = _manifest(args, inputs)
    report = BacktestReport(rows=report.rows, manifest_id=manifest.manifest_id)

    out_dir = Path(args.out_dir)
    write_report_csv(report, out_dir / "backtest.csv")
    write_report_json(report, out_dir / "backtest.json")
    failed = sum(1 for row in report.rows if row.error)
    print(f"rows={len(report.rows)} failed={failed} report={out_dir / 'backtest.csv'}")
    return EXIT_OK


def cmd_graph(args) -> int:
    if (args.tau_plus is None) != (args.tau_minus is None):
        raise ValidationError("--tau-plus and --tau-minus go together")
    taus = None if args.tau_plus is None else (args.tau_plus, args.tau_minus)

    panel = _load_returns(args)
    estimate = sample_cov(slice_panel(panel, _window(panel, args.window)))
    if args.corr or taus is not None:
        estimate = sample_corr(estimate)
    graph = from_matrix(estimate, taus)
    census = triangle_census(graph)
    bipartition = is_balanced(graph)

    manifest = _manifest(args, {"panel": args.panel})
    out_dir = Path(args.out_dir)
    write_edge_list(graph, out_dir / "graph_edges.csv")
    write_json(
        {
            "manifest_id": manifest.manifest_id,
            "kind": estimate.kind.value,
            **graph_to_json_dict(graph, census, bipartition),
        },
        out_dir / "graph.json",
    )
    print(
        f"edges={graph.n_edges} T0={census.t0} T1={census.t1} T2={census.t2} "
        f"T3={census.t3} balanced={bipartition is not None}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out-dir", default=settings.OUT_DIR, help="Directory for all outputs"
    )
    common.add_argument(
        "--verbose", "-v", action="store_true", help="Enable verbose logging output"
    )
    common.add_argument(
        "--workers",
        type=int,
        default=settings.HG_THREADS,
        help="Worker threads (default and upper bound: HG_THREADS)",
    )

    panel_args = argparse.ArgumentParser(add_help=False)
    panel_args.add_argument("--panel", required=True, help="Wide price CSV")
    panel_args.add_argument(
        "--returns", choices=[k.value for k in ReturnKind], default="linear"
    )

    parser = argparse.ArgumentParser(
        prog="hedgegraph",
        description="Signed-graph hedge scores and portfolio backtests",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s ingest --input prices/ --layout per-ticker --out-dir out
  %(prog)s hedge --panel out/panel.csv --window 2021
  %(prog)s backtest --panel out/panel.csv --years 2020:2024 --methods ewp pm+mpns --k 5 8
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest_p = sub.add_parser("ingest", parents=[common], help="Normalize price CSVs")
    ingest_p.add_argument("--input", required=True, help="Wide CSV or per-ticker directory")
    ingest_p.add_argument(
        "--layout", choices=[layout.value for layout in Layout], default="wide"
    )
    ingest_p.add_argument("--price-column", default=None)
    ingest_p.set_defaults(handler=cmd_ingest)

    synth_p = sub.add_parser("synth", parents=[common], help="Write a synthetic price panel")
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--n-assets", type=int, default=10)
    synth_p.add_argument("--n-days", type=int, default=504)
    synth_p.add_argument("--rho", type=float, default=0.0, help="Pairwise correlation")
    synth_p.add_argument("--volatility", type=float, default=0.01)
    synth_p.add_argument("--drift", type=float, default=0.0)
    synth_p.set_defaults(handler=cmd_synth)

    hedge_p = sub.add_parser("hedge", parents=[common, panel_args], help="Hedge scores")
    hedge_scope = hedge_p.add_mutually_exclusive_group()
    hedge_scope.add_argument("--window", default=None, help="YYYY, START:END or full")
    hedge_scope.add_argument(
        "--years", nargs="+", default=None, help="Per-year table plus the full period"
    )
    hedge_p.set_defaults(handler=cmd_hedge)

    select_p = sub.add_parser("select", parents=[common, panel_args], help="Top-K selection")
    select_scope = select_p.add_mutually_exclusive_group()
    select_scope.add_argument("--window", default=None)
    select_scope.add_argument("--years", nargs="+", default=None, help="One selection per year")
    select_p.add_argument("--k", type=int, nargs="+", required=True)
    select_p.set_defaults(handler=cmd_select)

    backtest_p = sub.add_parser(
        "backtest", parents=[common, panel_args], help="Year-over-year backtest grid"
    )
    backtest_p.add_argument("--years", nargs="+", required=True, help="2020:2024 or a list")
    backtest_p.add_argument(
        "--methods",
        nargs="+",
        default=["ewp"],
        help="pm+mp, pm+mpns, pm+ewp, mp, mpns, ewp",
    )
    backtest_p.add_argument("--k", type=int, nargs="*", default=[])
    backtest_p.add_argument("--gamma", type=float, default=None)
    backtest_p.add_argument(
        "--epsilon-rule",
        choices=[k.value for k in EpsilonRuleKind],
        default=EpsilonRuleKind.MAX_MEAN.value,
    )
    backtest_p.add_argument("--epsilon", type=float, default=None)
    backtest_p.add_argument(
        "--formulation", choices=[f.value for f in Formulation], default="omv1"
    )
    backtest_p.add_argument("--grid", default=None, help="YAML list of configurations")
    backtest_p.set_defaults(handler=cmd_backtest)

    graph_p = sub.add_parser("graph", parents=[common, panel_args], help="Signed graph")
    graph_p.add_argument("--window", default="full")
    graph_p.add_argument("--tau-plus", type=float, default=None)
    graph_p.add_argument("--tau-minus", type=float, default=None)
    graph_p.add_argument("--corr", action="store_true", help="Use correlations")
    graph_p.set_defaults(handler=cmd_graph)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    setup_logging("DEBUG" if args.verbose else None)

    try:
        return args.handler(args)
    except Exception as exc:
        error = handle_exception(exc)
        logger.error("%s: %s", error.error_code.value, error.message, exc_info=args.verbose)
        print(f"error: {error.tag} {error.message}", file=sys.stderr)
        return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
