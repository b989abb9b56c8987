"""
Backtest protocol for hedgegraph

Portfolios are formed on one window and held with fixed weights (rebalanced
daily) over the next. Each (window pair, configuration) cell yields total,
annual return, annual volatility and Sharpe ratio.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError as PydanticValidationError

from ..config.settings import settings, worker_count
from ..models.allocation import AllocationResult, Formulation, Method
from ..models.backtest import (
    BacktestReport,
    BacktestRow,
    EpsilonRule,
    EpsilonRuleKind,
    PipelineConfig,
    PipelineResult,
)
from ..models.panel import ReturnKind, ReturnPanel, WindowSpec
from ..utils.error_handling import (
    DataError,
    ErrorCode,
    HedgeGraphException,
    ValidationError,
    handle_exception,
)
from .allocate import allocate, ewp
from .estimators import sample_cov
from .hedge_select import hedge_scores, select_top_k
from .market_data import slice_panel

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "train",
    "test",
    "method",
    "k",
    "total_return_pct",
    "annual_return_pct",
    "annual_vol_pct",
    "sharpe",
]
METRIC_FIELDS = REPORT_COLUMNS[4:]


def epsilon_for(rule: EpsilonRule, means: np.ndarray) -> float:
    """Target return for OMV1 from the training means of the allocation universe"""
    means = np.asarray(means, dtype=float)
    if rule.kind == EpsilonRuleKind.EXPLICIT:
        return float(rule.value)
    if means.size == 0:
        raise ValidationError("No means to derive a target from", ErrorCode.TOO_FEW_ASSETS)
    if rule.kind == EpsilonRuleKind.MAX_MEAN:
        return float(means.max())
    upper = means[means >= np.percentile(means, 75)]
    return float(upper.mean())


def evaluate(
    weights: AllocationResult,
    test_panel: ReturnPanel,
    train_label: str = "",
    test_label: str | None = None,
    method: str | None = None,
    k: int | None = None,
) -> BacktestRow:
    """
    Performance of fixed weights over ``test_panel``.

    Log-return panels are converted to simple returns before weighting.
    """
    missing = sorted(set(weights.tickers) - set(test_panel.tickers))
    if missing:
        raise DataError(
            f"Weighted tickers missing from test panel: {missing}",
            ErrorCode.MISSING_TICKER,
            {"tickers": missing},
        )
    if test_panel.n_rows < 2:
        raise ValidationError(
            f"Evaluation needs at least 2 test days, got {test_panel.n_rows}",
            ErrorCode.TOO_FEW_ROWS,
        )

    returns = test_panel.restrict(weights.tickers).returns
    if test_panel.kind == ReturnKind.LOG:
        returns = np.expm1(returns)
    daily = returns @ weights.weights
    days = settings.ANNUALIZATION_DAYS

    wealth = np.cumprod(1.0 + daily)
    # Wealth at or below zero is a wipe-out; later days no longer matter
    total = -100.0 if np.any(wealth <= 0) else (wealth[-1] - 1.0) * 100.0
    annual = float(daily.mean()) * days * 100.0
    vol = 0.0 if np.ptp(daily) == 0 else float(daily.std(ddof=1)) * math.sqrt(days) * 100.0
    sharpe_defined = vol > 0

    return BacktestRow(
        train_label=train_label,
        test_label=test_label or f"{test_panel.dates[0]}:{test_panel.dates[-1]}",
        method=method or weights.method.value,
        k=k,
        total_return_pct=float(total),
        annual_return_pct=annual,
        annual_vol_pct=vol,
        sharpe=annual / vol if sharpe_defined else 0.0,
        sharpe_defined=sharpe_defined,
    )


def run_pipeline(
    panel: ReturnPanel,
    train: WindowSpec,
    test: WindowSpec,
    cfg: PipelineConfig,
    workers: int | None = None,
) -> PipelineResult:
    """Reduce (optionally), estimate and allocate on ``train``; evaluate on ``test``"""
    if cfg.return_kind != panel.kind:
        raise ValidationError(
            f"Config expects {cfg.return_kind.value} returns, panel holds "
            f"{panel.kind.value}"
        )
    if train.end >= test.start:
        raise ValidationError(
            f"Train window '{train.label}' must end before test window "
            f"'{test.label}' starts"
        )
    train_panel = slice_panel(panel, train)
    test_panel = slice_panel(panel, test)

    selection = None
    universe = panel.tickers
    if cfg.k is not None:
        selection = select_top_k(hedge_scores(train_panel, train, workers), cfg.k)
        universe = selection.chosen

    if cfg.allocator == Method.EWP:
        allocation = ewp(universe)
    else:
        cov = sample_cov(train_panel.restrict(universe))
        epsilon = None
        if cfg.formulation == Formulation.OMV1:
            epsilon = epsilon_for(cfg.epsilon_rule, cov.mean)
        allocation = allocate(cov, cfg.allocator, cfg.formulation, cfg.gamma, epsilon)

    row = evaluate(
        allocation,
        test_panel,
        train_label=train.label,
        test_label=test.label,
        method=cfg.label,
        k=cfg.k,
    )
    return PipelineResult(selection=selection, allocation=allocation, row=row)


def _failed_row(
    train: WindowSpec, test: WindowSpec, cfg: PipelineConfig, exc: HedgeGraphException
) -> BacktestRow:
    return BacktestRow(
        train_label=train.label,
        test_label=test.label,
        method=cfg.label,
        k=cfg.k,
        sharpe_defined=False,
        error=exc.error_code.value,
    )


def run_grid(
    panel: ReturnPanel,
    years: Sequence[WindowSpec],
    cfgs: Sequence[PipelineConfig],
    workers: int | None = None,
    soft_errors: bool = False,
) -> BacktestReport:
    """
    One row per (consecutive window pair, config), ordered by test window,
    method and k.

    With ``soft_errors`` a failing cell becomes a row carrying its error code
    instead of aborting the grid.
    """
    if not cfgs:
        return BacktestReport()
    if len(years) < 2:
        raise ValidationError("A backtest grid needs at least 2 windows")

    windows = sorted(years, key=lambda w: w.start)
    cells = [
        (train, test, cfg)
        for train, test in zip(windows, windows[1:], strict=False)
        for cfg in cfgs
    ]

    def run_cell(cell) -> BacktestRow:
        train, test, cfg = cell
        try:
            return run_pipeline(panel, train, test, cfg, workers=1).row
        except (HedgeGraphException, np.linalg.LinAlgError) as exc:
            if not soft_errors:
                raise
            error = handle_exception(exc)
            logger.warning(
                "Cell %s -> %s %s failed: %s", train.label, test.label, cfg.label, error
            )
            return _failed_row(train, test, cfg, error)

    workers = worker_count(workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(cell) for cell in cells]

    logger.info("Backtest grid: %d cells over %d windows", len(rows), len(windows))
    return BacktestReport(rows=tuple(sorted(rows, key=lambda r: r.sort_key)))


def parse_method(text: str) -> tuple[Method, bool]:
    """``pm+mpns`` -> (MPNS, True); ``ewp`` -> (EWP, False)"""
    name = text.strip().upper()
    reduced = name.startswith("PM+")
    if reduced:
        name = name[3:]
    try:
        return Method(name), reduced
    except ValueError as exc:
        raise ValidationError(
            f"Unknown method '{text}'", details={"method": text}
        ) from exc


def build_configs(
    methods: Iterable[str],
    ks: Iterable[int] = (),
    gamma: float | None = None,
    epsilon_rule: EpsilonRule | None = None,
    return_kind: ReturnKind = ReturnKind.LINEAR,
    formulation: Formulation = Formulation.OMV1,
) -> list[PipelineConfig]:
    """Expand method names and K values into grid configurations"""
    ks = sorted(set(ks))
    rule = epsilon_rule or EpsilonRule()
    configs = []
    for text in methods:
        method, reduced = parse_method(text)
        if reduced and not ks:
            raise ValidationError(f"Method '{text}' needs at least one k")
        for k in ks if reduced else [None]:
            configs.append(
                _config(
                    k=k,
                    allocator=method,
                    gamma=gamma,
                    epsilon_rule=rule,
                    return_kind=return_kind,
                    formulation=formulation,
                )
            )
    return configs


def _config(**fields) -> PipelineConfig:
    try:
        return PipelineConfig.model_validate(fields)
    except PydanticValidationError as exc:
        raise ValidationError(
            f"Invalid pipeline configuration: {exc.errors()[0]['msg']}",
            details={"fields": {k: str(v) for k, v in fields.items()}},
        ) from exc


def load_grid(path: str | Path) -> list[PipelineConfig]:
    """
    Read pipeline configurations from YAML: a list of mappings, or a mapping
    with a ``configs`` list. ``epsilon_rule`` may be a bare rule name.
    """
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise DataError(
            f"Cannot read grid file {path}: {exc}",
            ErrorCode.FILE_UNREADABLE,
            {"path": str(path)},
        ) from exc
    except yaml.YAMLError as exc:
        raise DataError(
            f"Grid file {path} is not valid YAML: {exc}",
            ErrorCode.MALFORMED_INPUT,
            {"path": str(path)},
        ) from exc

    if isinstance(document, dict):
        document = document.get("configs")
    if not isinstance(document, list):
        raise DataError(
            f"Grid file {path} must hold a list of configurations",
            ErrorCode.MALFORMED_INPUT,
            {"path": str(path)},
        )

    configs = []
    for entry in document:
        if not isinstance(entry, dict):
            raise DataError(
                f"Grid entry {entry!r} is not a mapping", ErrorCode.MALFORMED_INPUT
            )
        fields = dict(entry)
        if "allocator" in fields:
            method, reduced = parse_method(str(fields["allocator"]))
            fields["allocator"] = method
            if reduced and fields.get("k") is None:
                raise ValidationError(f"Grid entry {entry!r} needs a k")
        if isinstance(fields.get("epsilon_rule"), str):
            fields["epsilon_rule"] = {"kind": fields["epsilon_rule"]}
        configs.append(_config(**fields))
    return configs


def _cell(value: float | None) -> str:
    if value is None:
        return ""
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def report_frame(report: BacktestReport) -> pd.DataFrame:
    """Report rows as strings, metrics rounded to 2 decimals"""
    records = []
    for row in report.rows:
        record = {
            "train": row.train_label,
            "test": row.test_label,
            "method": row.method,
            "k": "" if row.k is None else str(row.k),
        }
        for field in METRIC_FIELDS:
            record[field] = (
                f"ERR:{row.error}" if row.error else _cell(getattr(row, field))
            )
        records.append(record)
    return pd.DataFrame(records, columns=REPORT_COLUMNS, dtype=str)


def write_report_csv(report: BacktestReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_frame(report).to_csv(path, index=False, lineterminator="\n")
    return path


def write_report_json(report: BacktestReport, path: str | Path) -> Path:
    """Full-precision report"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n")
    return path
