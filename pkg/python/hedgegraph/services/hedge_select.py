"""
Hedge scores and top-K universe reduction for hedgegraph

The hedge score of asset n over a window of T days is the share of
(day, other asset) pairs where n's demeaned return moves against the other
asset's, i.e. the average negative degree of n in the daily sign graphs,
normalized by T (N - 1).
"""

import logging
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

from ..config.settings import worker_count
from ..models.hedge import HedgeReport, Selection
from ..models.panel import ReturnPanel, WindowSpec
from ..utils.error_handling import ErrorCode, ValidationError
from ..utils.vector_utils import format_float
from .market_data import full_window, slice_panel

logger = logging.getLogger(__name__)


def _count_block(signs: np.ndarray) -> np.ndarray:
    """Per-asset negative-edge counts summed over the days in ``signs``"""
    n_pos = (signs > 0).sum(axis=1, keepdims=True)
    n_neg = (signs < 0).sum(axis=1, keepdims=True)
    # Above-mean assets oppose every below-mean one and vice versa; zeros oppose none
    counts = np.where(signs > 0, n_neg, np.where(signs < 0, n_pos, 0))
    return counts.sum(axis=0, dtype=np.int64)


def negative_counts(deviations: np.ndarray, workers: int | None = None) -> np.ndarray:
    """
    Integer negative-degree totals over all days, optionally split across threads.

    Days are partitioned into contiguous blocks; integer sums make the result
    independent of the partition.
    """
    workers = worker_count(workers)
    signs = np.sign(deviations).astype(np.int8)
    if workers <= 1 or signs.shape[0] < 2:
        return _count_block(signs)

    blocks = np.array_split(signs, min(workers, signs.shape[0]), axis=0)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        partials = list(pool.map(_count_block, blocks))
    return np.sum(partials, axis=0, dtype=np.int64)


def hedge_scores(
    panel: ReturnPanel,
    window: WindowSpec | None = None,
    workers: int | None = None,
) -> HedgeReport:
    """
    Hedge score H(n, T) and window mean for every asset of ``panel``.

    Each column is demeaned by its own mean over the panel; pass a ``window``
    to slice first.
    """
    if window is not None:
        panel = slice_panel(panel, window)
    else:
        window = full_window(panel)

    t, n = panel.returns.shape
    if t < 2:
        raise ValidationError(
            f"Hedge scores need at least 2 days, got {t}", ErrorCode.TOO_FEW_ROWS
        )
    if n < 2:
        raise ValidationError(
            f"Hedge scores need at least 2 assets, got {n}", ErrorCode.TOO_FEW_ASSETS
        )

    means = panel.returns.mean(axis=0)
    deviations = panel.returns - means
    # A constant column sits exactly on its mean every day
    deviations[:, np.ptp(panel.returns, axis=0) == 0] = 0.0

    counts = negative_counts(deviations, workers)
    scores = counts / float(t * (n - 1))
    logger.debug("Hedge scores over %s: %d days x %d assets", window.label, t, n)

    return HedgeReport(
        tickers=panel.tickers,
        scores=scores,
        means=means,
        negative_counts=counts,
        window=window,
        sample_size=t,
    )


def _ranking(report: HedgeReport) -> np.ndarray:
    """Indices by descending score*mean, ties by ascending ticker"""
    tickers = np.array(report.tickers, dtype=object)
    # lexsort uses the last key as primary
    return np.lexsort((tickers, -report.products))


def select_top_k(report: HedgeReport, k: int) -> Selection:
    """
    The K assets maximizing the sum of H(n, T) * mu_n.

    The objective is separable, so sorting the per-asset products solves it in
    O(N log N). Negative products are still taken when K forces it.
    """
    n = len(report.tickers)
    if not 1 <= k <= n:
        raise ValidationError(
            f"k must lie in 1..{n}, got {k}",
            ErrorCode.K_OUT_OF_RANGE,
            {"k": k, "n": n},
        )
    order = _ranking(report)[:k]
    chosen = sorted(report.tickers[i] for i in order)
    return Selection(
        chosen=tuple(chosen),
        k=k,
        objective=float(report.products[order].sum()),
        window_label=report.window.label,
    )


def select_unconstrained(report: HedgeReport) -> Selection:
    """Subset maximizing the objective with no size constraint: all positive terms"""
    products = report.products
    idx = np.flatnonzero(products > 0)
    chosen = sorted(report.tickers[i] for i in idx)
    return Selection(
        chosen=tuple(chosen),
        k=len(chosen),
        objective=float(products[idx].sum()) if idx.size else 0.0,
        window_label=report.window.label,
    )


def hedge_table(
    panel: ReturnPanel,
    windows: Iterable[WindowSpec],
    include_full: bool = True,
    workers: int | None = None,
) -> list[HedgeReport]:
    """Hedge reports per window, optionally followed by the whole panel"""
    reports = [hedge_scores(panel, w, workers) for w in windows]
    if include_full:
        reports.append(hedge_scores(panel, None, workers))
    return reports


def selection_table(
    panel: ReturnPanel,
    windows: Iterable[WindowSpec],
    ks: Iterable[int],
    workers: int | None = None,
) -> dict[str, dict[int, Selection]]:
    """Top-K selections per window label and K"""
    ks = sorted(set(ks))
    table: dict[str, dict[int, Selection]] = {}
    for window in windows:
        report = hedge_scores(panel, window, workers)
        table[window.label] = {k: select_top_k(report, k) for k in ks}
    return table


def _hedge_frame(report: HedgeReport) -> pd.DataFrame:
    order = _ranking(report)
    return pd.DataFrame(
        {
            "ticker": [report.tickers[i] for i in order],
            "hedge_score": report.scores[order],
            "mean_return": report.means[order],
            "product": report.products[order],
        }
    )


def _write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=format_float, lineterminator="\n")
    return path


def write_hedge_csv(report: HedgeReport, path: str | Path) -> Path:
    """``ticker,hedge_score,mean_return,product`` sorted by product descending"""
    return _write_csv(_hedge_frame(report), path)


def write_hedge_table_csv(reports: Iterable[HedgeReport], path: str | Path) -> Path:
    """Stacked per-window reports with a leading ``window`` column, windows in order"""
    frames = [_hedge_frame(r).assign(window=r.window.label) for r in reports]
    frame = pd.concat(frames, ignore_index=True)
    return _write_csv(frame[["window", *frames[0].columns[:-1]]], path)
