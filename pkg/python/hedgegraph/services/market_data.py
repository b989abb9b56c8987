"""
Market data service for hedgegraph: CSV ingest, return computation,
window slicing and synthetic panels
"""

import logging
from datetime import date
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config.settings import settings
from ..models.panel import PricePanel, ReturnKind, ReturnPanel, WindowSpec
from ..utils.error_handling import (
    DataError,
    EmptyWindowError,
    ErrorCode,
    NumericalError,
    ValidationError,
)
from ..utils.vector_utils import format_float

logger = logging.getLogger(__name__)

SYNTH_START = "2020-01-01"


class Layout(str, Enum):
    WIDE = "wide"
    PER_TICKER = "per-ticker"


class IngestStats(BaseModel):
    """Rows kept and dropped while building a panel"""

    source: str
    rows_kept: int
    rows_dropped: int = 0
    tickers: int


def _unreadable(path: Path, exc: Exception) -> DataError:
    return DataError(
        f"Cannot read {path}: {exc}", ErrorCode.FILE_UNREADABLE, {"path": str(path)}
    )


def _parse_dates(raw: pd.Series) -> pd.Series:
    # Keep the calendar date only; any time or zone suffix is discarded
    text = raw.astype(str).str.strip().str.slice(0, 10)
    return pd.to_datetime(text, format="%Y-%m-%d", errors="coerce")


def _to_panel(frame: pd.DataFrame) -> PricePanel:
    frame = frame.sort_index()
    frame = frame[sorted(frame.columns)]
    return PricePanel(
        dates=tuple(ts.date() for ts in frame.index),
        tickers=tuple(frame.columns),
        prices=frame.to_numpy(dtype=float),
    )


def _read_wide(path: Path) -> tuple[PricePanel, IngestStats]:
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise _unreadable(path, exc) from exc
    except pd.errors.EmptyDataError as exc:
        raise DataError(
            f"{path} is empty", ErrorCode.EMPTY_PANEL, {"path": str(path)}
        ) from exc

    header = [str(h).strip() for h in raw.iloc[0]]
    if header[0] != "Date" or len(header) < 2:
        raise DataError(
            f"{path}: header must be 'Date,<ticker>,...', got {header[:3]}",
            ErrorCode.MALFORMED_INPUT,
            {"path": str(path)},
        )
    tickers = header[1:]
    dupes = sorted({t for t in tickers if tickers.count(t) > 1})
    if dupes:
        raise DataError(
            f"{path}: duplicate ticker columns {dupes}",
            ErrorCode.DUPLICATE_TICKER,
            {"path": str(path), "tickers": dupes},
        )

    body = raw.iloc[1:]
    blank = body.iloc[:, 0].str.strip() == ""
    dates = _parse_dates(body.iloc[:, 0])
    unparseable = dates.isna() & ~blank
    if unparseable.any():
        bad = body.iloc[:, 0][unparseable].iloc[0]
        raise DataError(
            f"{path}: unparseable date '{bad}'",
            ErrorCode.MALFORMED_INPUT,
            {"path": str(path), "value": bad},
        )
    body, dates = body[~blank], dates[~blank]

    prices = body.iloc[:, 1:].apply(pd.to_numeric, errors="coerce")
    prices.columns = tickers
    prices.index = pd.DatetimeIndex(dates)
    usable = (np.isfinite(prices) & (prices > 0)).all(axis=1)
    dropped = int(blank.sum()) + int((~usable).sum())
    prices = prices[usable]
    if dropped:
        logger.warning("Dropped %d row(s) with missing dates or prices from %s", dropped, path)
    if prices.empty:
        raise DataError(
            f"{path}: no usable rows", ErrorCode.EMPTY_PANEL, {"path": str(path)}
        )
    if prices.index.has_duplicates:
        raise DataError(
            f"{path}: duplicate dates", ErrorCode.DUPLICATE_DATE, {"path": str(path)}
        )

    panel = _to_panel(prices)
    stats = IngestStats(
        source=str(path),
        rows_kept=panel.n_rows,
        rows_dropped=dropped,
        tickers=panel.n_assets,
    )
    return panel, stats


def ingest_wide_csv(path: str | Path) -> PricePanel:
    """
    Read a ``Date,<T1>,<T2>,...`` price file into a :class:`PricePanel`.

    Rows with any missing or non-positive price are dropped and counted.
    """
    panel, _ = _read_wide(Path(path))
    return panel


def _read_ticker_file(path: Path, price_column: str) -> tuple[pd.Series, int]:
    try:
        frame = pd.read_csv(path)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise _unreadable(path, exc) from exc
    except pd.errors.EmptyDataError as exc:
        raise DataError(
            f"{path.name} is empty", ErrorCode.EMPTY_PANEL, {"file": path.name}
        ) from exc

    frame.columns = [str(c).strip() for c in frame.columns]
    for column in ("Date", price_column):
        if column not in frame.columns:
            raise DataError(
                f"{path.name} has no '{column}' column",
                ErrorCode.MISSING_COLUMN,
                {"file": path.name, "column": column},
            )

    series = pd.Series(
        pd.to_numeric(frame[price_column], errors="coerce").to_numpy(),
        index=pd.DatetimeIndex(_parse_dates(frame["Date"])),
        name=path.stem,
    )
    usable = series.index.notna() & np.isfinite(series.to_numpy()) & (series > 0).to_numpy()
    dropped = int((~usable).sum())
    series = series[usable]
    if series.index.has_duplicates:
        raise DataError(
            f"{path.name}: duplicate dates",
            ErrorCode.DUPLICATE_DATE,
            {"file": path.name},
        )
    return series, dropped


def _read_per_ticker(directory: Path, price_column: str) -> tuple[PricePanel, IngestStats]:
    if not directory.is_dir():
        raise DataError(
            f"{directory} is not a directory",
            ErrorCode.FILE_UNREADABLE,
            {"path": str(directory)},
        )
    files = sorted(directory.glob("*.csv"))
    if not files:
        raise DataError(
            f"{directory} contains no CSV files",
            ErrorCode.EMPTY_DIRECTORY,
            {"path": str(directory)},
        )

    series, dropped = [], 0
    for path in files:
        s, d = _read_ticker_file(path, price_column)
        series.append(s)
        dropped += d
        logger.debug("Loaded %s: %d rows", path.name, len(s))

    joined = pd.concat(series, axis=1, join="inner")
    if joined.empty:
        raise DataError(
            f"No dates shared by all {len(files)} files in {directory}",
            ErrorCode.NO_COMMON_DATES,
            {"path": str(directory)},
        )
    if dropped:
        logger.warning("Dropped %d unusable row(s) across %s", dropped, directory)

    panel = _to_panel(joined)
    stats = IngestStats(
        source=str(directory),
        rows_kept=panel.n_rows,
        rows_dropped=dropped,
        tickers=panel.n_assets,
    )
    return panel, stats


def ingest_per_ticker_dir(
    directory: str | Path, price_column: str | None = None
) -> PricePanel:
    """
    Inner-join one ``<TICKER>.csv`` per asset on ``Date``.

    Each file needs a ``Date`` column and ``price_column`` (default ``Close``).
    """
    price_column = price_column or settings.DEFAULT_PRICE_COLUMN
    panel, _ = _read_per_ticker(Path(directory), price_column)
    return panel


def ingest(
    path: str | Path, layout: Layout = Layout.WIDE, price_column: str | None = None
) -> tuple[PricePanel, IngestStats]:
    """Ingest either layout and report the row tally"""
    path = Path(path)
    if layout == Layout.PER_TICKER:
        return _read_per_ticker(path, price_column or settings.DEFAULT_PRICE_COLUMN)
    return _read_wide(path)


def write_wide_csv(panel: PricePanel | ReturnPanel, path: str | Path) -> Path:
    """Emit a panel as wide CSV with ``\\n`` line endings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        panel.matrix,
        index=[d.isoformat() for d in panel.dates],
        columns=list(panel.tickers),
    )
    frame.to_csv(
        path,
        index_label="Date",
        float_format=format_float,
        lineterminator="\n",
    )
    return path


def compute_returns(
    prices: PricePanel, kind: ReturnKind = ReturnKind.LINEAR, horizon: int = 1
) -> ReturnPanel:
    """
    Per-period returns over ``horizon`` rows, dated by the later endpoint.

    Linear: (p[t+h] - p[t]) / p[t]; Log: ln p[t+h] - ln p[t].
    """
    if horizon < 1:
        raise ValidationError(f"Horizon must be positive, got {horizon}")
    if prices.n_rows < horizon + 1:
        raise ValidationError(
            f"Need at least {horizon + 1} price rows, got {prices.n_rows}",
            ErrorCode.TOO_FEW_ROWS,
        )
    p = prices.prices
    if kind == ReturnKind.LOG:
        values = np.log(p[horizon:]) - np.log(p[:-horizon])
    else:
        values = (p[horizon:] - p[:-horizon]) / p[:-horizon]
    return ReturnPanel(
        dates=prices.dates[horizon:],
        tickers=prices.tickers,
        returns=values,
        kind=kind,
    )


def slice_panel(panel: ReturnPanel, window: WindowSpec) -> ReturnPanel:
    """Rows with ``window.start <= date <= window.end``; tickers unchanged"""
    mask = window.contains(panel.date_array)
    if not mask.any():
        raise EmptyWindowError(
            window.label, window.start.isoformat(), window.end.isoformat()
        )
    return ReturnPanel(
        dates=tuple(d for d, keep in zip(panel.dates, mask, strict=True) if keep),
        tickers=panel.tickers,
        returns=panel.returns[mask],
        kind=panel.kind,
    )


def full_window(panel: ReturnPanel, label: str = "full") -> WindowSpec:
    return WindowSpec(label=label, start=panel.dates[0], end=panel.dates[-1])


# Synthetic panels


class _Recipe(BaseModel):
    model_config = ConfigDict(frozen=True)

    volatility: float = Field(default=0.01, gt=0)
    drift: float = 0.0

    def correlation(self, n_assets: int) -> np.ndarray:
        raise NotImplementedError


class Equicorrelated(_Recipe):
    """Every pair shares correlation ``rho``"""

    rho: float = Field(ge=-1, le=1)

    def correlation(self, n_assets: int) -> np.ndarray:
        corr = np.full((n_assets, n_assets), self.rho)
        np.fill_diagonal(corr, 1.0)
        return corr


class BlockCorrelation(_Recipe):
    """Sector-like blocks: ``within`` inside a block, ``between`` across"""

    sizes: tuple[int, ...]
    within: float = Field(ge=-1, le=1)
    between: float = Field(ge=-1, le=1)

    def correlation(self, n_assets: int) -> np.ndarray:
        if sum(self.sizes) != n_assets:
            raise ValidationError(
                f"Block sizes {self.sizes} do not add up to {n_assets} assets"
            )
        block = np.repeat(np.arange(len(self.sizes)), self.sizes)
        corr = np.where(block[:, None] == block[None, :], self.within, self.between)
        np.fill_diagonal(corr, 1.0)
        return corr


class ExplicitCorrelation(_Recipe):
    matrix: tuple[tuple[float, ...], ...]

    @model_validator(mode="after")
    def _check_square(self):
        n = len(self.matrix)
        if any(len(row) != n for row in self.matrix):
            raise ValidationError("Correlation matrix must be square")
        return self

    def correlation(self, n_assets: int) -> np.ndarray:
        corr = np.array(self.matrix, dtype=float)
        if corr.shape != (n_assets, n_assets):
            raise ValidationError(
                f"Correlation matrix is {corr.shape}, expected {n_assets}x{n_assets}",
                ErrorCode.DIMENSION_MISMATCH,
            )
        return corr


CorrelationRecipe = Equicorrelated | BlockCorrelation | ExplicitCorrelation


def _factor(corr: np.ndarray) -> np.ndarray:
    """Square-root factor of a correlation matrix; rejects indefinite input"""
    if not np.allclose(corr, corr.T, atol=1e-12):
        raise ValidationError("Correlation recipe is not symmetric")
    eigvals, eigvecs = np.linalg.eigh(corr)
    if eigvals.min() < -1e-12:
        raise NumericalError(
            f"Correlation recipe is not positive semidefinite "
            f"(min eigenvalue {eigvals.min():.6g})",
            ErrorCode.NOT_PSD,
            {"min_eigenvalue": float(eigvals.min())},
        )
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def _draw(seed: int, n_assets: int, n_rows: int, recipe: CorrelationRecipe) -> np.ndarray:
    if n_assets < 2:
        raise ValidationError(
            f"Synthetic panels need at least 2 assets, got {n_assets}",
            ErrorCode.TOO_FEW_ASSETS,
        )
    factor = _factor(recipe.correlation(n_assets))
    rng = np.random.default_rng(seed)
    shocks = rng.standard_normal((n_rows, n_assets))
    return recipe.drift + recipe.volatility * (shocks @ factor.T)


def _synth_tickers(n_assets: int) -> tuple[str, ...]:
    return tuple(f"S{i:03d}" for i in range(n_assets))


def _synth_dates(n_rows: int, start: str = SYNTH_START) -> tuple[date, ...]:
    return tuple(ts.date() for ts in pd.bdate_range(start, periods=n_rows))


def synth_panel(
    seed: int,
    n_assets: int,
    n_days: int,
    recipe: CorrelationRecipe | None = None,
) -> ReturnPanel:
    """
    Deterministic Gaussian linear-return panel on business days from 2020-01-01
    """
    recipe = recipe or Equicorrelated(rho=0.0)
    if n_days < 2:
        raise ValidationError(
            f"Synthetic panels need at least 2 days, got {n_days}",
            ErrorCode.TOO_FEW_ROWS,
        )
    returns = _draw(seed, n_assets, n_days, recipe)
    return ReturnPanel(
        dates=_synth_dates(n_days),
        tickers=_synth_tickers(n_assets),
        returns=returns,
        kind=ReturnKind.LINEAR,
    )


def synth_price_panel(
    seed: int,
    n_assets: int,
    n_days: int,
    recipe: CorrelationRecipe | None = None,
    start_price: float = 100.0,
    start: str = SYNTH_START,
) -> PricePanel:
    """Prices compounding a synthetic return panel from ``start_price``"""
    recipe = recipe or Equicorrelated(rho=0.0)
    if n_days < 2:
        raise ValidationError(
            f"Synthetic panels need at least 2 days, got {n_days}",
            ErrorCode.TOO_FEW_ROWS,
        )
    returns = _draw(seed, n_assets, n_days - 1, recipe)
    growth = np.cumprod(1.0 + returns, axis=0)
    prices = start_price * np.vstack([np.ones((1, n_assets)), growth])
    return PricePanel(
        dates=_synth_dates(n_days, start),
        tickers=_synth_tickers(n_assets),
        prices=prices,
    )
