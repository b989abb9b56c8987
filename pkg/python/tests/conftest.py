"""
Shared fixtures for the hedgegraph test suite
"""

from datetime import date

import numpy as np
import pandas as pd
import pytest

from hedgegraph.models.panel import ReturnKind, ReturnPanel
from hedgegraph.services.market_data import (
    Equicorrelated,
    synth_panel,
    synth_price_panel,
    write_wide_csv,
)

# Business days from 2020-01-01 that reach into late 2024
FIVE_YEARS_OF_DAYS = 1300


def make_panel(
    returns,
    tickers=None,
    start: str = "2020-01-01",
    kind: ReturnKind = ReturnKind.LINEAR,
) -> ReturnPanel:
    """Return panel on consecutive business days"""
    returns = np.asarray(returns, dtype=float)
    n_rows, n_assets = returns.shape
    if tickers is None:
        tickers = tuple(f"A{i}" for i in range(n_assets))
    dates = tuple(ts.date() for ts in pd.bdate_range(start, periods=n_rows))
    return ReturnPanel(dates=dates, tickers=tuple(tickers), returns=returns, kind=kind)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def multi_year_panel() -> ReturnPanel:
    """Eight assets, 2020 through 2024, mildly correlated"""
    return synth_panel(
        seed=7,
        n_assets=8,
        n_days=FIVE_YEARS_OF_DAYS,
        recipe=Equicorrelated(rho=0.2, volatility=0.012, drift=0.0004),
    )


@pytest.fixture
def price_csv(tmp_path):
    """Wide price CSV for six synthetic assets covering 2020-2024"""
    panel = synth_price_panel(
        seed=11,
        n_assets=6,
        n_days=FIVE_YEARS_OF_DAYS,
        recipe=Equicorrelated(rho=0.1, volatility=0.01, drift=0.0003),
    )
    path = tmp_path / "prices.csv"
    write_wide_csv(panel, path)
    return path


@pytest.fixture
def jan_2021() -> date:
    return date(2021, 1, 4)


@pytest.fixture
def thread_budget(monkeypatch):
    """Raise HG_THREADS to 8 for the duration of a test"""
    from hedgegraph.config.settings import settings

    monkeypatch.setattr(settings, "HG_THREADS", 8)
    return 8
