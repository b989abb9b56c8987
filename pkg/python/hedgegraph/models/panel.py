"""
Price and return panel models for hedgegraph
"""

from collections import Counter
from collections.abc import Iterable
from datetime import date
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..utils.error_handling import DataError, ErrorCode, ValidationError


def _frozen_matrix(value) -> np.ndarray:
    matrix = np.array(value, dtype=float)
    if matrix.ndim == 1 and matrix.size == 0:
        matrix = matrix.reshape(0, 0)
    if matrix.ndim != 2:
        raise ValidationError(
            f"Expected a 2-D matrix, got {matrix.ndim} dimensions",
            ErrorCode.DIMENSION_MISMATCH,
        )
    matrix.flags.writeable = False
    return matrix


class ReturnKind(str, Enum):
    """How per-period returns are computed from prices"""

    LINEAR = "linear"
    LOG = "log"


class _Panel(BaseModel):
    """Shared shape checks for date x ticker matrices"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dates: tuple[date, ...]
    tickers: tuple[str, ...]

    @model_validator(mode="after")
    def _check_axes(self):
        if len(set(self.tickers)) != len(self.tickers):
            dupes = sorted(t for t, n in Counter(self.tickers).items() if n > 1)
            raise DataError(
                f"Duplicate tickers: {dupes}",
                ErrorCode.DUPLICATE_TICKER,
                {"tickers": dupes},
            )
        if any(b <= a for a, b in zip(self.dates, self.dates[1:], strict=False)):
            raise DataError(
                "Dates must be strictly increasing", ErrorCode.DUPLICATE_DATE
            )
        values = self.matrix
        if values.shape != (len(self.dates), len(self.tickers)):
            raise ValidationError(
                f"Matrix shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers",
                ErrorCode.DIMENSION_MISMATCH,
            )
        return self

    @property
    def matrix(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    @property
    def date_array(self) -> np.ndarray:
        return np.array(self.dates, dtype="datetime64[D]")

    def column(self, ticker: str) -> np.ndarray:
        try:
            idx = self.tickers.index(ticker)
        except ValueError:
            raise DataError(
                f"Ticker '{ticker}' not in panel",
                ErrorCode.MISSING_TICKER,
                {"ticker": ticker},
            ) from None
        return self.matrix[:, idx]


class PricePanel(_Panel):
    """T x N matrix of positive close prices"""

    prices: np.ndarray

    prices_as_matrix = field_validator("prices", mode="before")(_frozen_matrix)

    @model_validator(mode="after")
    def _check_prices(self):
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise DataError(
                "Prices must be finite and strictly positive",
                ErrorCode.MALFORMED_INPUT,
            )
        return self

    @property
    def matrix(self) -> np.ndarray:
        return self.prices


class ReturnPanel(_Panel):
    """T x N matrix of per-period returns"""

    returns: np.ndarray
    kind: ReturnKind = ReturnKind.LINEAR

    returns_as_matrix = field_validator("returns", mode="before")(_frozen_matrix)

    @model_validator(mode="after")
    def _check_returns(self):
        if not np.all(np.isfinite(self.returns)):
            raise ValidationError("Returns must be finite", ErrorCode.MALFORMED_INPUT)
        if self.kind == ReturnKind.LINEAR and np.any(self.returns <= -1.0):
            raise ValidationError(
                "Linear returns must be greater than -1", ErrorCode.MALFORMED_INPUT
            )
        return self

    @property
    def matrix(self) -> np.ndarray:
        return self.returns

    def restrict(self, tickers: Iterable[str]) -> "ReturnPanel":
        """Keep only ``tickers``, in the order given"""
        tickers = tuple(tickers)
        idx = [self.tickers.index(t) for t in tickers if t in self.tickers]
        if len(idx) != len(tickers):
            missing = sorted(set(tickers) - set(self.tickers))
            raise DataError(
                f"Tickers not in panel: {missing}",
                ErrorCode.MISSING_TICKER,
                {"tickers": missing},
            )
        return ReturnPanel(
            dates=self.dates,
            tickers=tickers,
            returns=self.returns[:, idx],
            kind=self.kind,
        )


class WindowSpec(BaseModel):
    """Inclusive calendar window, e.g. one calendar year"""

    model_config = ConfigDict(frozen=True)

    label: str
    start: date
    end: date

    @model_validator(mode="after")
    def _check_order(self):
        if self.start > self.end:
            raise ValidationError(
                f"Window '{self.label}' starts after it ends",
                details={"start": self.start.isoformat(), "end": self.end.isoformat()},
            )
        return self

    @classmethod
    def year(cls, year: int) -> "WindowSpec":
        return cls(label=str(year), start=date(year, 1, 1), end=date(year, 12, 31))

    @classmethod
    def parse(cls, text: str) -> "WindowSpec":
        """Parse ``2021`` or ``2021-01-01:2021-06-30``"""
        text = text.strip()
        try:
            if ":" in text:
                start, end = (part.strip() for part in text.split(":", 1))
                return cls(
                    label=text,
                    start=date.fromisoformat(start),
                    end=date.fromisoformat(end),
                )
            return cls.year(int(text))
        except ValueError as exc:
            raise ValidationError(
                f"Cannot parse window '{text}': expected YYYY or START:END",
                details={"window": text},
            ) from exc

    def contains(self, dates: np.ndarray) -> np.ndarray:
        """Boolean mask of ``dates`` (datetime64[D]) inside the window"""
        lo = np.datetime64(self.start, "D")
        hi = np.datetime64(self.end, "D")
        return (dates >= lo) & (dates <= hi)


def year_windows(years_arg: str | Iterable[str | int]) -> list[WindowSpec]:
    """
    Expand ``"2020:2024"`` or a list of years into consecutive yearly windows
    """
    if isinstance(years_arg, str):
        parts = years_arg.split(":")
        try:
            if len(parts) == 2:
                first, last = int(parts[0]), int(parts[1])
                years = list(range(first, last + 1))
            else:
                years = [int(y) for y in years_arg.replace(",", " ").split()]
        except ValueError as exc:
            raise ValidationError(
                f"Cannot parse years '{years_arg}'", details={"years": years_arg}
            ) from exc
    else:
        years = [int(y) for y in years_arg]
    if not years:
        raise ValidationError("No years given")
    return [WindowSpec.year(y) for y in sorted(set(years))]
