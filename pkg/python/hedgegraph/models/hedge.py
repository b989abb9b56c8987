"""
Hedge score and selection models for hedgegraph
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..utils.error_handling import ErrorCode, ValidationError
from .panel import WindowSpec


def _frozen_array(value) -> np.ndarray:
    array = np.array(value)
    array.flags.writeable = False
    return array


class HedgeReport(BaseModel):
    """Per-asset hedge scores and mean returns over one window"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tickers: tuple[str, ...]
    scores: np.ndarray
    means: np.ndarray
    negative_counts: np.ndarray
    window: WindowSpec
    sample_size: int

    arrays_frozen = field_validator(
        "scores", "means", "negative_counts", mode="before"
    )(_frozen_array)

    @model_validator(mode="after")
    def _check_invariants(self):
        n = len(self.tickers)
        if not (len(self.scores) == len(self.means) == len(self.negative_counts) == n):
            raise ValidationError(
                "tickers, scores, means and counts must have equal length",
                ErrorCode.DIMENSION_MISMATCH,
            )
        if np.any(self.scores < 0) or np.any(self.scores > 1):
            raise ValidationError("Hedge scores must lie in [0, 1]")
        return self

    @property
    def products(self) -> np.ndarray:
        """Per-asset objective terms H(n, T) * mu_n"""
        return self.scores * self.means

    def to_json_dict(self) -> dict:
        return {
            "window": self.window.model_dump(mode="json"),
            "sample_size": self.sample_size,
            "assets": [
                {
                    "ticker": ticker,
                    "hedge_score": float(score),
                    "mean_return": float(mean),
                    "product": float(score * mean),
                    "negative_count": int(count),
                }
                for ticker, score, mean, count in zip(
                    self.tickers,
                    self.scores,
                    self.means,
                    self.negative_counts,
                    strict=True,
                )
            ],
        }


class Selection(BaseModel):
    """Reduced universe chosen from a hedge report"""

    model_config = ConfigDict(frozen=True)

    chosen: tuple[str, ...]
    k: int
    objective: float
    window_label: str | None = None

    @model_validator(mode="after")
    def _check_size(self):
        if len(self.chosen) != self.k:
            raise ValidationError(
                f"Selection of size {len(self.chosen)} declares k={self.k}"
            )
        return self
