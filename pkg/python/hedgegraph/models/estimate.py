"""
Covariance / correlation estimate model for hedgegraph
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..utils.error_handling import ErrorCode, ValidationError
from ..utils.vector_utils import is_symmetric


class EstimateKind(str, Enum):
    """Scale of an estimator matrix"""

    COVARIANCE = "covariance"
    CORRELATION = "correlation"


def _frozen_array(value) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.flags.writeable = False
    return array


class CovEstimate(BaseModel):
    """N x N symmetric estimator matrix with the paired mean vector"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tickers: tuple[str, ...]
    mean: np.ndarray
    matrix: np.ndarray
    kind: EstimateKind = EstimateKind.COVARIANCE
    sample_size: int

    arrays_frozen = field_validator("mean", "matrix", mode="before")(_frozen_array)

    @model_validator(mode="after")
    def _check_invariants(self):
        n = len(self.tickers)
        if self.matrix.shape != (n, n) or self.mean.shape != (n,):
            raise ValidationError(
                f"Estimate for {n} tickers has matrix {self.matrix.shape} "
                f"and mean {self.mean.shape}",
                ErrorCode.DIMENSION_MISMATCH,
            )
        if self.sample_size < 2:
            raise ValidationError(
                f"Estimates need at least 2 observations, got {self.sample_size}",
                ErrorCode.TOO_FEW_ROWS,
            )
        if not np.all(np.isfinite(self.matrix)) or not np.all(np.isfinite(self.mean)):
            raise ValidationError("Estimate contains non-finite values")
        if not is_symmetric(self.matrix, atol=1e-12):
            raise ValidationError("Estimator matrix is not symmetric")
        diag = np.diag(self.matrix)
        if self.kind == EstimateKind.CORRELATION:
            if not np.all(diag == 1.0) or np.any(np.abs(self.matrix) > 1.0):
                raise ValidationError(
                    "Correlation matrix needs a unit diagonal and entries in [-1, 1]"
                )
        elif np.any(diag < 0):
            raise ValidationError("Covariance matrix has a negative variance")
        return self

    @property
    def n_assets(self) -> int:
        return len(self.tickers)

    def restrict(self, tickers) -> "CovEstimate":
        """Sub-estimate on ``tickers`` in the order given"""
        idx = [self.tickers.index(t) for t in tickers]
        return CovEstimate(
            tickers=tuple(tickers),
            mean=self.mean[idx],
            matrix=self.matrix[np.ix_(idx, idx)],
            kind=self.kind,
            sample_size=self.sample_size,
        )

    def to_json_dict(self) -> dict:
        return {
            "tickers": list(self.tickers),
            "kind": self.kind.value,
            "sample_size": self.sample_size,
            "mean": self.mean.tolist(),
            "matrix": self.matrix.tolist(),
        }


def estimate_from_matrix(
    matrix,
    mean=None,
    tickers=None,
    kind: EstimateKind = EstimateKind.COVARIANCE,
    sample_size: int = 2,
) -> CovEstimate:
    """Wrap an externally supplied matrix as a :class:`CovEstimate`"""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if tickers is None:
        tickers = tuple(f"A{i}" for i in range(n))
    if mean is None:
        mean = np.zeros(n)
    return CovEstimate(
        tickers=tuple(tickers),
        mean=mean,
        matrix=matrix,
        kind=kind,
        sample_size=sample_size,
    )
