"""
Portfolio allocation models for hedgegraph
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.error_handling import ValidationError


class Method(str, Enum):
    """Allocator family as labelled in backtest reports"""

    MP = "MP"  # Markowitz, short selling allowed
    MPNS = "MPNS"  # Markowitz on the simplex (no short selling)
    EWP = "EWP"  # 1/N


class Formulation(str, Enum):
    """Which Markowitz problem MP / MPNS solve"""

    OMV1 = "omv1"  # min variance s.t. target return
    OMV2 = "omv2"  # min -mu'w + gamma w'Sw


class AllocationParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma: float | None = Field(default=None, gt=0)
    epsilon: float | None = None


class Diagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    objective: float = 0.0
    iterations: int = 0
    max_kkt_violation: float = 0.0
    multipliers: tuple[float, ...] = ()
    condition_number: float | None = None


class AllocationResult(BaseModel):
    """Weight vector with method metadata"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    tickers: tuple[str, ...]
    weights: np.ndarray
    method: Method
    formulation: Formulation | None = None
    params: AllocationParams = AllocationParams()
    diagnostics: Diagnostics = Diagnostics()

    @field_validator("weights", mode="before")
    @classmethod
    def _freeze(cls, value):
        weights = np.array(value, dtype=float)
        weights.flags.writeable = False
        return weights

    @model_validator(mode="after")
    def _check_weights(self):
        k = len(self.tickers)
        if self.weights.shape != (k,):
            raise ValidationError(f"{self.weights.shape} weights for {k} tickers")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValidationError(f"Weights sum to {self.weights.sum()!r}, not 1")
        if self.method in (Method.MPNS, Method.EWP) and np.any(self.weights < -1e-12):
            raise ValidationError(f"{self.method.value} weights must be non-negative")
        if self.method == Method.EWP and np.any(np.abs(self.weights - 1.0 / k) > 1e-15):
            raise ValidationError("EWP weights must all equal 1/K")
        return self

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.tickers, self.weights.tolist(), strict=True))

    def to_json_dict(self) -> dict:
        return {
            "method": self.method.value,
            "formulation": self.formulation.value if self.formulation else None,
            "params": self.params.model_dump(),
            "diagnostics": self.diagnostics.model_dump(),
            "weights": self.as_dict(),
        }
