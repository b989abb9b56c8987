"""
Backtest configuration and report models for hedgegraph
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..utils.error_handling import ValidationError
from .allocation import AllocationResult, Formulation, Method
from .hedge import Selection
from .panel import ReturnKind


class EpsilonRuleKind(str, Enum):
    MAX_MEAN = "max-mean"
    Q75_MEAN = "q75-mean"
    EXPLICIT = "value"


class EpsilonRule(BaseModel):
    """How the OMV1 target return is derived from training-window means"""

    model_config = ConfigDict(frozen=True)

    kind: EpsilonRuleKind = EpsilonRuleKind.MAX_MEAN
    value: float | None = None

    @model_validator(mode="after")
    def _check_value(self):
        if self.kind == EpsilonRuleKind.EXPLICIT and self.value is None:
            raise ValidationError("An explicit epsilon rule needs a value")
        return self


class PipelineConfig(BaseModel):
    """One column of the backtest table: optional reduction plus an allocator"""

    model_config = ConfigDict(frozen=True)

    k: int | None = Field(default=None, ge=1)
    allocator: Method = Method.EWP
    gamma: float | None = Field(default=None, gt=0)
    epsilon_rule: EpsilonRule = EpsilonRule()
    return_kind: ReturnKind = ReturnKind.LINEAR
    formulation: Formulation = Formulation.OMV1

    @model_validator(mode="after")
    def _check_gamma(self):
        if (
            self.allocator != Method.EWP
            and self.formulation == Formulation.OMV2
            and self.gamma is None
        ):
            raise ValidationError("OMV2 allocations need a risk aversion gamma")
        return self

    @property
    def label(self) -> str:
        """Report label, e.g. ``PM+MPNS`` for a reduced universe"""
        prefix = "PM+" if self.k is not None else ""
        return f"{prefix}{self.allocator.value}"


class BacktestRow(BaseModel):
    """Four performance statistics for one (year pair, method, K) cell"""

    model_config = ConfigDict(frozen=True)

    train_label: str
    test_label: str
    method: str
    k: int | None = None
    total_return_pct: float | None = None
    annual_return_pct: float | None = None
    annual_vol_pct: float | None = None
    sharpe: float | None = None
    sharpe_defined: bool = True
    error: str | None = None

    @model_validator(mode="after")
    def _check_metrics(self):
        if self.error is not None:
            return self
        if self.total_return_pct is not None and self.total_return_pct < -100.0:
            raise ValidationError("Total return cannot fall below -100%")
        if self.annual_vol_pct is not None and self.annual_vol_pct < 0:
            raise ValidationError("Annual volatility cannot be negative")
        return self

    @property
    def sort_key(self) -> tuple:
        return (self.test_label, self.method, -1 if self.k is None else self.k)


class BacktestReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: tuple[BacktestRow, ...] = ()
    manifest_id: str | None = None


class PipelineResult(BaseModel):
    """Everything one pipeline run produced"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    selection: Selection | None
    allocation: AllocationResult
    row: BacktestRow
