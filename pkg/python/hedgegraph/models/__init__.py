"""Domain models for hedgegraph"""

from .allocation import (
    AllocationParams,
    AllocationResult,
    Diagnostics,
    Formulation,
    Method,
)
from .backtest import (
    BacktestReport,
    BacktestRow,
    EpsilonRule,
    EpsilonRuleKind,
    PipelineConfig,
    PipelineResult,
)
from .estimate import CovEstimate, EstimateKind, estimate_from_matrix
from .graph import Bipartition, Edge, EdgeSign, SignedGraph, TriangleCensus
from .hedge import HedgeReport, Selection
from .manifest import RunManifest
from .panel import PricePanel, ReturnKind, ReturnPanel, WindowSpec, year_windows

__all__ = [
    "AllocationParams",
    "AllocationResult",
    "BacktestReport",
    "BacktestRow",
    "Bipartition",
    "CovEstimate",
    "Diagnostics",
    "Edge",
    "EdgeSign",
    "EpsilonRule",
    "EpsilonRuleKind",
    "EstimateKind",
    "Formulation",
    "HedgeReport",
    "Method",
    "PipelineConfig",
    "PipelineResult",
    "PricePanel",
    "ReturnKind",
    "ReturnPanel",
    "RunManifest",
    "Selection",
    "SignedGraph",
    "TriangleCensus",
    "WindowSpec",
    "estimate_from_matrix",
    "year_windows",
]
