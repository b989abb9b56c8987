"""
hedgegraph - signed-graph hedge scores for portfolio selection

Ingests daily price panels, scores how often each asset moves against the
rest, reduces the universe to the best hedgers and backtests Markowitz and
1/N allocations on the result.
"""

__version__ = "1.0.0"

from .models import (
    AllocationResult,
    CovEstimate,
    HedgeReport,
    PipelineConfig,
    PricePanel,
    ReturnPanel,
    Selection,
    SignedGraph,
    WindowSpec,
)

__all__ = [
    "AllocationResult",
    "CovEstimate",
    "HedgeReport",
    "PipelineConfig",
    "PricePanel",
    "ReturnPanel",
    "Selection",
    "SignedGraph",
    "WindowSpec",
    "__version__",
]
