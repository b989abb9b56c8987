"""
Configuration settings for hedgegraph
"""

try:
    from pydantic_settings import BaseSettings
except ImportError:
    from pydantic import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Parallelism
    HG_THREADS: int = Field(
        default=1, ge=1, description="Cap on worker threads for counting and grids"
    )

    # Numerical tolerances
    ZERO_EDGE_CUTOFF: float = Field(
        default=1e-15,
        description="Matrix entries with |x| <= cutoff produce no graph edge",
    )
    CONDITION_LIMIT: float = Field(
        default=1e12, description="Covariance condition number treated as singular"
    )
    KKT_TOLERANCE: float = Field(
        default=1e-8, description="Maximum KKT violation accepted from the QP solver"
    )
    WEIGHT_SNAP: float = Field(
        default=1e-12, description="Weights below this magnitude are snapped to 0"
    )
    ALLOW_JITTER: bool = Field(
        default=False, description="Regularize near-singular covariance matrices"
    )
    JITTER_SCALE: float = Field(
        default=1e-10, description="Diagonal jitter as a fraction of trace/N"
    )

    # Backtest conventions
    ANNUALIZATION_DAYS: int = Field(
        default=252, description="Trading days used to annualize daily statistics"
    )

    # Input / output
    DEFAULT_PRICE_COLUMN: str = Field(
        default="Close", description="Price column read from per-ticker CSV files"
    )
    CSV_SIGNIFICANT_DIGITS: int = Field(
        default=12, description="Significant digits for floats in emitted CSVs"
    )
    OUT_DIR: str = Field(default="results", description="Default output directory")

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_FILE: str | None = Field(default=None, description="File to write logs to")
    LOG_FORMAT: str = Field(
        default="emoji", description="Logging format: plain, emoji, or json"
    )
    HEDGEGRAPH_NO_EMOJI: bool = Field(
        default=False, description="Disable emoji/ANSI logging output (opt-out)"
    )

    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore",
    }


def get_settings():
    """Get the settings instance, creating it if necessary."""
    return Settings()


settings = get_settings()


def worker_count(requested: int | None = None) -> int:
    """Threads to use: ``requested`` (default HG_THREADS), never above HG_THREADS."""
    limit = settings.HG_THREADS
    return max(1, min(requested or limit, limit))
