"""
Run manifest model for hedgegraph
"""

from pydantic import BaseModel, ConfigDict


class RunManifest(BaseModel):
    """Provenance record referenced by every emitted report"""

    model_config = ConfigDict(frozen=True)

    manifest_id: str
    command: str
    config: dict
    inputs: dict[str, str]
    version: str
    timestamp: str
