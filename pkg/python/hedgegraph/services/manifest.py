"""
Run manifests for hedgegraph

The manifest id hashes the configuration echo and the input digests only, so
identical runs share an id regardless of when they ran.
"""

import hashlib
import json
from collections.abc import Iterable
from datetime import datetime, timezone
from pathlib import Path

from ..models.manifest import RunManifest

CHUNK_SIZE = 1 << 16


def file_digest(path: str | Path) -> str:
    """SHA-256 of a file, or of every file under a directory in sorted order"""
    path = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in path.rglob("*") if p.is_file()) if path.is_dir() else [path]
    for file in files:
        if path.is_dir():
            digest.update(file.relative_to(path).as_posix().encode())
        with file.open("rb") as handle:
            while chunk := handle.read(CHUNK_SIZE):
                digest.update(chunk)
    return digest.hexdigest()


def manifest_id(config: dict, inputs: dict[str, str]) -> str:
    payload = json.dumps(
        {"config": config, "inputs": inputs}, sort_keys=True, default=str
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def build_manifest(
    command: str,
    config: dict,
    input_paths: dict[str, str | Path] | None = None,
    version: str | None = None,
    unhashed: Iterable[str] = (),
) -> RunManifest:
    """
    Manifest echoing every entry of ``config``.

    Keys in ``unhashed`` (paths, thread counts, verbosity) stay in the echo
    but are left out of the id; inputs are identified by content instead.
    """
    if version is None:
        from .. import __version__ as version

    inputs = {name: file_digest(p) for name, p in (input_paths or {}).items()}
    skip = set(unhashed)
    hashed = {k: v for k, v in config.items() if k not in skip}
    return RunManifest(
        manifest_id=manifest_id({"command": command, **hashed}, inputs),
        command=command,
        config=config,
        inputs=inputs,
        version=version,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def write_manifest(manifest: RunManifest, out_dir: str | Path) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n")
    return path


def write_json(payload: dict, path: str | Path) -> Path:
    """Sorted-key JSON with a trailing newline"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path
