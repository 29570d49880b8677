"""Run manifests: provenance records emitted next to every output artifact."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path


def file_digest(path) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def write_manifest(
    out_dir,
    subcommand: str,
    config: dict,
    seed: int | None,
    outputs: list,
    inputs: list = (),
    name: str = "manifest.json",
) -> Path:
    """Record resolved config, seed and file digests for a command run.

    The timestamp varies between runs; output digests are the reproducibility
    contract (identical config + seed => identical digests).
    """
    from . import __version__

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(p): file_digest(p) for p in outputs},
    }
    path = out_dir / name
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
