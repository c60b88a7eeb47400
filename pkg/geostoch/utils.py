"""Shared utilities for the experiment harness."""

import hashlib
import json
from pathlib import Path
from typing import Any

PACKAGE_DIR = Path(__file__).resolve().parent


def resolve_path(path: str | None, default: str = "results") -> Path:
    """Resolve a path against the cwd; default to <cwd>/<default>."""
    if path is None:
        return Path.cwd() / default
    p = Path(path)
    if not p.is_absolute():
        p = Path.cwd() / p
    return p


def canonical_json(payload: Any) -> str:
    """Key-sorted, whitespace-free JSON used for hashing."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def content_hash(config: dict[str, Any], package_dir: Path = PACKAGE_DIR) -> str:
    """
    sha256 over the package sources (sorted by relative path) and the canonical config.
    Changes to either code or configuration change the hash.
    """
    digest = hashlib.sha256()
    for src in sorted(package_dir.rglob("*.py")):
        digest.update(src.relative_to(package_dir).as_posix().encode("utf-8"))
        digest.update(src.read_bytes())
    digest.update(canonical_json(config).encode("utf-8"))
    return digest.hexdigest()
