"""Helper functions for report emission."""
from __future__ import annotations

import hashlib
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .const import DOMAIN, MANIFEST_FILE, VIOLATION_CONVENTION

_LOGGER = logging.getLogger(__name__)

_PACKAGE_DIR = Path(__file__).parent
FLOAT_FORMAT = "%.17g"


@lru_cache(maxsize=1)
def get_library_info() -> dict[str, Any]:
    """Name and version from the package manifest."""
    with open(_PACKAGE_DIR / "manifest.json", encoding="utf-8") as handle:
        manifest = json.load(handle)
    return {"name": manifest.get("domain", DOMAIN), "version": manifest.get("version", "0")}


@lru_cache(maxsize=1)
def get_translations() -> dict[str, Any]:
    """English messages for errors and report annotations."""
    with open(_PACKAGE_DIR / "translations" / "en.json", encoding="utf-8") as handle:
        return json.load(handle)


def get_error_message(key: str) -> str:
    """One-line message for an error key."""
    errors = get_translations()["error"]
    return errors.get(key, errors["unknown"])


def get_annotation(kind: str, variant: str | None = None) -> str:
    """Qualitative expectation recorded next to a recipe's results."""
    note = get_translations()["annotation"].get(kind, "")
    if isinstance(note, dict):
        return note.get(variant or "", "")
    return note


def _plain(value: Any) -> Any:
    """Convert numpy scalars and arrays to JSON values; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return repr(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    """Write sorted, indented JSON ending with a newline."""
    text = json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")
    _LOGGER.debug("Wrote %s", path)
    return path


def write_frame(path: Path, frame: pd.DataFrame) -> Path:
    """Write a CSV with 17 significant digits and LF line endings."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _LOGGER.debug("Wrote %s (%d rows)", path, len(frame))
    return path


def sha256_file(path: Path) -> str:
    """Hex sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir: Path, config_digest: str, rng: dict[str, Any], kind: str,
                   files: list[Path]) -> Path:
    """List every emitted file with its content hash, plus the run provenance."""
    payload = {
        "kind": kind,
        "config_sha256": config_digest,
        "rng": rng,
        "library": get_library_info(),
        "violation_convention": VIOLATION_CONVENTION,
        "files": {path.name: sha256_file(path) for path in sorted(files, key=lambda p: p.name)},
    }
    return write_json(out_dir / MANIFEST_FILE, payload)
