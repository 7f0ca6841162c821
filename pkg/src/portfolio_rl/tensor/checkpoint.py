"""
Checkpoint format: `manifest.json` (name, shape, offset per array) plus one
`params.bin` blob of little-endian float64 in row-major, manifest order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from ..errors import CheckpointError

MANIFEST_NAME = "manifest.json"
BLOB_NAME = "params.bin"
_LE_F64 = np.dtype("<f8")


class ManifestEntry(BaseModel):
    name: str
    shape: list[int]
    offset: int


class Manifest(BaseModel):
    format: str = "le-float64-rowmajor"
    entries: list[ManifestEntry]


def save_arrays(directory: str | Path, arrays: Mapping[str, np.ndarray]) -> Path:
    """Write `arrays` in insertion order; returns the directory."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    entries: list[ManifestEntry] = []
    offset = 0
    chunks: list[bytes] = []
    for name, arr in arrays.items():
        a = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
        entries.append(ManifestEntry(name=name, shape=list(a.shape), offset=offset))
        chunks.append(a.astype(_LE_F64, copy=False).tobytes(order="C"))
        offset += a.size
    manifest = Manifest(entries=entries)
    (d / MANIFEST_NAME).write_text(
        json.dumps(manifest.model_dump(), indent=2), encoding="utf-8"
    )
    (d / BLOB_NAME).write_bytes(b"".join(chunks))
    logger.debug(f"[checkpoint] wrote {len(entries)} arrays ({offset} scalars) to {d}")
    return d


def load_arrays(directory: str | Path) -> dict[str, np.ndarray]:
    d = Path(directory)
    try:
        manifest = Manifest.model_validate_json((d / MANIFEST_NAME).read_text(encoding="utf-8"))
        blob = np.frombuffer((d / BLOB_NAME).read_bytes(), dtype=_LE_F64)
    except FileNotFoundError as exc:
        raise CheckpointError(f"checkpoint file missing: {exc.filename}") from None
    except ValidationError as exc:
        raise CheckpointError(f"malformed checkpoint manifest in {d}: {exc}") from None

    out: dict[str, np.ndarray] = {}
    for e in manifest.entries:
        n = int(np.prod(e.shape)) if e.shape else 1
        if e.offset + n > blob.size:
            raise CheckpointError(f"checkpoint blob truncated at '{e.name}'")
        out[e.name] = blob[e.offset : e.offset + n].astype(np.float64).reshape(e.shape)
    return out
