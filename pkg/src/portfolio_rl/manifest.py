"""
Run manifest: what a `train` invocation consumed and produced.
"""

from __future__ import annotations

import hashlib
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel, Field

MANIFEST_FILE = "run_manifest.json"


def sha256_file(path: str | os.PathLike, chunk: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(chunk), b""):
            h.update(block)
    return h.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunManifest(BaseModel):
    config_text: str
    config_fingerprint: str
    seed: int
    dataset_files: dict[str, str] = Field(default_factory=dict)
    artifacts: list[str] = Field(default_factory=list)
    started_at: str
    finished_at: str | None = None

    @staticmethod
    def hash_inputs(files: Iterable[str | os.PathLike]) -> dict[str, str]:
        return {Path(f).name: sha256_file(f) for f in sorted(files, key=lambda p: Path(p).name)}

    def collect_artifacts(self, out_dir: str | os.PathLike) -> None:
        """List every file under `out_dir` (relative, sorted), the manifest included."""
        root = Path(out_dir)
        found = {str(p.relative_to(root)) for p in root.rglob("*") if p.is_file()}
        found.add(MANIFEST_FILE)
        self.artifacts = sorted(found)

    def write(self, out_dir: str | os.PathLike) -> Path:
        path = Path(out_dir) / MANIFEST_FILE
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path
