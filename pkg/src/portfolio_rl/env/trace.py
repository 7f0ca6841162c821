"""
Append-only CSV of per-step simulator records.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


@dataclass(frozen=True)
class StepRecord:
    day: int
    date: str
    action: Sequence[float]
    shares: Sequence[float]
    cost: float
    value: float
    reward: float


class StepTraceWriter:
    """One row per step: day, date, action weights, shares, cost, value, reward."""

    def __init__(self, path: str | os.PathLike, num_assets: int, mkdirs: bool = True) -> None:
        self._path = Path(path)
        self._num_assets = num_assets
        if mkdirs:
            self._path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def path(self) -> Path:
        return self._path

    def header(self) -> list[str]:
        n = self._num_assets
        return (
            ["day", "date"]
            + [f"w{i}" for i in range(n)]
            + [f"s{i}" for i in range(n)]
            + ["cost", "value", "reward"]
        )

    def append(self, record: StepRecord) -> None:
        fresh = not self._path.exists() or self._path.stat().st_size == 0
        with self._path.open("a", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            if fresh:
                writer.writerow(self.header())
            writer.writerow(
                [record.day, record.date]
                + [repr(float(x)) for x in record.action]
                + [repr(float(x)) for x in record.shares]
                + [repr(record.cost), repr(record.value), repr(record.reward)]
            )
