"""
Calendar alignment and the log-difference transform.

`raw[t, f, i]` holds feature f (open, high, low, close, volume) of column i
on day t; column 0 is cash with every raw feature equal to 1. `features`
is the log-difference of `raw` against the previous common day.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Sequence

import numpy as np
from loguru import logger

from ..env.costs import estimate_spread
from ..errors import CheckpointError, DataValidationError, DatasetTooShortError
from ..tensor import load_arrays, save_arrays
from .series import COLUMNS, AssetSeries

VOLUME_FLOOR = 1.0
CLOSE = COLUMNS.index("close")
META_NAME = "dataset.json"


@dataclass
class AlignedDataset:
    symbols: list[str]
    dates: list[str]
    raw: np.ndarray
    features: np.ndarray
    spreads: np.ndarray

    def __post_init__(self) -> None:
        T, F, H = self.raw.shape
        if F != len(COLUMNS) or H != len(self.symbols) + 1 or T != len(self.dates):
            raise DataValidationError(
                f"dataset arrays {self.raw.shape} disagree with {len(self.dates)} dates "
                f"and {len(self.symbols)} symbols"
            )
        if self.features.shape != self.raw.shape or self.spreads.shape != (T, H):
            raise DataValidationError("feature/spread arrays do not match raw array shape")

    @property
    def num_days(self) -> int:
        return len(self.dates)

    @property
    def num_assets(self) -> int:
        """Columns including cash."""
        return len(self.symbols) + 1

    def closes(self, day: int) -> np.ndarray:
        return self.raw[day, CLOSE]

    def save(self, directory: str | os.PathLike) -> Path:
        d = Path(directory)
        arrays: dict[str, np.ndarray] = {}
        for i, sym in enumerate(self.symbols, start=1):
            arrays[f"raw/{sym}"] = self.raw[:, :, i]
            arrays[f"features/{sym}"] = self.features[:, :, i]
            arrays[f"spreads/{sym}"] = self.spreads[:, i]
        save_arrays(d, arrays)
        meta = {
            "symbols": self.symbols,
            "dates": self.dates,
            "first_date": self.dates[0],
            "last_date": self.dates[-1],
        }
        (d / META_NAME).write_text(json.dumps(meta, indent=2), encoding="utf-8")
        logger.info(f"[data] cached {len(self.symbols)} assets x {self.num_days} days in {d}")
        return d

    @classmethod
    def load(cls, directory: str | os.PathLike) -> "AlignedDataset":
        d = Path(directory)
        try:
            meta = json.loads((d / META_NAME).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CheckpointError(f"{d}: no {META_NAME}") from None
        arrays = load_arrays(d)
        symbols, dates = list(meta["symbols"]), list(meta["dates"])
        T, H = len(dates), len(symbols) + 1
        raw = np.ones((T, len(COLUMNS), H))
        features = np.zeros((T, len(COLUMNS), H))
        spreads = np.zeros((T, H))
        try:
            for i, sym in enumerate(symbols, start=1):
                raw[:, :, i] = arrays[f"raw/{sym}"]
                features[:, :, i] = arrays[f"features/{sym}"]
                spreads[:, i] = arrays[f"spreads/{sym}"]
        except KeyError as exc:
            raise CheckpointError(f"{d}: dataset cache is missing {exc}") from None
        return cls(symbols, dates, raw, features, spreads)


def _log_features(raw: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Log-differences of `raw` rows; `previous` is the row before raw[0]."""
    logs = np.log(_floor_volume(raw))
    prior = np.log(_floor_volume(previous[None]))
    return logs - np.concatenate([prior, logs[:-1]], axis=0)


def _floor_volume(raw: np.ndarray) -> np.ndarray:
    out = raw.copy()
    out[:, COLUMNS.index("volume")] = np.maximum(out[:, COLUMNS.index("volume")], VOLUME_FLOOR)
    return out


def align_and_transform(
    series: Sequence[AssetSeries], spread_window: int | None = 30
) -> AlignedDataset:
    """
    Intersect calendars, attach the cash column, log-difference, estimate spreads.

    The first common day only serves as the base of the first difference, so
    the dataset has one day fewer than the intersection.
    """
    if not series:
        raise DataValidationError("align_and_transform needs at least one series")
    symbols = [s.symbol for s in series]
    if len(set(symbols)) != len(symbols):
        raise DataValidationError(f"duplicate symbols in {symbols}")
    common = sorted(reduce(lambda a, b: a & b, (set(s.frame.index) for s in series)))
    if len(common) < 2:
        raise DatasetTooShortError(f"common calendar has {len(common)} days, need at least 2")

    full = np.ones((len(common), len(COLUMNS), len(series) + 1))
    for i, s in enumerate(series, start=1):
        full[:, :, i] = s.frame.loc[common, list(COLUMNS)].to_numpy()

    spreads = np.zeros((len(common), len(series) + 1))
    for i in range(1, len(series) + 1):
        log_close = np.log(full[:, CLOSE, i])
        high, low = full[:, COLUMNS.index("high"), i], full[:, COLUMNS.index("low"), i]
        eta = 0.5 * (np.log(high) + np.log(low))
        spreads[:, i] = estimate_spread(log_close, eta, window=spread_window)

    raw = full[1:]
    features = _log_features(raw, full[0])
    logger.info(
        f"[data] aligned {len(series)} assets over {len(raw)} days ({common[1]}..{common[-1]})"
    )
    return AlignedDataset(symbols, list(common[1:]), raw, features, spreads[1:])
