"""
Per-asset OHLCV series and their CSV form (`date,open,high,low,close,volume`).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from ..errors import DataValidationError

COLUMNS = ("open", "high", "low", "close", "volume")
HEADER = ("date",) + COLUMNS


@dataclass(frozen=True)
class AssetSeries:
    """Validated daily bars; `frame` is indexed by strictly increasing ISO dates."""

    symbol: str
    frame: pd.DataFrame

    def __post_init__(self) -> None:
        validate_frame(self.symbol, self.frame)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def dates(self) -> list[str]:
        return list(self.frame.index)


def validate_frame(symbol: str, frame: pd.DataFrame) -> None:
    if list(frame.columns) != list(COLUMNS):
        raise DataValidationError(
            f"{symbol}: columns must be {COLUMNS}, got {tuple(frame.columns)}"
        )
    if frame.index.has_duplicates:
        dup = frame.index[frame.index.duplicated()][0]
        raise DataValidationError(f"{symbol}: duplicate date {dup}")
    if not frame.index.is_monotonic_increasing:
        raise DataValidationError(f"{symbol}: dates are not increasing")
    o, h, l, c, v = (frame[col].to_numpy() for col in COLUMNS)
    bad = (
        ~np.isfinite(frame.to_numpy()).all(axis=1)
        | (np.minimum.reduce([o, h, l, c]) <= 0)
        | (h < np.maximum(o, c))
        | (l > np.minimum(o, c))
        | (v < 0)
    )
    if bad.any():
        first = frame.index[np.argmax(bad)]
        raise DataValidationError(f"{symbol}: inconsistent OHLCV bar on {first}")


def load_csv(path: str | os.PathLike, symbol: str | None = None) -> AssetSeries:
    """Parse one asset file; errors name the offending line or date."""
    p = Path(path)
    sym = symbol or p.stem
    try:
        raw = pd.read_csv(p, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataValidationError(f"{p}: empty file") from None
    header = tuple(col.strip().lower() for col in raw.columns)
    if header != HEADER:
        raise DataValidationError(f"{p}: line 1: expected header {','.join(HEADER)}")

    dates: list[str] = []
    values = np.empty((len(raw), len(COLUMNS)))
    for i, row in enumerate(raw.itertuples(index=False, name=None)):
        line = i + 2
        try:
            dates.append(date.fromisoformat(row[0].strip()).isoformat())
            values[i] = [float(x) for x in row[1:]]
        except (ValueError, TypeError, AttributeError):
            raise DataValidationError(f"{p}: line {line}: malformed row {row!r}") from None

    frame = pd.DataFrame(values, index=pd.Index(dates, name="date"), columns=list(COLUMNS))
    if frame.index.has_duplicates:
        dup = frame.index[frame.index.duplicated()][0]
        raise DataValidationError(f"{p}: duplicate date {dup}")
    series = AssetSeries(sym, frame.sort_index())
    logger.debug(f"[data] loaded {sym}: {len(series)} rows from {p}")
    return series


def write_csv(series: AssetSeries, path: str | os.PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    series.frame.to_csv(p, index=True, index_label="date", float_format="%.17g")
    return p


def load_directory(directory: str | os.PathLike) -> list[AssetSeries]:
    """Every `*.csv` in `directory`, sorted by file name."""
    d = Path(directory)
    files = sorted(d.glob("*.csv"))
    if not files:
        raise DataValidationError(f"{d}: no CSV files found")
    return [load_csv(f) for f in files]
