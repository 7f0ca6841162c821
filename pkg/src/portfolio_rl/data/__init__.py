"""OHLCV ingestion, calendar alignment and synthetic data."""

from .dataset import AlignedDataset, align_and_transform
from .series import AssetSeries, load_csv, load_directory, write_csv
from .synth import synth_bid_ask_bounce, synth_gbm

__all__ = [
    "AlignedDataset",
    "AssetSeries",
    "align_and_transform",
    "load_csv",
    "load_directory",
    "synth_bid_ask_bounce",
    "synth_gbm",
    "write_csv",
]
