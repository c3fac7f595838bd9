#!/usr/bin/env python3
"""
Series I/O

Loads series from single-column CSV, two-column (time, value) CSV or raw
little-endian float64 files, and writes series, profile tables, reports and
window maps (CSV matrix or binary PGM). Every file is written to a temporary
sibling first and renamed into place.
"""

import os
import json
import logging
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
import pandas as pd
from PIL import Image

from exceptions import SeriesFormatError
from pattern_counter import SeriesLike, TimeSeries, as_values
from window_engine import WindowMap

logger = logging.getLogger(__name__)

SERIES_FORMATS = ("csv_single_column", "csv_two_column_time_value", "raw_f64le")
MAP_FORMATS = ("csv_matrix", "pgm_p5")

MAP_FLOAT_FORMAT = "%.9g"
SERIES_FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class SeriesFileFormat:
    """
    Layout of a series file.

    Args:
        format: csv_single_column, csv_two_column_time_value or raw_f64le
        missing_token: Text marking a missing value; empty fields are missing too
    """

    format: str = "csv_single_column"
    missing_token: str = "NaN"

    def __post_init__(self):
        if self.format not in SERIES_FORMATS:
            raise SeriesFormatError(f"Unknown series format: {self.format}")


@dataclass(frozen=True)
class MapExportFormat:
    """
    Layout of an exported window map.

    Args:
        format: csv_matrix (9 significant digits, masked cells "NaN") or pgm_p5
        value_range: (lo, hi) mapped to pixel 0..255 for pgm_p5
    """

    format: str = "csv_matrix"
    value_range: Tuple[float, float] = (-1.0, 1.0)
    mask_value: int = 0

    def __post_init__(self):
        if self.format not in MAP_FORMATS:
            raise SeriesFormatError(f"Unknown map format: {self.format}")
        lo, hi = self.value_range
        if not hi > lo:
            raise SeriesFormatError(f"Invalid value range {self.value_range}")


@contextmanager
def atomic_write(path: str, mode: str = "w") -> Iterator:
    """Open a temporary file next to path and rename it over path on success."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if "b" in mode else {"encoding": "utf-8", "newline": ""})) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def _parse_column(column: pd.Series, missing_token: str, line_offset: int = 1) -> np.ndarray:
    """Parse a text column to floats, reporting the first bad record by line number."""
    text = column.fillna("").astype(str).str.strip()
    missing = text.str.lower().isin({missing_token.lower(), "", "nan"})
    numbers = pd.to_numeric(text.where(~missing), errors="coerce")

    bad = numbers.isna() & ~missing
    if bad.any():
        first = int(np.flatnonzero(bad.to_numpy())[0])
        raise SeriesFormatError(f"cannot parse {text.iloc[first]!r} as a number",
                                line=first + line_offset)

    # astype parses each record with correct rounding
    values = text.where(~missing).astype(np.float64).to_numpy()
    if np.isinf(values).any():
        first = int(np.flatnonzero(np.isinf(values))[0])
        raise SeriesFormatError("infinite values are not allowed", line=first + line_offset)
    return values


def load_series(path: str, fmt: Optional[SeriesFileFormat] = None,
                sample_rate_hz: Optional[float] = None) -> TimeSeries:
    """
    Load a series from disk.

    Args:
        path: File to read
        fmt: File layout, defaults to single-column CSV
        sample_rate_hz: Optional sampling rate to attach

    Returns:
        TimeSeries in file order with missing tokens as NaN

    Raises:
        SeriesFormatError: On parse failures (with line number) or empty files
    """
    fmt = fmt or SeriesFileFormat()
    logger.info(f"Loading series from {path} ({fmt.format})")

    if fmt.format == "raw_f64le":
        size = os.path.getsize(path)
        if size == 0:
            raise SeriesFormatError(f"{path} is empty")
        if size % 8:
            raise SeriesFormatError(f"{path} has {size} bytes, not a multiple of 8")
        values = np.fromfile(path, dtype="<f8")
    else:
        n_columns = 1 if fmt.format == "csv_single_column" else 2
        try:
            frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                                skip_blank_lines=False, names=list(range(n_columns)))
        except pd.errors.EmptyDataError:
            raise SeriesFormatError(f"{path} is empty")
        except pd.errors.ParserError as e:
            raise SeriesFormatError(f"{path}: {e}")

        # a trailing newline reads as one blank record
        while len(frame) and (frame.iloc[-1].fillna("") == "").all():
            frame = frame.iloc[:-1]
        if frame.empty:
            raise SeriesFormatError(f"{path} is empty")

        values = _parse_column(frame[n_columns - 1], fmt.missing_token)
        if n_columns == 2:
            times = _parse_column(frame[0], fmt.missing_token)
            if np.isnan(times).any():
                raise SeriesFormatError("missing time stamp",
                                        line=int(np.flatnonzero(np.isnan(times))[0]) + 1)
            steps = np.diff(times)
            if (steps <= 0).any():
                raise SeriesFormatError("time column is not strictly increasing",
                                        line=int(np.flatnonzero(steps <= 0)[0]) + 2)

    if values.size == 0:
        raise SeriesFormatError(f"{path} is empty")
    if np.isinf(values).any():
        raise SeriesFormatError(f"{path} contains infinite values")

    series = TimeSeries(values, sample_rate_hz=sample_rate_hz)
    logger.info(f"Loaded {len(series)} values ({series.missing_count} missing)")
    return series


def save_series(x: SeriesLike, path: str, fmt: Optional[SeriesFileFormat] = None) -> str:
    """
    Write a series as single-column CSV (17 significant digits) or raw float64.

    Returns:
        Path to the saved file
    """
    fmt = fmt or SeriesFileFormat()
    values = as_values(x)

    if fmt.format == "raw_f64le":
        with atomic_write(path, "wb") as f:
            f.write(values.astype("<f8").tobytes())
    elif fmt.format == "csv_single_column":
        with atomic_write(path) as f:
            pd.DataFrame({"x": values}).to_csv(f, header=False, index=False,
                                                float_format=SERIES_FLOAT_FORMAT,
                                                na_rep=fmt.missing_token)
    else:
        with atomic_write(path) as f:
            pd.DataFrame({"t": np.arange(values.size), "x": values}).to_csv(
                f, header=False, index=False, float_format=SERIES_FLOAT_FORMAT,
                na_rep=fmt.missing_token)

    logger.info(f"Saved {values.size} values to {path}")
    return path


def map_to_pixels(m: WindowMap, fmt: MapExportFormat) -> np.ndarray:
    """Scale map values to 8-bit pixels; masked cells get fmt.mask_value."""
    lo, hi = fmt.value_range
    scaled = np.floor(255.0 * (m.values - lo) / (hi - lo) + 0.5)
    pixels = np.clip(np.nan_to_num(scaled, nan=0.0), 0, 255).astype(np.uint8)
    pixels[m.mask | np.isnan(m.values)] = fmt.mask_value
    return pixels


def export_map(m: WindowMap, fmt: MapExportFormat, path: str) -> str:
    """
    Export a window map with delays on rows and windows on columns.

    Returns:
        Path to the saved file
    """
    if fmt.format == "csv_matrix":
        values = np.where(m.mask, np.nan, m.values)
        with atomic_write(path) as f:
            pd.DataFrame(values).to_csv(f, header=False, index=False,
                                        float_format=MAP_FLOAT_FORMAT, na_rep="NaN")
    else:
        image = Image.fromarray(map_to_pixels(m, fmt))
        with atomic_write(path, "wb") as f:
            image.save(f, format="PPM")

    logger.info(f"Saved {m.stat_name} map ({m.shape[0]}x{m.shape[1]}) to {path}")
    return path


def load_map_csv(path: str) -> np.ndarray:
    """Read a csv_matrix export back into a float array (NaN for masked cells)."""
    return pd.read_csv(path, header=None, na_values=["NaN"]).to_numpy(dtype=np.float64)


def write_table(frame: pd.DataFrame, path: Optional[str] = None) -> Optional[str]:
    """Write a table as CSV with 9 significant digits; to stdout when path is None."""
    text = frame.to_csv(index=False, float_format=MAP_FLOAT_FORMAT, na_rep="NaN")
    if path is None:
        print(text, end="")
        return None
    with atomic_write(path) as f:
        f.write(text)
    logger.info(f"Saved table with {len(frame)} rows to {path}")
    return path


def write_report(report: Dict, path: Optional[str] = None) -> Optional[str]:
    """Write a JSON report; to stdout when path is None."""
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False)
    if path is None:
        print(text)
        return None
    with atomic_write(path) as f:
        f.write(text + "\n")
    logger.info(f"Saved report to {path}")
    return path
