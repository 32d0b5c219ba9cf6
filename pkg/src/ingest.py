"""
CSV ingestion of recorded series and step functions.

Series files have a header with a time column "t" (seconds) and one or more
value columns. Step function files have the header "breakpoint,value" with
K + 1 rows, the last one carrying an empty value.
"""

import math
from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import (
    InvalidSeriesError,
    IrregularSamplingWithoutResampleError,
    NonMonotoneTimeError,
    ParseError,
    TooShortError,
)
from src.models import SampleSeries, StepFunction
from src.reports import atomic_write_text, frame_to_csv

TIME_COLUMN = 't'
UNIFORM_REL_TOL = 1e-6


def _read_csv(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, encoding='utf-8', float_precision='round_trip')
    except FileNotFoundError as e:
        logger.error(f"Error: File {path} not found")
        raise ParseError(f"File {path} not found") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError, OSError) as e:
        logger.error(f"Error loading file {path}: {str(e)}")
        raise ParseError(f"Cannot parse {path}: {str(e)}") from e


def _numeric_column(df: pd.DataFrame, column: str, path: str) -> np.ndarray:
    if column not in df.columns:
        raise ParseError(f"Column {column!r} not found in {path}; columns are {list(df.columns)}")
    values = pd.to_numeric(df[column], errors='coerce')
    if values.isna().any():
        row = int(np.flatnonzero(values.isna().to_numpy())[0])
        raise ParseError(f"Column {column!r} in {path} has a missing or non-numeric entry at row {row}")
    return values.to_numpy(dtype=np.float64)


def ingest_series(path: str, column: str, resample: Optional[float] = None) -> SampleSeries:
    """
    Load one value column of a time-stamped CSV as a uniformly sampled series.

    Args:
        path (str): CSV file with a "t" column.
        column (str): Name of the value column.
        resample (float, optional): Target spacing in seconds. Required when
            the timestamps are not uniform (within 1e-6 relative); values are
            then linearly interpolated onto t_first, t_first + resample, ...
            up to t_last.

    Returns:
        SampleSeries: Series with dt and t0 taken from the data (or the grid).
    """
    df = _read_csv(path)
    t = _numeric_column(df, TIME_COLUMN, path)
    values = _numeric_column(df, column, path)
    if t.size < 2:
        raise ParseError(f"{path} needs at least two samples to establish the spacing, got {t.size}")
    steps = np.diff(t)
    if np.any(steps <= 0):
        row = int(np.flatnonzero(steps <= 0)[0]) + 1
        raise NonMonotoneTimeError(f"Timestamps in {path} are not strictly increasing at row {row}")

    if resample is None:
        dt = (t[-1] - t[0]) / (t.size - 1)
        if np.any(np.abs(steps - dt) > UNIFORM_REL_TOL * dt):
            raise IrregularSamplingWithoutResampleError(
                f"Timestamps in {path} are not uniformly spaced; pass a resample spacing")
        logger.debug(f"Loaded {t.size} uniform samples of {column!r} from {path}, dt={dt}")
        return SampleSeries(values, dt=dt, t0=t[0], name=column)

    if not (math.isfinite(resample) and resample > 0):
        raise InvalidSeriesError(f"Resample spacing must be finite and > 0, got {resample}")
    count = int(math.floor((t[-1] - t[0]) / resample + 1e-9)) + 1
    grid = t[0] + resample * np.arange(count)
    logger.debug(f"Resampled {t.size} samples of {column!r} onto {count} points, dt={resample}")
    return SampleSeries(np.interp(grid, t, values), dt=resample, t0=t[0], name=column)


def derive_rates(x: SampleSeries) -> SampleSeries:
    """
    Forward differences of a cumulative series divided by dt.

    With p = 1 the window mean of the rates over samples j..j+n-1 equals the
    average rate (x[j+n] - x[j]) / (n * dt), so the maximal windowed mean is
    the best average speed over any stretch of n steps.
    """
    if len(x) < 2:
        raise TooShortError(f"Need at least two cumulative samples to derive rates, got {len(x)}")
    rates = np.diff(x.values) / x.dt
    name = f'{x.name}_rate' if x.name else 'rate'
    return SampleSeries(rates, dt=x.dt, t0=x.t0, name=name)


def write_series_csv(x: SampleSeries, path: str, column: str = 'value') -> None:
    """Write "t,<column>" rows with round-trip precision."""
    atomic_write_text(path, frame_to_csv(pd.DataFrame({TIME_COLUMN: x.times, column: x.values})))


def read_step_function_csv(path: str) -> StepFunction:
    df = _read_csv(path)
    breakpoints = _numeric_column(df, 'breakpoint', path)
    if 'value' not in df.columns:
        raise ParseError(f"Column 'value' not found in {path}")
    values = pd.to_numeric(df['value'], errors='coerce').to_numpy(dtype=np.float64)
    if values.size < 2 or not np.isnan(values[-1]) or np.isnan(values[:-1]).any():
        raise ParseError(f"{path} must list K+1 breakpoints with values on all rows but the last")
    return StepFunction(breakpoints, values[:-1])


def write_step_function_csv(f: StepFunction, path: str) -> None:
    atomic_write_text(path, step_function_csv(f))


def step_function_csv(f: StepFunction) -> str:
    return frame_to_csv(f.to_frame())
