"""
Rendering and writing of reports.

Everything written to disk goes through atomic_write_text: the content lands
in a temporary file next to the target and is renamed over it.
"""

import json
import os
import sys
import tempfile
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from loguru import logger

from src.models import ScaleReport


def json_default(obj: Any) -> Any:
    """`default` hook for json.dumps: numpy scalars and arrays become plain Python values."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def to_json(payload: Any) -> str:
    return json.dumps(payload, default=json_default, indent=2, sort_keys=True) + '\n'


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except Exception as e:
        logger.error(f"Error writing {path}: {str(e)}")
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def frame_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format='%.17g', lineterminator='\n')


def emit(text: str, out: Optional[str] = None) -> None:
    """Write text to `out` atomically, or to stdout."""
    if out:
        atomic_write_text(out, text)
        logger.info(f"Report written to {out}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def scale_report_payload(report: ScaleReport, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    payload = report.to_dict()
    payload.update(extra or {})
    return payload


def scale_report_csv(report: ScaleReport) -> str:
    return frame_to_csv(report.to_frame())


def plot_data_csv(report: ScaleReport) -> str:
    """Two columns (window_size, value), one row per ladder window."""
    frame = report.to_frame()[['window_samples', 'value']].rename(columns={'window_samples': 'window_size'})
    return frame_to_csv(frame)
