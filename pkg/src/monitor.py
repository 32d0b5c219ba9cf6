"""
Multi-scale limit monitoring over recorded series.

A monitor config lists (window, limit, label) triples with windows in seconds.
Each window is converted to a whole number of samples and the maximal windowed
p-mean at that size is compared with its limit.
"""

import json
from dataclasses import asdict, dataclass
from typing import Any, Dict, List

import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.discrete import windowed_pnorm
from src.errors import ConfigError, WindowConversionError
from src.models import SampleSeries, WindowSpec

CONVERSION_REL_TOL = 0.01


class MonitorLimit(BaseModel):
    window: float = Field(gt=0, description='Window length in seconds')
    limit: float = Field(ge=0, description='Largest allowed maximal p-mean')
    label: str = ''


class MonitorConfig(BaseModel):
    p: float = Field(default=1.0, gt=0)
    limits: List[MonitorLimit] = Field(min_length=1)

    @model_validator(mode='after')
    def _distinct_windows(self) -> 'MonitorConfig':
        windows = [item.window for item in self.limits]
        if len(set(windows)) != len(windows):
            raise ValueError('windows must be distinct')
        return self

    @classmethod
    def from_json_file(cls, path: str) -> 'MonitorConfig':
        try:
            with open(path, encoding='utf-8') as handle:
                return cls.model_validate(json.load(handle))
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            logger.error(f"Error loading monitor config {path}: {str(e)}")
            raise ConfigError(f"Invalid monitor config {path}: {str(e)}") from e


def window_to_samples(window: float, dt: float) -> int:
    """
    Number of samples covering a physical window.

    Raises WindowConversionError when round(window / dt) is zero or its
    duration misses the requested window by more than 1%.
    """
    n = int(round(window / dt))
    if n < 1 or abs(n * dt - window) > CONVERSION_REL_TOL * window:
        raise WindowConversionError(
            f"Window of {window}s does not match a whole number of {dt}s samples within 1%")
    return n


@dataclass(frozen=True)
class MonitorResult:
    label: str
    window: float
    window_samples: int
    limit: float
    value: float
    arg_start: int
    witness_start_time: float
    passed: bool


@dataclass(frozen=True)
class MonitorReport:
    results: List[MonitorResult]
    p: float
    source: str

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def violations(self) -> List[MonitorResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {'p': self.p, 'source': self.source, 'passed': self.passed,
                'violations': len(self.violations()),
                'results': [asdict(r) for r in self.results]}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.results])


def evaluate_monitor(x: SampleSeries, config: MonitorConfig) -> MonitorReport:
    """
    Check every configured limit against the series.

    Args:
        x (SampleSeries): Recorded series.
        config (MonitorConfig): Limits and exponent.

    Returns:
        MonitorReport: One result per limit, with the start time of the worst
            window (t0 + arg_start * dt).
    """
    results = []
    for item in config.limits:
        n = window_to_samples(item.window, x.dt)
        result = windowed_pnorm(x, WindowSpec(p=config.p, n=n))
        passed = result.value <= item.limit
        if not passed:
            logger.warning(f"Limit {item.label or item.window} exceeded: {result.value} > {item.limit}")
        results.append(MonitorResult(
            label=item.label, window=item.window, window_samples=n, limit=item.limit,
            value=result.value, arg_start=result.arg_start,
            witness_start_time=x.t0 + result.arg_start * x.dt, passed=passed))
    return MonitorReport(results=results, p=config.p, source=x.fingerprint())
