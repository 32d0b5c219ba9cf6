"""
Shared data types for discrete series, step functions and check results.

Kept in one module so the discrete, continuous and verification code can all
return the same records without importing each other.
"""

import hashlib
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.errors import (
    EmptySupportError,
    InvalidExponentError,
    InvalidLengthError,
    InvalidSeriesError,
    InvalidStepFunctionError,
    NonFiniteInputError,
    WindowTooLongError,
)

# Tolerances
REL_TOL_EXACT = 1e-12  # oracle agreement, exactness, witnesses
REL_TOL_BOUND = 1e-9   # inequality checks


def validate_exponent(p: float, norm_laws: bool = False) -> float:
    """
    Validate an exponent.

    Args:
        p (float): Exponent of the power mean.
        norm_laws (bool): Require p >= 1, the range where the quantity is a norm
            and the ordering lemmas hold.

    Returns:
        float: p as a float.
    """
    try:
        p = float(p)
    except (TypeError, ValueError) as e:
        raise InvalidExponentError(f"Exponent must be a number, got {p!r}") from e
    if not math.isfinite(p) or p <= 0:
        raise InvalidExponentError(f"Exponent must be finite and > 0, got {p}")
    if norm_laws and p < 1:
        raise InvalidExponentError(f"This check needs p >= 1, got {p}")
    return p


def _frozen_array(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampleSeries:
    """Finite real series with uniform sample spacing."""

    values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0
    name: Optional[str] = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1 or values.size == 0:
            raise InvalidSeriesError("Series values must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise NonFiniteInputError(f"Non-finite value at index {bad}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidSeriesError(f"Sample spacing must be positive, got {self.dt}")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'dt', float(self.dt))
        object.__setattr__(self, 't0', float(self.t0))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def scaled(self, c: float) -> 'SampleSeries':
        return SampleSeries(self.values * c, dt=self.dt, t0=self.t0, name=self.name)

    def fingerprint(self) -> str:
        """Short content hash used to tag reports and campaign failures."""
        digest = hashlib.sha1(self.values.tobytes())
        digest.update(repr(self.dt).encode())
        return digest.hexdigest()[:12]


@dataclass(frozen=True)
class WindowSpec:
    """Exponent p and window length n (in samples)."""

    p: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, 'p', validate_exponent(self.p))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidLengthError(f"Window length must be a positive integer, got {self.n}")
        object.__setattr__(self, 'n', int(self.n))

    def validate_for(self, length: int) -> None:
        if self.n > length:
            raise WindowTooLongError(f"Window of {self.n} samples does not fit a series of {length}")


@dataclass(frozen=True)
class WindowedNormResult:
    """Maximal windowed p-mean and the first window attaining it."""

    value: float
    value_pow_p: float
    arg_start: int
    n: int
    p: float


@dataclass(frozen=True)
class StepFunction:
    """
    Compactly supported piecewise-constant function on the real line.

    Piece k has value values[k] on (breakpoints[k], breakpoints[k+1]); the
    function is 0 outside (breakpoints[0], breakpoints[-1]). Adjacent pieces
    with equal values are merged on construction.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=np.float64)
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise EmptySupportError("A step function needs at least one piece")
        if b.ndim != 1 or b.size != v.size + 1:
            raise InvalidStepFunctionError(
                f"Expected {v.size + 1} breakpoints for {v.size} pieces, got {b.size}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(v))):
            raise NonFiniteInputError("Breakpoints and values must be finite")
        if not np.all(np.diff(b) > 0):
            raise InvalidStepFunctionError("Breakpoints must be strictly increasing")

        # merge runs of equal values
        starts = np.concatenate(([True], v[1:] != v[:-1]))
        keep = np.flatnonzero(starts)
        object.__setattr__(self, 'breakpoints', _frozen_array(np.append(b[keep], b[-1])))
        object.__setattr__(self, 'values', _frozen_array(v[keep]))

    @property
    def n_pieces(self) -> int:
        return int(self.values.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def support_length(self) -> float:
        return float(self.breakpoints[-1] - self.breakpoints[0])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def evaluate(self, points: Any) -> np.ndarray:
        """Point values; breakpoints themselves take the value of the piece to their right."""
        pts = np.asarray(points, dtype=np.float64)
        idx = np.searchsorted(self.breakpoints, pts, side='right') - 1
        inside = (idx >= 0) & (idx < self.n_pieces)
        out = np.zeros_like(pts)
        out[inside] = self.values[idx[inside]]
        return out

    def scaled(self, c: float) -> 'StepFunction':
        return StepFunction(self.breakpoints, self.values * c)

    def shifted(self, delta: float) -> 'StepFunction':
        return StepFunction(self.breakpoints + delta, self.values)

    def add(self, other: 'StepFunction') -> 'StepFunction':
        """Pointwise sum on the union of both breakpoint grids."""
        grid = np.union1d(self.breakpoints, other.breakpoints)
        mids = 0.5 * (grid[:-1] + grid[1:])
        return StepFunction(grid, self.evaluate(mids) + other.evaluate(mids))

    def to_frame(self) -> pd.DataFrame:
        """Rows (breakpoint, value); the last row has an empty value."""
        vals: List[Optional[float]] = [float(v) for v in self.values] + [None]
        return pd.DataFrame({'breakpoint': self.breakpoints, 'value': vals})


@dataclass(frozen=True)
class IntervalNormResult:
    """Maximal interval p-mean of a step function and the leftmost maximizing interval."""

    value: float
    value_pow_p: float
    arg_left: float
    T: float
    p: float


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of checking one inequality lhs <= rhs (or lhs < rhs when strict)."""

    name: str
    lhs: float
    rhs: float
    passed: bool
    tolerance: float = 0.0
    strict: bool = False
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @classmethod
    def compare(cls, name: str, lhs: float, rhs: float,
                rel_tol: float = REL_TOL_BOUND,
                strict: bool = False,
                witness: Optional[Dict[str, Any]] = None,
                details: Optional[Dict[str, Any]] = None,
                also: bool = True) -> 'BoundCheck':
        """
        Build a check from its two sides.

        Args:
            name (str): Identifier of the inequality.
            lhs (float): Left-hand side.
            rhs (float): Right-hand side.
            rel_tol (float): Tolerance relative to max(1, |rhs|); ignored when strict.
            strict (bool): Require lhs < rhs exactly (counterexample pairs).
            witness (dict, optional): Data realizing lhs.
            details (dict, optional): Extra quantities worth reporting.
            also (bool): Additional condition that must hold for the check to pass.

        Returns:
            BoundCheck: The evaluated check.
        """
        lhs, rhs = float(lhs), float(rhs)
        tolerance = 0.0 if strict else rel_tol * max(1.0, abs(rhs))
        ok = lhs < rhs if strict else lhs <= rhs + tolerance
        return cls(name=name, lhs=lhs, rhs=rhs, passed=bool(ok and also),
                   tolerance=tolerance, strict=strict, witness=witness,
                   details=dict(details or {}))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'slack': self.slack,
            'passed': self.passed,
            'tolerance': self.tolerance,
            'strict': self.strict,
            'witness': self.witness,
            'details': self.details,
        }


@dataclass(frozen=True)
class ScaleRow:
    window_samples: int
    window_duration: float
    value: float
    value_pow_p: float
    arg_start: int
    violates_naive_monotonicity: bool


@dataclass(frozen=True)
class ScaleReport:
    """Maximal p-means tabulated over an ascending ladder of window sizes."""

    rows: Sequence[ScaleRow]
    p: float
    source: str

    def flagged_windows(self) -> List[int]:
        return [row.window_samples for row in self.rows if row.violates_naive_monotonicity]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows],
                            columns=list(ScaleRow.__dataclass_fields__))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'p': self.p,
            'source': self.source,
            'flagged_windows': self.flagged_windows(),
            'rows': [asdict(row) for row in self.rows],
        }
