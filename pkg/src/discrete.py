"""
Maximal windowed p-means of finite series.

For a series x, exponent p and window length n the quantity computed here is

    max over j of ((1/n) * sum_{i=j}^{j+n-1} |x_i|^p) ** (1/p)

taken over all windows that fit completely inside the series. The module also
builds the impulse-train counterexamples and checks the inequalities that
relate the quantity across window sizes.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import (
    BadOrderError,
    EmptyLadderError,
    InvalidPartitionError,
    InvalidPeriodError,
    LengthTooShortError,
    PartitionTooLongError,
    WindowTooLongError,
)
from src.models import (
    REL_TOL_EXACT,
    BoundCheck,
    SampleSeries,
    ScaleReport,
    ScaleRow,
    WindowSpec,
    WindowedNormResult,
    validate_exponent,
)

# Window sums are recomputed from scratch every RESYNC_INTERVAL window starts.
RESYNC_INTERVAL = 1 << 16
# Upper bound on the summation work spent separating near-tied windows.
REFINE_BUDGET = 1 << 20


def powered(values: np.ndarray, p: float) -> np.ndarray:
    """|values| ** p, with the common exponents special-cased."""
    a = np.abs(values)
    if p == 1.0:
        return a
    with np.errstate(over='ignore'):
        return a * a if p == 2.0 else a ** p


def rescaled_power(scaled_pow_p: float, peak: float, p: float) -> float:
    """peak ** p * scaled_pow_p, or inf when that exceeds the float range."""
    if scaled_pow_p == 0.0:
        return 0.0
    try:
        return math.exp(p * math.log(peak) + math.log(scaled_pow_p))
    except OverflowError:
        return math.inf


def window_sums(weights: np.ndarray, n: int) -> np.ndarray:
    """
    Sum of every length-n window of weights, indexed by window start.

    Uses pandas' compensated rolling sum, restarted on fresh slices every
    RESYNC_INTERVAL starts so accumulated drift stays bounded on long inputs.

    Args:
        weights (np.ndarray): Nonnegative per-sample weights.
        n (int): Window length.

    Returns:
        np.ndarray: Array of length len(weights) - n + 1.
    """
    n_windows = weights.size - n + 1
    sums = np.empty(n_windows, dtype=np.float64)
    for start in range(0, n_windows, RESYNC_INTERVAL):
        stop = min(start + RESYNC_INTERVAL, n_windows)
        chunk = pd.Series(weights[start:stop + n - 1])
        sums[start:stop] = chunk.rolling(window=n).sum().to_numpy()[n - 1:]
    return np.maximum(sums, 0.0)


def first_maximizer(scores: np.ndarray, exact: Callable[[int], float], cost: int = 1) -> int:
    """
    Index of the best score, smallest index first.

    Scores within REL_TOL_EXACT of the maximum are re-evaluated with `exact`
    so that floating-point noise in `scores` never decides between windows;
    exact ties go to the smallest index. When too many near-ties exist to
    re-evaluate within REFINE_BUDGET (cost is the work per re-evaluation) the
    first near-tie wins.
    """
    best = float(np.max(scores))
    candidates = np.flatnonzero(scores >= best - REL_TOL_EXACT * best)
    if candidates.size == 1 or candidates.size * cost > REFINE_BUDGET:
        return int(candidates[0])
    exact_scores = [exact(int(i)) for i in candidates]
    return int(candidates[int(np.argmax(exact_scores))])


def direct_window_sum(weights: np.ndarray, start: int, n: int) -> float:
    return math.fsum(weights[start:start + n].tolist())


def windowed_pnorm(x: SampleSeries, spec: WindowSpec) -> WindowedNormResult:
    """
    Maximal windowed p-mean of a series in O(N) time.

    Args:
        x (SampleSeries): Input series.
        spec (WindowSpec): Exponent p and window length n.

    Returns:
        WindowedNormResult: Maximal value, its p-th power and the smallest
            maximizing window start. The value at arg_start is re-summed
            directly, so it never carries rolling-sum error.
    """
    spec.validate_for(len(x))
    weights = powered(x.values, spec.p)
    sums = window_sums(weights, spec.n)
    if not np.all(np.isfinite(sums)):
        return _windowed_pnorm_rescaled(x, spec)
    arg = first_maximizer(sums, lambda j: direct_window_sum(weights, j, spec.n), cost=spec.n)
    value_pow_p = direct_window_sum(weights, arg, spec.n) / spec.n
    logger.debug(f"windowed_pnorm n={spec.n} p={spec.p}: {sums.size} windows, best start {arg}")
    return WindowedNormResult(value=value_pow_p ** (1.0 / spec.p), value_pow_p=value_pow_p,
                              arg_start=arg, n=spec.n, p=spec.p)


def _windowed_pnorm_rescaled(x: SampleSeries, spec: WindowSpec) -> WindowedNormResult:
    """Window sums of |x|^p overflow: work on x / sup|x| and scale the result back."""
    peak = sup_norm(x)
    unit = windowed_pnorm(SampleSeries(x.values / peak, dt=x.dt, t0=x.t0, name=x.name), spec)
    logger.debug(f"windowed_pnorm n={spec.n} p={spec.p}: rescaled by {peak}")
    return WindowedNormResult(value=peak * unit.value,
                              value_pow_p=rescaled_power(unit.value_pow_p, peak, spec.p),
                              arg_start=unit.arg_start, n=spec.n, p=spec.p)


def _norm(x: SampleSeries, p: float, n: int) -> WindowedNormResult:
    return windowed_pnorm(x, WindowSpec(p=p, n=n))


def sup_norm(x: SampleSeries) -> float:
    """Largest absolute entry."""
    return float(np.max(np.abs(x.values)))


def impulse_train(n: int, L: int) -> SampleSeries:
    """
    Length-L prefix of the 0/1 sequence with a one every n samples.

    In one-based terms position i holds 1 iff i = 1 (mod n); zero-based, the
    ones sit at indices 0, n, 2n, ...

    Args:
        n (int): Period.
        L (int): Length, at least n.

    Returns:
        SampleSeries: The impulse train with dt = 1.
    """
    if int(n) != n or n < 1:
        raise InvalidPeriodError(f"Period must be a positive integer, got {n}")
    if int(L) != L or L < n:
        raise LengthTooShortError(f"Length {L} is shorter than the period {n}")
    values = np.zeros(int(L))
    values[::int(n)] = 1.0
    return SampleSeries(values, dt=1.0, name=f'impulse_train_{int(n)}')


def _window_witness(result: WindowedNormResult) -> Dict[str, float]:
    return {'window': result.n, 'start': result.arg_start, 'value_pow_p': result.value_pow_p}


def check_equivalence_bounds(x: SampleSeries, spec: WindowSpec) -> BoundCheck:
    """
    Two-sided bound n^(-1/p) * sup|x| <= windowed p-mean <= sup|x|.

    lhs/rhs hold the upper inequality; the lower one is reported in details
    and must hold as well for the check to pass.
    """
    validate_exponent(spec.p, norm_laws=True)
    result = windowed_pnorm(x, spec)
    upper = sup_norm(x)
    lower = spec.n ** (-1.0 / spec.p) * upper
    lower_ok = lower <= result.value + 1e-9 * max(1.0, result.value)
    return BoundCheck.compare(
        'equivalence_bounds', result.value, upper,
        witness=_window_witness(result),
        details={'lower': lower, 'lower_slack': result.value - lower, 'n': spec.n, 'p': spec.p},
        also=lower_ok,
    )


def check_partition_inequality(x: SampleSeries, p: float, parts: Sequence[int]) -> BoundCheck:
    """
    Partition inequality: with n = sum(parts),
    M_n^p <= sum_l (parts[l] / n) * M_{parts[l]}^p, where M_k is the maximal
    windowed p-mean at window k.
    """
    p = validate_exponent(p, norm_laws=True)
    if len(parts) == 0 or any(int(a) != a or a < 1 for a in parts):
        raise InvalidPartitionError(f"Parts must be positive integers, got {list(parts)}")
    parts = [int(a) for a in parts]
    n = sum(parts)
    if n > len(x):
        raise PartitionTooLongError(f"Parts sum to {n}, longer than the series ({len(x)})")

    whole = _norm(x, p, n)
    by_size = {a: _norm(x, p, a).value_pow_p for a in set(parts)}
    rhs = math.fsum(a / n * by_size[a] for a in parts)
    return BoundCheck.compare(
        'partition_inequality', whole.value_pow_p, rhs,
        witness=_window_witness(whole),
        details={'parts': parts, 'n': n, 'p': p},
    )


def check_multiple_ordering(x: SampleSeries, p: float, n: int, d: int) -> BoundCheck:
    """Divisor ordering: the maximal mean at window d*n never exceeds the one at n."""
    p = validate_exponent(p, norm_laws=True)
    if int(d) != d or d < 1:
        raise InvalidPartitionError(f"Multiplier must be a positive integer, got {d}")
    if d * n > len(x):
        raise WindowTooLongError(f"Window {d}*{n} does not fit a series of {len(x)}")
    large = _norm(x, p, d * n)
    small = _norm(x, p, n)
    return BoundCheck.compare(
        'divisor_ordering', large.value, small.value,
        witness=_window_witness(large),
        details={'n': n, 'd': int(d), 'p': p, 'small_start': small.arg_start},
    )


def two_scale_factor(small: float, large: float) -> float:
    """(floor(large/small) + 1) * small / large, the worst-case ratio between scales."""
    return (math.floor(large / small) + 1) * small / large


def check_two_scale_bound(x: SampleSeries, p: float, n: int, m: int) -> BoundCheck:
    """
    Two-scale bound M_m^p <= c * M_n^p with c = (floor(m/n)+1) n / m <= 2.

    The argument extends a best window of length m to one of length
    (floor(m/n)+1)*n, so that longer window has to fit in the series too.
    """
    p = validate_exponent(p, norm_laws=True)
    if n >= m:
        raise BadOrderError(f"Need n < m, got n={n}, m={m}")
    extended = (m // n + 1) * n
    if extended > len(x):
        raise WindowTooLongError(
            f"Extended window {extended} = (m//n + 1)*n does not fit a series of {len(x)}")
    factor = two_scale_factor(n, m)
    large = _norm(x, p, m)
    small = _norm(x, p, n)
    ratio = large.value_pow_p / small.value_pow_p if small.value_pow_p > 0 else 0.0
    return BoundCheck.compare(
        'two_scale_bound', large.value_pow_p, factor * small.value_pow_p,
        witness=_window_witness(large),
        details={'n': n, 'm': m, 'p': p, 'factor': factor, 'ratio': ratio,
                 'extended_window': extended,
                 'extended_value_pow_p': _norm(x, p, extended).value_pow_p},
        also=factor <= 2.0 + REL_TOL_EXACT,
    )


def impulse_counterexample_pair(n: int, m: int, p: float = 1.0) -> BoundCheck:
    """
    The impulse train x(n) against a window m that n does not divide.

    Writing m = (d-1)*n + j with 1 <= j <= n-1, the train of length m + 2n has
    maximal p-th power means 1/n at window n and d/m at window m, and
    1/n < d/m. The check is strict and also requires both values to match
    their closed forms within 1e-12.
    """
    p = validate_exponent(p)
    if int(n) != n or n < 2:
        raise InvalidPeriodError(f"Period must be an integer >= 2, got {n}")
    if int(m) != m or m < 1:
        raise WindowTooLongError(f"Window must be a positive integer, got {m}")
    if m % n == 0:
        raise BadOrderError(f"{n} divides {m}; the maximal means are ordered in that case")
    n, m = int(n), int(m)
    d, j = m // n + 1, m % n
    x = impulse_train(n, m + 2 * n)
    at_n = _norm(x, p, n)
    at_m = _norm(x, p, m)
    exact = abs(at_n.value_pow_p - 1.0 / n) <= REL_TOL_EXACT and abs(at_m.value_pow_p - d / m) <= REL_TOL_EXACT
    return BoundCheck.compare(
        'impulse_counterexample', at_n.value_pow_p, at_m.value_pow_p, strict=True,
        witness=_window_witness(at_m),
        details={'n': n, 'm': m, 'd': d, 'j': j, 'p': p, 'length': len(x),
                 'expected_at_n': 1.0 / n, 'expected_at_m': d / m},
        also=exact,
    )


def single_impulse_reverse_pair(n: int, m: int, p: float = 1.0) -> BoundCheck:
    """A single impulse has maximal p-th power mean 1/m at window m, below 1/n at n < m."""
    p = validate_exponent(p)
    if not 1 <= n < m:
        raise BadOrderError(f"Need 1 <= n < m, got n={n}, m={m}")
    values = np.zeros(m + 1)
    values[0] = 1.0
    y = SampleSeries(values, name='single_impulse')
    at_m = _norm(y, p, m)
    at_n = _norm(y, p, n)
    exact = abs(at_m.value_pow_p - 1.0 / m) <= REL_TOL_EXACT and abs(at_n.value_pow_p - 1.0 / n) <= REL_TOL_EXACT
    return BoundCheck.compare(
        'single_impulse_reverse', at_m.value_pow_p, at_n.value_pow_p, strict=True,
        witness=_window_witness(at_m),
        details={'n': n, 'm': m, 'p': p},
        also=exact,
    )


def check_norm_laws(x: SampleSeries, y: SampleSeries, p: float, n: int, c: float) -> List[BoundCheck]:
    """Homogeneity, triangle inequality and definiteness of the windowed quantity (p >= 1)."""
    p = validate_exponent(p, norm_laws=True)
    if len(x) != len(y):
        raise LengthTooShortError(f"Series lengths differ: {len(x)} vs {len(y)}")
    nx = _norm(x, p, n)
    ny = _norm(y, p, n)
    scaled = _norm(x.scaled(c), p, n)
    summed = _norm(SampleSeries(x.values + y.values, dt=x.dt), p, n)

    expected = abs(c) * nx.value
    homogeneity = BoundCheck.compare(
        'homogeneity', abs(scaled.value - expected), REL_TOL_EXACT * expected, rel_tol=0.0,
        details={'c': c, 'scaled': scaled.value, 'expected': expected})
    triangle = BoundCheck.compare(
        'triangle_inequality', summed.value, nx.value + ny.value,
        witness=_window_witness(summed))
    all_zero = not np.any(x.values)
    definiteness = BoundCheck(
        name='definiteness', lhs=nx.value, rhs=sup_norm(x),
        passed=(nx.value == 0.0) == all_zero, details={'all_zero': all_zero})
    return [homogeneity, triangle, definiteness]


def scale_ladder(x: SampleSeries, p: float, windows: Sequence[int], workers: int = 1) -> ScaleReport:
    """
    Tabulate the maximal p-mean over a ladder of window sizes.

    Windows are deduplicated and sorted. A row is flagged as violating naive
    monotonicity when its value exceeds (beyond 1e-12 relative) the value at
    some smaller window of the ladder.

    Args:
        x (SampleSeries): Input series.
        p (float): Exponent.
        windows (Sequence[int]): Window sizes in samples.
        workers (int): Evaluate rows on this many threads.

    Returns:
        ScaleReport: One row per window size.
    """
    p = validate_exponent(p)
    ladder = sorted({int(w) for w in windows})
    if not ladder:
        raise EmptyLadderError("At least one window size is required")
    specs = [WindowSpec(p=p, n=n) for n in ladder]
    for spec in specs:
        spec.validate_for(len(x))

    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda s: windowed_pnorm(x, s), specs))
        else:
            results = [windowed_pnorm(x, s) for s in specs]
    except Exception as e:
        logger.error(f"Error evaluating scale ladder: {str(e)}")
        raise

    rows = []
    smallest_so_far: Optional[float] = None
    for result in results:
        flagged = smallest_so_far is not None and result.value > smallest_so_far * (1.0 + REL_TOL_EXACT)
        rows.append(ScaleRow(window_samples=result.n, window_duration=result.n * x.dt,
                             value=result.value, value_pow_p=result.value_pow_p,
                             arg_start=result.arg_start, violates_naive_monotonicity=flagged))
        smallest_so_far = result.value if smallest_so_far is None else min(smallest_so_far, result.value)

    report = ScaleReport(rows=rows, p=p, source=x.fingerprint())
    if report.flagged_windows():
        logger.info(f"Naive monotonicity fails at windows {report.flagged_windows()}")
    return report
