"""
Maximal interval p-means of piecewise-constant functions on the real line.

For a step function f, exponent p and length T > 0 the quantity is

    sup over t of (1/T) * integral_t^{t+T} |f(s)|^p ds.

The map t -> integral_t^{t+T} |f|^p is continuous and piecewise linear with
kinks only where t or t + T crosses a breakpoint, so the supremum is attained
on the finite candidate set {b_k} U {b_k - T} and can be computed exactly.
"""

import math
from typing import Dict, List, NamedTuple, Sequence

import numpy as np
from loguru import logger

from src.discrete import first_maximizer, powered, rescaled_power, two_scale_factor
from src.errors import (
    BadOrderError,
    InvalidEpsilonError,
    InvalidLengthError,
    InvalidPartitionError,
    NotACounterexampleCaseError,
)
from src.models import (
    REL_TOL_EXACT,
    BoundCheck,
    IntervalNormResult,
    StepFunction,
    validate_exponent,
)


class BumpTrain(NamedTuple):
    f: StepFunction
    d: int
    eps: float


def validate_length(T: float, what: str = 'Interval length') -> float:
    T = float(T)
    if not math.isfinite(T) or T <= 0:
        raise InvalidLengthError(f"{what} must be finite and > 0, got {T}")
    return T


def piece_weights(f: StepFunction, p: float) -> np.ndarray:
    """|c_k|^p for every piece."""
    return powered(f.values, p)


def prefix_integrals(f: StepFunction, p: float) -> np.ndarray:
    """F(b_k) = integral of |f|^p from b_0 to b_k, one entry per breakpoint."""
    return np.concatenate(([0.0], np.cumsum(piece_weights(f, p) * f.widths)))


def mass_up_to(f: StepFunction, prefix: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Integral of |f|^p from -inf to each point (linear between breakpoints, constant outside)."""
    return np.interp(points, f.breakpoints, prefix)


def integrate_power(f: StepFunction, p: float, a: float, b: float) -> float:
    """
    Integral of |f|^p over (a, b), summed piece by piece.

    Independent of the prefix-integral path; used to re-evaluate witnesses.
    """
    if b <= a:
        return 0.0
    left = np.maximum(f.breakpoints[:-1], a)
    right = np.minimum(f.breakpoints[1:], b)
    overlap = np.clip(right - left, 0.0, None)
    return math.fsum((piece_weights(f, p) * overlap).tolist())


def interval_pnorm(f: StepFunction, p: float, T: float) -> IntervalNormResult:
    """
    Exact maximal interval p-mean over intervals of length T.

    Args:
        f (StepFunction): Piecewise-constant function.
        p (float): Exponent, > 0.
        T (float): Interval length, > 0.

    Returns:
        IntervalNormResult: Value, its p-th power and the smallest maximizing
            left endpoint among the candidates. If T covers the whole support
            the result is the full integral divided by T.
    """
    p = validate_exponent(p)
    T = validate_length(T)
    prefix = prefix_integrals(f, p)
    if not np.all(np.isfinite(prefix)):
        return _interval_pnorm_rescaled(f, p, T)
    candidates = np.unique(np.concatenate((f.breakpoints, f.breakpoints - T)))
    masses = mass_up_to(f, prefix, candidates + T) - mass_up_to(f, prefix, candidates)
    best = first_maximizer(
        masses, lambda i: integrate_power(f, p, candidates[i], candidates[i] + T), cost=f.n_pieces)
    left = float(candidates[best])
    value_pow_p = integrate_power(f, p, left, left + T) / T
    logger.debug(f"interval_pnorm T={T} p={p}: {candidates.size} candidates, best left {left}")
    return IntervalNormResult(value=value_pow_p ** (1.0 / p), value_pow_p=value_pow_p,
                              arg_left=left, T=T, p=p)


def _interval_pnorm_rescaled(f: StepFunction, p: float, T: float) -> IntervalNormResult:
    """Integrals of |f|^p overflow: work on f / sup|f| and scale the result back."""
    peak = float(np.max(np.abs(f.values)))
    unit = interval_pnorm(StepFunction(f.breakpoints, f.values / peak), p, T)
    logger.debug(f"interval_pnorm T={T} p={p}: rescaled by {peak}")
    return IntervalNormResult(value=peak * unit.value, value_pow_p=rescaled_power(unit.value_pow_p, peak, p),
                              arg_left=unit.arg_left, T=T, p=p)


def single_bump(eps: float, p: float) -> StepFunction:
    """Rectangle of height eps^(-1/p) on (0, eps), so that the integral of its p-th power is 1."""
    p = validate_exponent(p)
    eps = float(eps)
    if not math.isfinite(eps) or eps <= 0:
        raise InvalidEpsilonError(f"Bump width must be finite and > 0, got {eps}")
    return StepFunction([0.0, eps], [eps ** (-1.0 / p)])


def is_factor(T: float, S: float) -> bool:
    """True when S/T lies within 1e-12 (relative) of an integer."""
    ratio = S / T
    return abs(ratio - round(ratio)) <= REL_TOL_EXACT * ratio


def bump_train(T: float, S: float, p: float) -> BumpTrain:
    """
    d + 1 unit-mass bumps spaced T + eps apart, with d = floor(S/T).

    Any interval of length T meets at most one bump, while an interval of
    length S covers all d + 1 of them, so the maximal p-th power means are
    1/T and (d+1)/S with 1/T < (d+1)/S.

    Args:
        T (float): Smaller length.
        S (float): Larger length, not a multiple of T.
        p (float): Exponent.

    Returns:
        BumpTrain: The step function, d and the bump width
            eps = (S - d*T) / (2*(d+1)).
    """
    p = validate_exponent(p)
    T = validate_length(T, 'T')
    S = validate_length(S, 'S')
    if T >= S:
        raise NotACounterexampleCaseError(f"Need T < S, got T={T}, S={S}")
    if is_factor(T, S):
        raise NotACounterexampleCaseError(f"T={T} is a factor of S={S}")

    d = int(math.floor(S / T))
    eps = (S - d * T) / (2 * (d + 1))
    height = eps ** (-1.0 / p)
    starts = np.arange(d + 1) * (T + eps)
    breakpoints = np.ravel(np.column_stack((starts, starts + eps)))
    values = np.zeros(2 * d + 1)
    values[::2] = height
    return BumpTrain(f=StepFunction(breakpoints, values), d=d, eps=eps)


def _interval_witness(result: IntervalNormResult) -> Dict[str, float]:
    return {'length': result.T, 'left': result.arg_left, 'value_pow_p': result.value_pow_p}


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL_EXACT * max(abs(a), abs(b))


def bump_counterexample_pair(T: float, S: float, p: float = 1.0) -> BoundCheck:
    """Strict pair 1/T < (d+1)/S realized by the bump train, both sides checked against their closed forms."""
    train = bump_train(T, S, p)
    at_T = interval_pnorm(train.f, p, T)
    at_S = interval_pnorm(train.f, p, S)
    exact = _close(T * at_T.value_pow_p, 1.0) and _close(S * at_S.value_pow_p, train.d + 1.0)
    return BoundCheck.compare(
        'bump_counterexample', at_T.value_pow_p, at_S.value_pow_p, strict=True,
        witness=_interval_witness(at_S),
        details={'T': T, 'S': S, 'p': p, 'd': train.d, 'eps': train.eps,
                 'expected_at_T': 1.0 / T, 'expected_at_S': (train.d + 1) / S},
        also=exact,
    )


def check_reverse_counterexample(T: float, S: float, p: float) -> BoundCheck:
    """A single bump narrower than T has maximal p-th power means 1/S < 1/T."""
    p = validate_exponent(p)
    if not 0 < T < S:
        raise BadOrderError(f"Need 0 < T < S, got T={T}, S={S}")
    eps = min(T, S - T) / 2
    g = single_bump(eps, p)
    at_S = interval_pnorm(g, p, S)
    at_T = interval_pnorm(g, p, T)
    exact = _close(S * at_S.value_pow_p, 1.0) and _close(T * at_T.value_pow_p, 1.0)
    return BoundCheck.compare(
        'reverse_counterexample', at_S.value_pow_p, at_T.value_pow_p, strict=True,
        witness=_interval_witness(at_S),
        details={'T': T, 'S': S, 'p': p, 'eps': eps},
        also=exact,
    )


def check_partition_inequality_cont(f: StepFunction, p: float, parts: Sequence[float]) -> BoundCheck:
    """
    With V = sum(parts): N_V^p <= sum_l (parts[l] / V) * N_{parts[l]}^p.

    In one dimension cutting the best interval of length V into consecutive
    pieces of lengths parts[l] is what makes this hold.
    """
    p = validate_exponent(p, norm_laws=True)
    if len(parts) == 0 or any(not (math.isfinite(a) and a > 0) for a in parts):
        raise InvalidPartitionError(f"Parts must be finite and > 0, got {list(parts)}")
    V = math.fsum(parts)
    whole = interval_pnorm(f, p, V)
    rhs = math.fsum(a / V * interval_pnorm(f, p, a).value_pow_p for a in parts)
    return BoundCheck.compare(
        'partition_inequality_cont', whole.value_pow_p, rhs,
        witness=_interval_witness(whole),
        details={'parts': [float(a) for a in parts], 'V': V, 'p': p},
    )


def check_multiple_ordering_cont(f: StepFunction, p: float, V: float, d: int) -> BoundCheck:
    """The maximal mean over intervals of length d*V never exceeds the one at V."""
    p = validate_exponent(p, norm_laws=True)
    V = validate_length(V, 'V')
    if int(d) != d or d < 1:
        raise InvalidPartitionError(f"Multiplier must be a positive integer, got {d}")
    large = interval_pnorm(f, p, d * V)
    small = interval_pnorm(f, p, V)
    return BoundCheck.compare(
        'divisor_ordering_cont', large.value, small.value,
        witness=_interval_witness(large),
        details={'V': V, 'd': int(d), 'p': p},
    )


def check_two_scale_bound_cont(f: StepFunction, p: float, T: float, S: float) -> BoundCheck:
    """N_S^p <= c * N_T^p with c = (floor(S/T)+1) T / S <= 2."""
    p = validate_exponent(p, norm_laws=True)
    if not 0 < T < S:
        raise BadOrderError(f"Need 0 < T < S, got T={T}, S={S}")
    factor = two_scale_factor(T, S)
    large = interval_pnorm(f, p, S)
    small = interval_pnorm(f, p, T)
    ratio = large.value_pow_p / small.value_pow_p if small.value_pow_p > 0 else 0.0
    return BoundCheck.compare(
        'two_scale_bound_cont', large.value_pow_p, factor * small.value_pow_p,
        witness=_interval_witness(large),
        details={'T': T, 'S': S, 'p': p, 'factor': factor, 'ratio': ratio},
        also=factor <= 2.0 + REL_TOL_EXACT,
    )


def check_norm_laws_cont(f: StepFunction, g: StepFunction, p: float, V: float, c: float) -> List[BoundCheck]:
    """Homogeneity, triangle inequality and definiteness of the interval quantity (p >= 1)."""
    p = validate_exponent(p, norm_laws=True)
    nf = interval_pnorm(f, p, V)
    ng = interval_pnorm(g, p, V)
    scaled = interval_pnorm(f.scaled(c), p, V)
    summed = interval_pnorm(f.add(g), p, V)

    expected = abs(c) * nf.value
    homogeneity = BoundCheck.compare(
        'homogeneity_cont', abs(scaled.value - expected), REL_TOL_EXACT * expected, rel_tol=0.0,
        details={'c': c, 'scaled': scaled.value, 'expected': expected})
    triangle = BoundCheck.compare(
        'triangle_inequality_cont', summed.value, nf.value + ng.value,
        witness=_interval_witness(summed))
    all_zero = not np.any(f.values)
    definiteness = BoundCheck(
        name='definiteness_cont', lhs=nf.value, rhs=f.max_abs(),
        passed=(nf.value == 0.0) == all_zero, details={'all_zero': all_zero})
    return [homogeneity, triangle, definiteness]
