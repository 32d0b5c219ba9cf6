"""
Brute-force oracles and randomized verification campaigns.

A campaign draws random inputs, runs one registered check per trial and
collects every check that did not pass. For checks backed by a theorem those
are failures; for the naive-monotonicity checks they are findings, since the
claim being tested is false in general.
"""

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src import continuous, discrete
from src.errors import ConfigError, InvalidGridError, UnknownCheckError
from src.models import (
    REL_TOL_EXACT,
    BoundCheck,
    SampleSeries,
    StepFunction,
    WindowSpec,
    WindowedNormResult,
    validate_exponent,
)
from src.reports import json_default

MAX_GRID_POINTS = 20_000_000


# Oracles

def brute_force_windowed_pnorm(x: SampleSeries, spec: WindowSpec) -> WindowedNormResult:
    """Same contract as discrete.windowed_pnorm, summing every window directly (O(N*n))."""
    spec.validate_for(len(x))
    weights = discrete.powered(x.values, spec.p).tolist()
    best_sum, best_start = -1.0, 0
    for j in range(len(weights) - spec.n + 1):
        s = math.fsum(weights[j:j + spec.n])
        if s > best_sum:
            best_sum, best_start = s, j
    value_pow_p = best_sum / spec.n
    return WindowedNormResult(value=value_pow_p ** (1.0 / spec.p), value_pow_p=value_pow_p,
                              arg_start=best_start, n=spec.n, p=spec.p)


def grid_oracle_interval_pnorm(f: StepFunction, p: float, T: float, grid_step: float) -> float:
    """
    Maximal p-th power interval mean over left endpoints on a uniform grid.

    The grid starts at b_0 - T and reaches past b_K. Every grid value is the
    mean over an actual interval, so the result never exceeds
    interval_pnorm(...).value_pow_p; the gap is at most
    grid_gap_bound(f, p, T, grid_step).
    """
    if not (math.isfinite(grid_step) and grid_step > 0):
        raise InvalidGridError(f"Grid step must be finite and > 0, got {grid_step}")
    p = validate_exponent(p)
    T = continuous.validate_length(T)
    start = f.breakpoints[0] - T
    n_points = int(math.ceil((f.breakpoints[-1] - start) / grid_step)) + 1
    if n_points > MAX_GRID_POINTS:
        raise InvalidGridError(f"Grid of {n_points} points is too fine (limit {MAX_GRID_POINTS})")
    lefts = start + grid_step * np.arange(n_points)
    prefix = continuous.prefix_integrals(f, p)
    masses = continuous.mass_up_to(f, prefix, lefts + T) - continuous.mass_up_to(f, prefix, lefts)
    return float(np.max(masses)) / T


def grid_gap_bound(f: StepFunction, p: float, T: float, grid_step: float) -> float:
    """One-sided Lipschitz bound max|c|^p * grid_step / T on the grid oracle's shortfall."""
    return f.max_abs() ** p * grid_step / T


# Campaign plumbing

@dataclass(frozen=True)
class SizeBounds:
    """Limits and mixture weights for randomly drawn inputs."""

    max_length: int = 200
    value_range: float = 10.0
    max_pieces: int = 50
    step_value_range: float = 5.0
    support_range: float = 10.0
    bernoulli_share: float = 0.25
    inject_share: float = 0.2


class TrialOutcome(NamedTuple):
    inputs: Dict[str, Any]
    checks: List[BoundCheck]
    stats: Dict[str, float]


@dataclass(frozen=True)
class CampaignCheck:
    name: str
    trial: Callable[[np.random.Generator, SizeBounds], TrialOutcome]
    reports_findings: bool = False


@dataclass(frozen=True)
class CampaignEntry:
    """A check that did not pass, with enough to reproduce it."""

    trial: int
    fingerprint: Dict[str, Any]
    check: BoundCheck

    def to_dict(self) -> Dict[str, Any]:
        return {'trial': self.trial, 'fingerprint': self.fingerprint, 'check': self.check.to_dict()}


@dataclass
class CampaignReport:
    check: str
    seed: int
    trials: int
    failures: List[CampaignEntry] = field(default_factory=list)
    findings: List[CampaignEntry] = field(default_factory=list)
    stats: Dict[str, float] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self, include_elapsed: bool = True) -> Dict[str, Any]:
        out = {'type': 'summary', 'check': self.check, 'seed': self.seed, 'trials': self.trials,
               'failures': len(self.failures), 'findings': len(self.findings),
               'passed': self.passed, 'stats': self.stats}
        if include_elapsed:
            out['elapsed'] = self.elapsed
        return out

    def to_records(self, include_elapsed: bool = True) -> List[Dict[str, Any]]:
        """One record per failure and finding, then the summary."""
        records = [dict(entry.to_dict(), type='failure', check_name=self.check) for entry in self.failures]
        records += [dict(entry.to_dict(), type='finding', check_name=self.check) for entry in self.findings]
        records.append(self.summary(include_elapsed))
        return records

    def to_jsonl(self) -> str:
        return ''.join(json.dumps(r, default=json_default, sort_keys=True) + '\n' for r in self.to_records())


CAMPAIGN_CHECKS: Dict[str, CampaignCheck] = {}


def register(name: str, reports_findings: bool = False):
    def wrap(fn: Callable[[np.random.Generator, SizeBounds], TrialOutcome]):
        CAMPAIGN_CHECKS[name] = CampaignCheck(name=name, trial=fn, reports_findings=reports_findings)
        return fn
    return wrap


def campaign_names() -> List[str]:
    return sorted(CAMPAIGN_CHECKS)


def _digest(*arrays: np.ndarray) -> str:
    h = hashlib.sha1()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()[:12]


# Random inputs

EXPONENTS = (1.0, 1.5, 2.0, 3.0)
STEP_EXPONENTS = (1.0, 2.0, 3.0)


def random_series(rng: np.random.Generator, bounds: SizeBounds, min_length: int = 1) -> SampleSeries:
    """Uniform values in [-R, R], or a 0/1 Bernoulli series (exact window sums)."""
    length = int(rng.integers(min_length, max(min_length, bounds.max_length) + 1))
    if rng.random() < bounds.bernoulli_share:
        values = (rng.random(length) < rng.uniform(0.1, 0.9)).astype(np.float64)
    else:
        values = rng.uniform(-bounds.value_range, bounds.value_range, length)
    return SampleSeries(values)


def random_step_function(rng: np.random.Generator, bounds: SizeBounds) -> StepFunction:
    """Up to max_pieces pieces on sorted uniform breakpoints; sometimes integer values so neighbours repeat."""
    k = int(rng.integers(1, bounds.max_pieces + 1))
    breakpoints = np.unique(rng.uniform(0.0, bounds.support_range, k + 1))
    if breakpoints.size < 2:
        breakpoints = np.array([0.0, bounds.support_range])
    values = rng.uniform(-bounds.step_value_range, bounds.step_value_range, breakpoints.size - 1)
    if rng.random() < 0.25:
        values = np.round(values)
    return StepFunction(breakpoints, values)


def _series_inputs(x: SampleSeries, **params: Any) -> Dict[str, Any]:
    return dict(params, length=len(x), digest=x.fingerprint())


def _step_inputs(f: StepFunction, **params: Any) -> Dict[str, Any]:
    return dict(params, pieces=f.n_pieces, digest=_digest(f.breakpoints, f.values))


def _random_composition(rng: np.random.Generator, total: int) -> List[int]:
    d = int(rng.integers(1, total + 1))
    cuts = np.sort(rng.choice(np.arange(1, total), size=d - 1, replace=False)) if d > 1 else np.array([], int)
    edges = np.concatenate(([0], cuts, [total]))
    return [int(a) for a in np.diff(edges)]


def _impulse_pair(rng: np.random.Generator, min_d: int = 1) -> Tuple[int, int]:
    n = int(rng.integers(2, 9))
    d = int(rng.integers(min_d, 5))
    j = int(rng.integers(1, n))
    return n, (d - 1) * n + j


# Discrete checks

@register('equivalence_bounds')
def _trial_equivalence_bounds(rng, bounds):
    x = random_series(rng, bounds)
    p = float(rng.choice(EXPONENTS))
    n = int(rng.integers(1, len(x) + 1))
    check = discrete.check_equivalence_bounds(x, WindowSpec(p=p, n=n))
    return TrialOutcome(_series_inputs(x, p=p, n=n), [check], {})


@register('partition_inequality')
def _trial_partition_inequality(rng, bounds):
    x = random_series(rng, bounds)
    p = float(rng.choice(EXPONENTS))
    parts = _random_composition(rng, int(rng.integers(1, len(x) + 1)))
    check = discrete.check_partition_inequality(x, p, parts)
    return TrialOutcome(_series_inputs(x, p=p, parts=parts), [check], {})


@register('divisor_ordering')
def _trial_divisor_ordering(rng, bounds):
    x = random_series(rng, bounds)
    p = float(rng.choice(EXPONENTS))
    n = int(rng.integers(1, len(x) + 1))
    d = int(rng.integers(1, len(x) // n + 1))
    check = discrete.check_multiple_ordering(x, p, n, d)
    return TrialOutcome(_series_inputs(x, p=p, n=n, d=d), [check], {})


@register('two_scale_bound')
def _trial_two_scale_bound(rng, bounds):
    x = random_series(rng, bounds, min_length=3)
    p = float(rng.choice(EXPONENTS))
    n = int(rng.integers(1, (len(x) - 1) // 2 + 1))
    m = int(rng.integers(n + 1, len(x) - n + 1))
    check = discrete.check_two_scale_bound(x, p, n, m)
    stats = {'max_ratio': check.details['ratio'], 'max_factor': check.details['factor']}
    return TrialOutcome(_series_inputs(x, p=p, n=n, m=m), [check], stats)


@register('norm_laws')
def _trial_norm_laws(rng, bounds):
    x = random_series(rng, bounds)
    if rng.random() < 0.1:
        x = SampleSeries(np.zeros(len(x)))
    y = SampleSeries(rng.uniform(-bounds.value_range, bounds.value_range, len(x)))
    p = float(rng.choice(EXPONENTS))
    n = int(rng.integers(1, len(x) + 1))
    c = float(rng.uniform(-5.0, 5.0))
    checks = discrete.check_norm_laws(x, y, p, n, c)
    return TrialOutcome(_series_inputs(x, p=p, n=n, c=c, y_digest=y.fingerprint()), checks, {})


@register('oracle_agreement')
def _trial_oracle_agreement(rng, bounds):
    x = random_series(rng, bounds)
    p = float(rng.choice(EXPONENTS + (0.5,)))
    spec = WindowSpec(p=p, n=int(rng.integers(1, len(x) + 1)))
    fast = discrete.windowed_pnorm(x, spec)
    slow = brute_force_windowed_pnorm(x, spec)
    check = BoundCheck.compare(
        'oracle_agreement', abs(fast.value_pow_p - slow.value_pow_p), REL_TOL_EXACT * slow.value_pow_p,
        rel_tol=0.0, witness={'start': fast.arg_start, 'oracle_start': slow.arg_start},
        also=fast.arg_start == slow.arg_start)
    return TrialOutcome(_series_inputs(x, p=p, n=spec.n), [check], {})


@register('impulse_counterexample')
def _trial_impulse_counterexample(rng, bounds):
    n, m = _impulse_pair(rng)
    p = float(rng.choice((1.0, 2.0)))
    checks = [discrete.impulse_counterexample_pair(n, m, p),
              discrete.single_impulse_reverse_pair(min(n, m), max(n, m), p)]
    return TrialOutcome({'n': n, 'm': m, 'p': p}, checks, {})


@register('naive_monotonicity', reports_findings=True)
def _trial_naive_monotonicity(rng, bounds):
    injected = bool(rng.random() < bounds.inject_share)
    p = float(rng.choice(EXPONENTS))
    if injected:
        n, m = _impulse_pair(rng, min_d=2)
        x = discrete.impulse_train(n, m + 2 * n)
    else:
        length = int(rng.integers(2, bounds.max_length + 1))
        x = SampleSeries((rng.random(length) < rng.uniform(0.1, 0.9)).astype(np.float64))
        n = int(rng.integers(1, len(x)))
        m = int(rng.integers(n + 1, len(x) + 1))
    small = discrete.windowed_pnorm(x, WindowSpec(p=p, n=n))
    large = discrete.windowed_pnorm(x, WindowSpec(p=p, n=m))
    check = BoundCheck.compare('naive_monotonicity', large.value, small.value, rel_tol=REL_TOL_EXACT,
                               witness={'window': m, 'start': large.arg_start,
                                        'value_pow_p': large.value_pow_p})
    stats = {'injected': float(injected), 'injected_found': float(injected and not check.passed)}
    return TrialOutcome(_series_inputs(x, p=p, n=n, m=m, injected=injected), [check], stats)


# Continuous checks

@register('partition_inequality_cont')
def _trial_partition_inequality_cont(rng, bounds):
    f = random_step_function(rng, bounds)
    p = float(rng.choice(STEP_EXPONENTS))
    parts = [float(a) for a in rng.uniform(0.05, 5.0, int(rng.integers(1, 5)))]
    check = continuous.check_partition_inequality_cont(f, p, parts)
    return TrialOutcome(_step_inputs(f, p=p, parts=parts), [check], {})


@register('divisor_ordering_cont')
def _trial_divisor_ordering_cont(rng, bounds):
    f = random_step_function(rng, bounds)
    p = float(rng.choice(STEP_EXPONENTS))
    V = float(rng.uniform(0.05, 5.0))
    d = int(rng.integers(1, 6))
    check = continuous.check_multiple_ordering_cont(f, p, V, d)
    return TrialOutcome(_step_inputs(f, p=p, V=V, d=d), [check], {})


@register('two_scale_bound_cont')
def _trial_two_scale_bound_cont(rng, bounds):
    f = random_step_function(rng, bounds)
    p = float(rng.choice(STEP_EXPONENTS))
    T = float(rng.uniform(0.05, 5.0))
    S = T * float(rng.uniform(1.01, 6.0))
    check = continuous.check_two_scale_bound_cont(f, p, T, S)
    stats = {'max_ratio': check.details['ratio'], 'max_factor': check.details['factor']}
    return TrialOutcome(_step_inputs(f, p=p, T=T, S=S), [check], stats)


@register('norm_laws_cont')
def _trial_norm_laws_cont(rng, bounds):
    f = random_step_function(rng, bounds)
    g = random_step_function(rng, bounds)
    p = float(rng.choice(STEP_EXPONENTS))
    V = float(rng.uniform(0.05, 5.0))
    c = float(rng.uniform(-5.0, 5.0))
    checks = continuous.check_norm_laws_cont(f, g, p, V, c)
    return TrialOutcome(_step_inputs(f, p=p, V=V, c=c), checks, {})


def _non_multiple_pair(rng: np.random.Generator) -> Tuple[float, float]:
    T = float(rng.uniform(0.1, 5.0))
    ratio = int(rng.integers(1, 8)) + float(rng.uniform(0.05, 0.95))
    return T, T * ratio


@register('bump_train_exactness')
def _trial_bump_train_exactness(rng, bounds):
    T, S = _non_multiple_pair(rng)
    p = float(rng.choice((1.0, 2.0)))
    check = continuous.bump_counterexample_pair(T, S, p)
    return TrialOutcome({'T': T, 'S': S, 'p': p}, [check], {})


@register('reverse_counterexample')
def _trial_reverse_counterexample(rng, bounds):
    T = float(rng.uniform(0.1, 5.0))
    S = T * float(rng.uniform(1.01, 6.0))
    p = float(rng.choice(STEP_EXPONENTS))
    check = continuous.check_reverse_counterexample(T, S, p)
    return TrialOutcome({'T': T, 'S': S, 'p': p}, [check], {})


@register('grid_oracle')
def _trial_grid_oracle(rng, bounds):
    f = random_step_function(rng, bounds)
    p = float(rng.choice(STEP_EXPONENTS))
    T = float(rng.uniform(0.05, 5.0))
    step = (f.support_length + T) / 2000.0
    exact = continuous.interval_pnorm(f, p, T).value_pow_p
    grid = grid_oracle_interval_pnorm(f, p, T, step)
    check = BoundCheck.compare(
        'grid_oracle', exact - grid, grid_gap_bound(f, p, T, step), rel_tol=REL_TOL_EXACT,
        details={'exact': exact, 'grid': grid, 'grid_step': step},
        also=grid <= exact * (1.0 + REL_TOL_EXACT) + 1e-300)
    return TrialOutcome(_step_inputs(f, p=p, T=T, grid_step=step), [check], {})


@register('naive_monotonicity_cont', reports_findings=True)
def _trial_naive_monotonicity_cont(rng, bounds):
    injected = bool(rng.random() < bounds.inject_share)
    p = float(rng.choice(STEP_EXPONENTS))
    if injected:
        T, S = _non_multiple_pair(rng)
        f = continuous.bump_train(T, S, p).f
    else:
        f = random_step_function(rng, bounds)
        T = float(rng.uniform(0.05, 5.0))
        S = T * float(rng.uniform(1.01, 6.0))
    small = continuous.interval_pnorm(f, p, T)
    large = continuous.interval_pnorm(f, p, S)
    check = BoundCheck.compare('naive_monotonicity_cont', large.value, small.value, rel_tol=REL_TOL_EXACT,
                               witness={'length': S, 'left': large.arg_left,
                                        'value_pow_p': large.value_pow_p})
    stats = {'injected': float(injected), 'injected_found': float(injected and not check.passed)}
    return TrialOutcome(_step_inputs(f, p=p, T=T, S=S, injected=injected), [check], stats)


# Runner

def _run_trials(which: str, seed: int, bounds: SizeBounds,
                indices: Sequence[int]) -> List[Tuple[int, Dict[str, Any], List[BoundCheck], Dict[str, float]]]:
    spec = CAMPAIGN_CHECKS[which]
    out = []
    for i in indices:
        rng = np.random.default_rng([seed, i])
        outcome = spec.trial(rng, bounds)
        fingerprint = dict(outcome.inputs, seed=seed, trial=i)
        out.append((i, fingerprint, outcome.checks, outcome.stats))
    return out


def _merge_stats(total: Dict[str, float], stats: Dict[str, float]) -> None:
    for key, value in stats.items():
        if key.startswith('max_'):
            total[key] = max(total.get(key, value), value)
        else:
            total[key] = total.get(key, 0.0) + value


def run_campaign(which: str, trials: int, seed: int,
                 size_bounds: Optional[SizeBounds] = None, workers: int = 1) -> CampaignReport:
    """
    Run one registered check over random inputs.

    Each trial draws from default_rng([seed, trial]), so results depend only
    on (seed, trials), never on how trials are split across workers.

    Args:
        which (str): Name of a registered check (see campaign_names()).
        trials (int): Number of trials, >= 1.
        seed (int): Campaign seed.
        size_bounds (SizeBounds, optional): Input limits.
        workers (int): Shard trials over this many processes.

    Returns:
        CampaignReport: Failures, findings and aggregated statistics.
    """
    if which not in CAMPAIGN_CHECKS:
        raise UnknownCheckError(f"Unknown check {which!r}; known: {', '.join(campaign_names())}")
    if trials < 1:
        raise ConfigError(f"Campaign needs at least one trial, got {trials}")
    bounds = size_bounds or SizeBounds()
    spec = CAMPAIGN_CHECKS[which]
    started = time.perf_counter()

    try:
        indices = list(range(trials))
        if workers > 1:
            shards = [indices[k::workers] for k in range(workers)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = pool.map(_run_trials, [which] * workers, [seed] * workers,
                                 [bounds] * workers, shards)
                results = sorted((r for part in parts for r in part), key=lambda r: r[0])
        else:
            results = _run_trials(which, seed, bounds, indices)
    except Exception as e:
        logger.error(f"Error in campaign {which}: {str(e)}")
        raise

    report = CampaignReport(check=which, seed=seed, trials=trials)
    for i, fingerprint, checks, stats in results:
        _merge_stats(report.stats, stats)
        for check in checks:
            if check.passed:
                continue
            entry = CampaignEntry(trial=i, fingerprint=fingerprint, check=check)
            (report.findings if spec.reports_findings else report.failures).append(entry)
    report.elapsed = time.perf_counter() - started

    log = logger.warning if report.failures else logger.info
    log(f"Campaign {which}: {trials} trials, {len(report.failures)} failures, "
        f"{len(report.findings)} findings in {report.elapsed:.2f}s")
    return report
