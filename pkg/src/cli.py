"""
Command-line interface.

Commands:
    analyze         maximal p-means of a recorded series over a ladder of windows
    monitor         check a series against multi-scale limits
    counterexample  generate an impulse train or bump train and its two-scale pair
    verify          run randomized verification campaigns

Exit codes: 0 on success, 1 on a monitor violation or campaign failure,
2 on invalid input.
"""

import sys
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from typing import List, Optional

from loguru import logger

from src import continuous, discrete, reports, verify
from src.config import Settings, configure_logging, get_settings
from src.errors import MeanScaleError
from src.ingest import derive_rates, ingest_series, step_function_csv, write_series_csv, write_step_function_csv
from src.models import SampleSeries
from src.monitor import MonitorConfig, evaluate_monitor, window_to_samples

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2


def _int_list(text: str) -> List[int]:
    try:
        values = [int(item) for item in text.split(',') if item.strip()]
    except ValueError as e:
        raise ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e
    if not values:
        raise ArgumentTypeError("expected at least one window size")
    return values


def _float_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(',') if item.strip()]
    except ValueError as e:
        raise ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e
    if not values:
        raise ArgumentTypeError("expected at least one duration")
    return values


def _load_series(args: Namespace) -> SampleSeries:
    x = ingest_series(args.input, args.column, resample=args.resample)
    return derive_rates(x) if args.rates else x


def cmd_analyze(args: Namespace) -> int:
    x = _load_series(args)
    windows = list(args.windows or [])
    windows += [window_to_samples(d, x.dt) for d in (args.durations or [])]
    if not windows:
        raise MeanScaleError("analyze needs --windows and/or --durations")

    report = discrete.scale_ladder(x, args.p, windows, workers=args.workers)
    if args.plot_data:
        reports.atomic_write_text(args.plot_data, reports.plot_data_csv(report))
    if args.format == 'csv':
        text = reports.scale_report_csv(report)
    else:
        text = reports.to_json(reports.scale_report_payload(
            report, {'column': x.name, 'dt': x.dt, 't0': x.t0, 'length': len(x)}))
    reports.emit(text, args.out)
    return EXIT_OK


def cmd_monitor(args: Namespace) -> int:
    config = MonitorConfig.from_json_file(args.config)
    x = _load_series(args)
    report = evaluate_monitor(x, config)
    if args.format == 'csv':
        reports.emit(reports.frame_to_csv(report.to_frame()), args.out)
    else:
        reports.emit(reports.to_json(report.to_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _discrete_counterexample(args: Namespace) -> dict:
    if args.n is None or args.m is None:
        raise MeanScaleError("--discrete needs --n and --m")
    check = discrete.impulse_counterexample_pair(args.n, args.m, args.p)
    x = discrete.impulse_train(args.n, check.details['length'])
    if args.out:
        write_series_csv(x, args.out)
    larger = args.m > args.n
    return {
        'mode': 'discrete',
        'n': args.n,
        'm': args.m,
        'p': args.p,
        'd': check.details['d'],
        'j': check.details['j'],
        'norm_pow_p_at_n': check.lhs,
        'norm_pow_p_at_m': check.rhs,
        'expected_pair': [check.details['expected_at_n'], check.details['expected_at_m']],
        'message': 'larger window, larger max mean' if larger else 'smaller window, larger max mean',
        'verified': check.passed,
        'series': x.values.tolist(),
    }


def _continuous_counterexample(args: Namespace) -> dict:
    if args.T is None or args.S is None:
        raise MeanScaleError("--continuous needs --T and --S")
    check = continuous.bump_counterexample_pair(args.T, args.S, args.p)
    train = continuous.bump_train(args.T, args.S, args.p)
    if args.out:
        write_step_function_csv(train.f, args.out)
    return {
        'mode': 'continuous',
        'T': args.T,
        'S': args.S,
        'p': args.p,
        'd': train.d,
        'eps': train.eps,
        'norm_pow_p_at_T': check.lhs,
        'norm_pow_p_at_S': check.rhs,
        'expected_pair': [check.details['expected_at_T'], check.details['expected_at_S']],
        'message': 'larger interval, larger max mean',
        'verified': check.passed,
        'step_function_csv': step_function_csv(train.f),
    }


def cmd_counterexample(args: Namespace) -> int:
    payload = _discrete_counterexample(args) if args.discrete else _continuous_counterexample(args)
    reports.emit(reports.to_json(payload))
    return EXIT_OK if payload['verified'] else EXIT_VIOLATION


def cmd_verify(args: Namespace) -> int:
    names = verify.campaign_names() if args.check == 'all' else [args.check]
    text = ''
    failed = False
    for name in names:
        report = verify.run_campaign(name, args.trials, args.seed, workers=args.workers)
        failed = failed or not report.passed
        text += report.to_jsonl()
    reports.emit(text, args.out)
    return EXIT_VIOLATION if failed else EXIT_OK


def build_parser(settings: Settings) -> ArgumentParser:
    parser = ArgumentParser(prog='meanscale', description='Maximal windowed means across scales')
    parser.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level')
    sub = parser.add_subparsers(dest='command', required=True)

    def add_input(p: ArgumentParser) -> None:
        p.add_argument('--input', required=True, help='CSV file with a "t" column')
        p.add_argument('--column', required=True, help='Value column to analyze')
        p.add_argument('--resample', type=float, help='Uniform spacing (seconds) for irregular timestamps')
        p.add_argument('--rates', action='store_true', help='Column is cumulative; analyze its rates')
        p.add_argument('--format', choices=('json', 'csv'), default='json')
        p.add_argument('--out', help='Write the report here instead of stdout')

    analyze = sub.add_parser('analyze', help='Maximal p-means over a ladder of window sizes')
    add_input(analyze)
    analyze.add_argument('--p', type=float, default=settings.p)
    analyze.add_argument('--windows', type=_int_list, help='Window sizes in samples, e.g. 3,4,6')
    analyze.add_argument('--durations', type=_float_list, help='Window sizes in seconds')
    analyze.add_argument('--plot-data', dest='plot_data', help='Write (window_size, value) CSV here')
    analyze.add_argument('--workers', type=int, default=settings.workers)
    analyze.set_defaults(handler=cmd_analyze)

    monitor = sub.add_parser('monitor', help='Check multi-scale limits')
    add_input(monitor)
    monitor.add_argument('--config', required=True, help='Monitor config JSON')
    monitor.set_defaults(handler=cmd_monitor)

    counter = sub.add_parser('counterexample', help='Generate a non-monotone example')
    mode = counter.add_mutually_exclusive_group(required=True)
    mode.add_argument('--discrete', action='store_true')
    mode.add_argument('--continuous', action='store_true')
    counter.add_argument('--n', type=int)
    counter.add_argument('--m', type=int)
    counter.add_argument('--T', type=float)
    counter.add_argument('--S', type=float)
    counter.add_argument('--p', type=float, default=settings.p)
    counter.add_argument('--out', help='Write the generated series / step function CSV here')
    counter.set_defaults(handler=cmd_counterexample)

    check = sub.add_parser('verify', help='Run a verification campaign')
    check.add_argument('--check', required=True, choices=verify.campaign_names() + ['all'])
    check.add_argument('--trials', type=int, default=settings.trials)
    check.add_argument('--seed', type=int, default=settings.seed)
    check.add_argument('--workers', type=int, default=settings.workers)
    check.add_argument('--out', help='Write the JSON lines report here')
    check.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = get_settings()
    except MeanScaleError as e:
        configure_logging()
        logger.error(f"Error in configuration: {str(e)}")
        return EXIT_INPUT_ERROR

    args = build_parser(settings).parse_args(argv)
    configure_logging('DEBUG' if args.verbose else settings.log_level)
    try:
        return args.handler(args)
    except MeanScaleError as e:
        logger.error(f"Error in {args.command}: {str(e)}")
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error(f"Error in {args.command}: {str(e)}")
        return EXIT_INPUT_ERROR


if __name__ == '__main__':
    sys.exit(main())
