import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest import mock

import pandas as pd

from src import verify
from src.cli import EXIT_INPUT_ERROR, EXIT_OK, EXIT_VIOLATION, main
from src.discrete import impulse_train
from src.ingest import read_step_function_csv, write_series_csv
from src.models import BoundCheck


def _trial_never_holds(rng, bounds):
    x = verify.random_series(rng, bounds)
    return verify.TrialOutcome({'length': len(x)}, [BoundCheck.compare('never_holds', 2.0, 1.0)], {})


class TestCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.train_file = self.path('train.csv')
        write_series_csv(impulse_train(3, 12), self.train_file)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue()

    def write_config(self, limit):
        path = self.path('limits.json')
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump({'p': 1, 'limits': [{'window': 4, 'limit': limit, 'label': 'four'}]}, handle)
        return path

    def test_discrete_counterexample(self):
        code, out = self.run_cli('counterexample', '--discrete', '--n', '3', '--m', '4')
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertAlmostEqual(payload['norm_pow_p_at_n'], 1 / 3)
        self.assertAlmostEqual(payload['norm_pow_p_at_m'], 1 / 2)
        self.assertEqual(payload['message'], 'larger window, larger max mean')
        self.assertTrue(payload['verified'])
        self.assertEqual(payload['series'], [1, 0, 0, 1, 0, 0, 1, 0, 0, 1])

    def test_counterexample_reanalyzed_flags_predicted_window(self):
        series = self.path('generated.csv')
        code, _ = self.run_cli('counterexample', '--discrete', '--n', '3', '--m', '4', '--out', series)
        self.assertEqual(code, EXIT_OK)
        code, out = self.run_cli('analyze', '--input', series, '--column', 'value', '--windows', '3,4')
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report['flagged_windows'], [4])
        self.assertAlmostEqual(report['rows'][1]['value'], 0.5)

    def test_counterexample_rejects_multiple(self):
        code, _ = self.run_cli('counterexample', '--discrete', '--n', '3', '--m', '6')
        self.assertEqual(code, EXIT_INPUT_ERROR)
        code, _ = self.run_cli('counterexample', '--discrete', '--n', '3')
        self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_continuous_counterexample(self):
        out_file = self.path('bumps.csv')
        code, out = self.run_cli('counterexample', '--continuous', '--T', '1', '--S', '2.5', '--out', out_file)
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(out)
        self.assertEqual(payload['d'], 2)
        self.assertAlmostEqual(payload['norm_pow_p_at_T'], 1.0)
        self.assertAlmostEqual(payload['norm_pow_p_at_S'], 1.2)
        self.assertEqual(read_step_function_csv(out_file).n_pieces, 5)
        self.assertTrue(payload['step_function_csv'].startswith('breakpoint,value\n'))

    def test_analyze_constant_series(self):
        path = self.path('constant.csv')
        pd.DataFrame({'t': range(10), 'dose': [2.0] * 10}).to_csv(path, index=False)
        code, out = self.run_cli('analyze', '--input', path, '--column', 'dose', '--windows', '2,3,4')
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report['flagged_windows'], [])
        self.assertEqual([row['window_samples'] for row in report['rows']], [2, 3, 4])

    def test_analyze_csv_durations_and_plot_data(self):
        plot = self.path('plot.csv')
        report_file = self.path('report.csv')
        code, _ = self.run_cli('analyze', '--input', self.train_file, '--column', 'value',
                               '--windows', '3', '--durations', '4,6', '--format', 'csv',
                               '--plot-data', plot, '--out', report_file)
        self.assertEqual(code, EXIT_OK)
        report = pd.read_csv(report_file)
        self.assertEqual(list(report['window_samples']), [3, 4, 6])
        self.assertEqual(list(report['violates_naive_monotonicity']), [False, True, False])
        points = pd.read_csv(plot)
        self.assertEqual(list(points.columns), ['window_size', 'value'])
        self.assertAlmostEqual(points['value'].iloc[1], 0.5)

    def test_analyze_rates(self):
        path = self.path('distance.csv')
        pd.DataFrame({'t': [0, 1, 2, 3, 4], 'km': [0, 1, 3, 4, 5]}).to_csv(path, index=False)
        code, out = self.run_cli('analyze', '--input', path, '--column', 'km', '--rates', '--windows', '2')
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(json.loads(out)['rows'][0]['value'], 1.5)

    def test_monitor_exit_codes(self):
        code, out = self.run_cli('monitor', '--input', self.train_file, '--column', 'value',
                                 '--config', self.write_config(0.4))
        self.assertEqual(code, EXIT_VIOLATION)
        result = json.loads(out)['results'][0]
        self.assertAlmostEqual(result['value'], 0.5)
        self.assertEqual(result['arg_start'], 0)

        code, _ = self.run_cli('monitor', '--input', self.train_file, '--column', 'value',
                               '--config', self.write_config(0.6))
        self.assertEqual(code, EXIT_OK)

    def test_parse_error_exit_code(self):
        broken = self.path('broken.csv')
        with open(broken, 'w', encoding='utf-8') as handle:
            handle.write('t,value\n0,1\n1,oops\n')
        code, _ = self.run_cli('analyze', '--input', broken, '--column', 'value', '--windows', '1')
        self.assertEqual(code, EXIT_INPUT_ERROR)
        code, _ = self.run_cli('analyze', '--input', self.path('missing.csv'), '--column', 'value',
                               '--windows', '1')
        self.assertEqual(code, EXIT_INPUT_ERROR)
        code, _ = self.run_cli('analyze', '--input', self.train_file, '--column', 'value', '--windows', '50')
        self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_usage_errors_exit_two(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(['analyze', '--input', self.train_file, '--column', 'value', '--windows', 'x,y'])
        self.assertEqual(ctx.exception.code, 2)
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(['verify', '--check', 'no_such_check'])
        self.assertEqual(ctx.exception.code, 2)

    def test_verify(self):
        out_file = self.path('campaign.jsonl')
        code, _ = self.run_cli('verify', '--check', 'divisor_ordering', '--trials', '50', '--seed', '1',
                               '--out', out_file)
        self.assertEqual(code, EXIT_OK)
        with open(out_file, encoding='utf-8') as handle:
            records = [json.loads(line) for line in handle]
        self.assertEqual(records[-1]['type'], 'summary')
        self.assertEqual(records[-1]['failures'], 0)
        self.assertEqual(records[-1]['trials'], 50)

    def test_verify_all(self):
        code, out = self.run_cli('verify', '--check', 'all', '--trials', '5', '--seed', '3')
        self.assertEqual(code, EXIT_OK)
        summaries = [json.loads(line) for line in out.splitlines() if '"summary"' in line]
        self.assertEqual(len(summaries), len({s['check'] for s in summaries}))
        self.assertGreater(len(summaries), 10)

    def test_verify_failure_exit_code(self):
        with mock.patch.dict(verify.CAMPAIGN_CHECKS):
            verify.register('never_holds')(_trial_never_holds)
            code, out = self.run_cli('verify', '--check', 'never_holds', '--trials', '3', '--seed', '1',
                                     '--workers', '1')
        self.assertEqual(code, EXIT_VIOLATION)
        records = [json.loads(line) for line in out.splitlines()]
        failures = [r for r in records if r['type'] == 'failure']
        self.assertEqual([r['trial'] for r in failures], [0, 1, 2])
        self.assertEqual(failures[0]['check']['name'], 'never_holds')
        self.assertEqual(records[-1]['type'], 'summary')
        self.assertEqual(records[-1]['failures'], 3)
        self.assertNotIn('never_holds', verify.CAMPAIGN_CHECKS)


if __name__ == '__main__':
    unittest.main()
