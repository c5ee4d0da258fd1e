import json
import math
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from interval_maps.exceptions import (
    BoundaryError, ConvergenceError, DomainError, DynZetaError, PoleError, PrecisionError, UnsupportedOrderError,
)
from spectral.services import SpectralService

from .config import ConfigError, config_hash, load_config, parse_complex, parse_config
from .models import ExperimentRun
from .output_utils import Table, format_value, write_outputs
from .runners import ExperimentRunner, RunOutcome, exit_code_for
from .tasks import run_experiment_async

FAREY = {'map': {'family': 'farey'}}
GAUSS_KUZMIN_WIRSING = 0.3036630029


def _config(**extra):
    data = dict(FAREY)
    data.update(extra)
    return parse_config(data)


class ConfigTestCase(SimpleTestCase):

    def test_minimal_config(self):
        config = _config()
        self.assertEqual(config.map_spec.family, 'farey')
        self.assertEqual(config.potential.kind, 'mql')
        self.assertEqual(config.potential.q, 1.0)
        self.assertEqual(config.output_format, 'csv')
        self.assertEqual(config.block('trace'), {})

    def test_unknown_keys_are_rejected(self):
        with self.assertRaises(ConfigError):
            parse_config({'map': {'family': 'farey'}, 'plot': {}})
        with self.assertRaises(ConfigError):
            _config(trace={'z': 0.5, 'mmax': 3})
        with self.assertRaises(ConfigError):
            _config(**{'continue': {'contour': {'c': 0.5}}})
        with self.assertRaises(ConfigError):
            parse_config({'map': {'family': 'farey', 'beta': 2}})

    def test_invalid_sections(self):
        with self.assertRaises(ConfigError):
            parse_config({'potential': {'kind': 'mql'}})
        with self.assertRaises(ConfigError):
            _config(output={'format': 'xlsx'})
        with self.assertRaises(ConfigError):
            parse_config({'map': {'family': 'tent'}})
        with self.assertRaises(ConfigError):
            _config(potential={'kind': 'const'})
        with self.assertRaises(ConfigError):
            _config(trace=[0.5])

    def test_parse_complex(self):
        self.assertEqual(parse_complex(0.5), 0.5 + 0j)
        self.assertEqual(parse_complex([1, -2]), 1 - 2j)
        self.assertEqual(parse_complex('0.5+0.3i'), 0.5 + 0.3j)
        self.assertEqual(parse_complex('-4'), -4 + 0j)
        for bad in (True, 'abc', [1, 2, 3], None):
            with self.assertRaises(ConfigError):
                parse_complex(bad)

    def test_hash_ignores_key_order(self):
        first = {'map': {'family': 'farey', 'alpha': 1}, 'trace': {'z': 0.5}}
        second = {'trace': {'z': 0.5}, 'map': {'alpha': 1, 'family': 'farey'}}
        self.assertEqual(config_hash(first), config_hash(second))
        self.assertEqual(len(config_hash(first)), 16)
        self.assertNotEqual(config_hash(first), config_hash(FAREY))

    def test_load_config_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'broken.json'
            path.write_text('{"map": ')
            with self.assertRaises(ConfigError):
                load_config(path)
            with self.assertRaises(ConfigError):
                load_config(Path(tmp) / 'missing.json')
            path.write_text(json.dumps(FAREY))
            self.assertEqual(load_config(path).hash, config_hash(FAREY))

    def test_test_functions(self):
        config = _config()
        self.assertAlmostEqual(config.test_function('x(1-x)')(0.5), 0.25)
        with self.assertRaises(ConfigError):
            config.test_function('sinh')


class OutputTestCase(SimpleTestCase):

    def test_float_formatting(self):
        self.assertEqual(format_value(0.1), '0.10000000000000001')
        self.assertEqual(format_value(1.0), '1')
        self.assertEqual(format_value(3), '3')
        self.assertEqual(format_value(True), 'true')
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(math.nan), 'nan')
        self.assertEqual(format_value(-math.inf), '-inf')

    def test_csv_files_are_reproducible(self):
        table = Table('values', ['x', 'y'])
        table.add(0.1, 1 / 3)
        table.add(2, None)
        with tempfile.TemporaryDirectory() as tmp:
            config = _config(output={'format': 'csv', 'path': str(Path(tmp) / 'run')})
            paths = write_outputs(config, 'trace', [table], 'summary')
            first = Path(paths[0]).read_bytes()
            write_outputs(config, 'trace', [table], 'summary')
            self.assertEqual(Path(paths[0]).read_bytes(), first)
        self.assertEqual(first.decode(), 'x,y\n0.10000000000000001,0.33333333333333331\n2,\n')

    def test_json_envelope(self):
        tables = [Table('a', ['v']), Table('b', ['w'])]
        tables[0].add(1.5)
        with tempfile.TemporaryDirectory() as tmp:
            config = _config(output={'format': 'both'})
            with override_settings(DYNZETA_OUTPUT_DIR=tmp):
                paths = write_outputs(config, 'det', tables, 'two tables', payload={'z': 0.5 + 1j})
            self.assertEqual([Path(p).name for p in paths], [
                f'det-{config.hash}-a.csv', f'det-{config.hash}-b.csv', f'det-{config.hash}.json',
            ])
            document = json.loads(Path(paths[-1]).read_text())
        self.assertEqual(document['config_hash'], config.hash)
        self.assertEqual(document['tables']['a']['rows'], [[1.5]])
        self.assertEqual(document['results']['z'], {'re': 0.5, 'im': 1.0})
        self.assertIn('numpy', document['versions'])


class ExitCodeTestCase(SimpleTestCase):

    def test_exit_codes(self):
        self.assertEqual(exit_code_for(ConfigError('bad')), 2)
        self.assertEqual(exit_code_for(PrecisionError('tail')), 3)
        self.assertEqual(exit_code_for(ConvergenceError('budget')), 3)
        for exc in (DomainError('z'), BoundaryError('marker'), PoleError('pole'), UnsupportedOrderError('v0')):
            self.assertEqual(exit_code_for(exc), 4)
        self.assertEqual(exit_code_for(DynZetaError('other')), 1)

    def test_outcome_exit_codes(self):
        self.assertEqual(RunOutcome('trace', 'ok').exit_code, 0)
        self.assertEqual(RunOutcome('trace', 'tail', precision_failures=['m=5']).exit_code, 3)
        self.assertEqual(RunOutcome('check', 'both', passed=False, precision_failures=['m=5']).exit_code, 1)


class RunnerTestCase(SimpleTestCase):

    def test_map_info(self):
        outcome = ExperimentRunner(_config()).run('map-info')
        markers = [row[1] for row in outcome.tables[0].rows]
        for level, expected in enumerate((1.0, 0.5, 1 / 3, 0.25)):
            self.assertAlmostEqual(markers[level], expected, delta=1e-13)
        self.assertIn('a=0.5', outcome.summary)
        self.assertIn('alpha=1', outcome.summary)

    def test_unknown_subcommand(self):
        with self.assertRaises(ConfigError):
            ExperimentRunner(_config()).run('plot')

    def test_trace(self):
        outcome = ExperimentRunner(_config(trace={'z': 0.5, 'm_max': 2})).run('trace')
        rows = outcome.tables[0].rows
        self.assertEqual([row[0] for row in rows], [1, 2])
        self.assertEqual([row[5] for row in rows], [False, False])
        self.assertLess(rows[0][3], 1e-6 * abs(rows[0][1]))
        self.assertEqual(outcome.exit_code, 0)

    def test_gauss_det_zeros(self):
        outcome = ExperimentRunner(_config(det={'z': 1.0, 'M': 6})).run('det')
        coeffs, zeros = outcome.tables
        self.assertEqual(len(coeffs.rows), 7)
        found = [complex(row[0], row[1]) for row in zeros.rows if row[4]]
        self.assertLess(min(abs(u - 1.0) for u in found), 1e-6)
        self.assertLess(min(abs(u + 1 / GAUSS_KUZMIN_WIRSING) for u in found), 1e-2)
        self.assertEqual(outcome.exit_code, 0)

    def test_det_with_imprecise_traces_exits_with_precision_code(self):
        outcome = ExperimentRunner(_config(det={'z': 1.0, 'M': 6, 'cutoff': 24})).run('det')
        self.assertIn('m=6', outcome.precision_failures)
        self.assertFalse(any(row[4] for row in outcome.tables[1].rows))
        self.assertEqual(outcome.exit_code, 3)
        self.assertIn('precision', outcome.summary)

    def test_zeta(self):
        config = _config(potential={'kind': 'const', 'v0': -1.0}, zeta={'z_list': [0.3], 'm_max': 6})
        outcome = ExperimentRunner(config).run('zeta')
        row = outcome.tables[0].rows[0]
        r = 0.3 / math.e
        self.assertAlmostEqual(row[2], 1 / (1 - 2 * r), delta=1e-6)
        self.assertLess(row[4], 1e-6)
        self.assertEqual(outcome.exit_code, 0)

    def test_gauss_spectrum(self):
        config = _config(spectrum={'z': 1.0, 'n_nodes': 30, 'top': 3})
        outcome = ExperimentRunner(config).run('spectrum')
        moduli = [row[3] for row in outcome.tables[0].rows]
        self.assertAlmostEqual(moduli[0], 1.0, delta=1e-8)
        self.assertAlmostEqual(moduli[1], GAUSS_KUZMIN_WIRSING, delta=1e-6)
        self.assertIn('euler-maclaurin', outcome.summary)

    def test_eigenfun_of_parabolic_branch(self):
        outcome = ExperimentRunner(_config(eigenfun={'lambda': 0.5, 'grid_points': 101})).run('eigenfun')
        rows = outcome.tables[0].rows
        self.assertEqual(len(rows), 101)
        self.assertLessEqual(max(row[3] for row in rows), 1e-6)
        self.assertTrue(any(abs(row[1]) > 0 for row in rows))

    def test_eigenfun_of_gauss_operator(self):
        outcome = ExperimentRunner(_config(eigenfun={'z': 1.0, 'n_nodes': 30, 'grid_points': 11})).run('eigenfun')
        rows = outcome.tables[0].rows
        self.assertAlmostEqual(rows[0][1], 1.0, delta=1e-7)
        self.assertAlmostEqual(rows[-1][1], 0.5, delta=1e-7)

    def test_continue(self):
        config = _config(potential={'kind': 'const', 'v0': -1.0}, **{'continue': {'z_path': [-4]}})
        outcome = ExperimentRunner(config).run('continue')
        row = outcome.tables[0].rows[0]
        self.assertEqual((row[0], row[1]), (-4.0, 0.0))
        self.assertAlmostEqual(row[2], -0.595393, delta=1e-6)

    def test_continue_in_excluded_sector(self):
        config = _config(potential={'kind': 'const', 'v0': -1.0}, **{'continue': {'z_path': [4]}})
        with self.assertRaises(DomainError) as ctx:
            ExperimentRunner(config).run('continue')
        self.assertEqual(exit_code_for(ctx.exception), 4)

    def test_lambda(self):
        config = _config(potential={'kind': 'const', 'v0': -1.0}, **{'lambda': {'z': 0.5, 'm_max': 3}})
        outcome = ExperimentRunner(config).run('lambda')
        r = 0.5 / math.e
        values = [row[1] for row in outcome.tables[0].rows]
        for m, value in enumerate(values, start=1):
            self.assertLess(abs(value - (r / (1 - r)) ** m) / value, 1e-6)
        self.assertAlmostEqual(outcome.payload['estimate'], r / (1 - r), delta=1e-6)
        self.assertIn('submultiplicative yes', outcome.summary)
        self.assertEqual(outcome.exit_code, 0)

    def test_zeta_compare(self):
        config = _config(potential={'kind': 'const', 'v0': -1.0}, zeta={'z_list': [0.3], 'n_max': 10})
        outcome = ExperimentRunner(config).run('zeta-compare')
        self.assertLess(outcome.payload['max_relative_difference'], 1e-4)
        row = outcome.tables[0].rows[0]
        r = 0.3 / math.e
        self.assertAlmostEqual(row[2], 1 / (1 - 2 * r), delta=1e-4)

    def test_pressure(self):
        config = _config(potential={'kind': 'const', 'v0': 0.0}, pressure={'which': 'T', 'n_max': 8})
        outcome = ExperimentRunner(config).run('pressure')
        self.assertEqual(len(outcome.tables[0].rows), 8)
        self.assertIsNone(outcome.tables[0].rows[0][2])
        self.assertLess(abs(outcome.tables[0].rows[-1][1] - math.log(2)), 0.1)

    def test_zeta_relation_check(self):
        config = _config(check={'suite': 'zeta-relation'})
        outcome = ExperimentRunner(config).run('check')
        self.assertTrue(outcome.passed)
        self.assertEqual(outcome.exit_code, 0)
        self.assertEqual({row[-1] for row in outcome.tables[0].rows}, {'pass'})

    def test_continuation_check_skips_nonnegative_v0(self):
        outcome = ExperimentRunner(_config(check={'suite': 'continuation-overlap'})).run('check')
        self.assertTrue(outcome.passed)
        self.assertEqual(outcome.tables[0].rows[0][-1], 'skip')

    def test_failed_check_sets_exit_code(self):
        runner = ExperimentRunner(_config(check={'suite': 'inducing-identity'}))
        with mock.patch.object(SpectralService, 'inducing_identity_residual', return_value=1e-3):
            outcome = runner.run('check')
        self.assertFalse(outcome.passed)
        self.assertEqual(outcome.exit_code, 1)

    def test_unknown_check_suite(self):
        with self.assertRaises(ConfigError):
            ExperimentRunner(_config(check={'suite': 'everything'})).run('check')


class DynzetaCommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.config_path = Path(self.tmp.name) / 'farey.json'
        self.config_path.write_text(json.dumps(FAREY))

    def _call(self, *args, **kwargs):
        out = StringIO()
        with override_settings(DYNZETA_OUTPUT_DIR=self.tmp.name):
            call_command('dynzeta', *args, config=str(self.config_path), stdout=out, stderr=StringIO(), **kwargs)
        return out.getvalue()

    def test_map_info_run_is_recorded(self):
        output = self._call('map-info')
        self.assertIn('✅', output)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'done')
        self.assertEqual(run.exit_code, 0)
        self.assertEqual(run.config_hash, config_hash(FAREY))
        self.assertTrue(Path(run.output_paths[0]).exists())

    def test_no_record(self):
        self._call('map-info', no_record=True)
        self.assertFalse(ExperimentRun.objects.exists())

    def test_config_error_exit_code(self):
        self.config_path.write_text(json.dumps({'map': {'family': 'farey'}, 'unknown': 1}))
        with self.assertRaises(CommandError) as ctx:
            self._call('trace')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_continue_in_excluded_sector_exits_with_domain_code(self):
        data = {'map': {'family': 'farey'}, 'potential': {'kind': 'const', 'v0': -1.0}, 'continue': {'z_path': [4]}}
        self.config_path.write_text(json.dumps(data))
        with self.assertRaises(CommandError) as ctx:
            self._call('continue')
        self.assertEqual(ctx.exception.returncode, 4)
        run = ExperimentRun.objects.get()
        self.assertEqual((run.status, run.exit_code), ('failed', 4))

    @mock.patch('experiments.management.commands.dynzeta.run_safely', return_value=(None, 4, 'z=4 is excluded'))
    def test_domain_error_exit_code(self, run_safely):
        with self.assertRaises(CommandError) as ctx:
            self._call('continue')
        self.assertEqual(ctx.exception.returncode, 4)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.error_message, 'z=4 is excluded')

    @mock.patch('experiments.tasks.run_experiment_async')
    def test_async_run_is_queued(self, task):
        task.delay.return_value.id = 'task-1'
        output = self._call('spectrum', run_async=True)
        self.assertIn('Queued', output)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.celery_task_id, 'task-1')
        self.assertEqual(run.status, 'pending')
        task.delay.assert_called_once_with(run.id)


class ExperimentTaskTestCase(TestCase):

    def test_task_runs_stored_experiment(self):
        run = ExperimentRun.objects.create(subcommand='map-info', config=FAREY, config_hash=config_hash(FAREY))
        with tempfile.TemporaryDirectory() as tmp, override_settings(DYNZETA_OUTPUT_DIR=tmp):
            result = run_experiment_async(run.id)
        run.refresh_from_db()
        self.assertEqual(result['status'], 'success')
        self.assertEqual(run.status, 'done')
        self.assertIsNotNone(run.completed_at)

    def test_task_records_config_errors(self):
        data = {'map': {'family': 'tent'}}
        run = ExperimentRun.objects.create(subcommand='trace', config=data, config_hash=config_hash(data))
        result = run_experiment_async(run.id)
        run.refresh_from_db()
        self.assertEqual(result['status'], 'error')
        self.assertEqual(run.status, 'failed')
        self.assertEqual(run.exit_code, 2)

    def test_missing_run(self):
        self.assertEqual(run_experiment_async(999)['status'], 'error')
