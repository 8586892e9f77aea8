import io
import json
import os
import tempfile
import unittest
import warnings
from contextlib import redirect_stdout
from unittest import mock

import numpy as np

from ssprisk.cli import REFINEMENT_TOL, main
from ssprisk.config import ConfigError, load_config, parse_config
from ssprisk.output import (config_hash, format_float, read_records,
                            RecordWriter)
from ssprisk.print_backend import (RICH_AVAILABLE, print_backend,
                                    set_print_backend)
from ssprisk.problems import from_config
from ssprisk.risk import RiskRecord
from ssprisk.shifted import grid_refinement_gap, moment_check_draws

ZERO_GAME = {'type': 'matrix_game', 'matrices': [[[0., 0.], [0., 0.]]]}
SINGLE_ATOM = {'type': 'matrix_game',
               'matrices': [[[0.3, -0.2], [0.1, 0.4]]]}
D2_GAME = {'type': 'matrix_game', 'dim': 2, 'num_atoms': 3, 'seed': 0}


def _write(directory, name, data):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        if isinstance(data, str):
            f.write(data)
        else:
            json.dump(data, f, indent=2)
    return path


def _read(path):
    with open(path, 'r') as f:
        return f.read()


class TestConfig(unittest.TestCase):
    '''
    Config files and their error messages
    '''
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_unknown_field(self):
        text = '{\n  "instance": {"type": "matrix_game", "dim": 2},\n' \
            '  "colour": 1\n}\n'
        path = _write(self.tmp.name, 'bad.json', text)
        with self.assertRaises(ConfigError) as cm:
            load_config(path, 'solve')
        self.assertEqual(cm.exception.line, 3)
        self.assertIn('colour', str(cm.exception))
        self.assertIn(f"{path}:3", str(cm.exception))

    def test_seed_line(self):
        text = '{\n  "instance": {"type": "matrix_game", "dim": 2},\n' \
            '  "n_grid": [4, 8],\n  "replications": 2,\n' \
            '  "delta": 0.5,\n  "master_seed": -1\n}\n'
        path = _write(self.tmp.name, 'seed.json', text)
        with self.assertRaises(ConfigError) as cm:
            load_config(path, 'experiment')
        self.assertEqual(cm.exception.line, 6)
        self.assertIn('master_seed', str(cm.exception))

    def test_malformed(self):
        path = _write(self.tmp.name, 'broken.json',
                      '{\n  "instance": {\n    "type": \n')
        with self.assertRaises(ConfigError) as cm:
            load_config(path, 'solve')
        self.assertIsNotNone(cm.exception.line)
        self.assertGreaterEqual(cm.exception.line, 3)

    def test_missing_and_invalid(self):
        with self.assertRaises(ConfigError):
            parse_config({'n_grid': [4, 8], 'replications': 2}, 'experiment')
        with self.assertRaises(ConfigError):
            parse_config({'instance': D2_GAME, 'problem': 'empirical'},
                         'solve')
        with self.assertRaises(ConfigError):
            parse_config({'instance': D2_GAME, 'solver': 3}, 'solve')
        with self.assertRaises(ConfigError):
            parse_config({'instance': D2_GAME, 'draws': 10}, 'shifted')
        with self.assertRaises(ValueError):
            parse_config({'instance': D2_GAME}, 'train')

    def test_oracle_tolerance(self):
        config = parse_config({'instance': D2_GAME, 'n_grid': [4, 8],
                               'replications': 2, 'delta': 0.5,
                               'oracle': {'max_iters': 500}}, 'experiment')
        self.assertEqual(config.oracle.max_iters, 500)
        self.assertEqual(config.oracle.inner_tolerance, 1e-9)

    def test_threads_environment(self):
        data = {'instance': D2_GAME, 'n_grid': [4, 8], 'replications': 2,
                'delta': 0.5}
        with mock.patch.dict(os.environ, {'SSP_THREADS': '3'}):
            self.assertEqual(parse_config(data, 'experiment').threads, 3)
        with mock.patch.dict(os.environ, {'SSP_THREADS': 'many'}):
            with self.assertRaises(ConfigError):
                parse_config(data, 'experiment')


class TestOutput(unittest.TestCase):
    def test_format_float(self):
        self.assertEqual(format_float(1.), '1')
        self.assertEqual(format_float(0.1), '0.10000000000000001')
        self.assertEqual(float(format_float(1. / 3)), 1. / 3)

    def test_config_hash(self):
        a = {'instance': D2_GAME, 'seed': 1}
        b = {'seed': 1, 'instance': dict(reversed(list(D2_GAME.items())))}
        self.assertEqual(config_hash(a), config_hash(b))
        self.assertNotEqual(config_hash(a), config_hash({'seed': 2}))
        self.assertEqual(len(config_hash(a)), 64)

    def test_partial_records(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'records.csv')
            writer = RecordWriter(path)
            writer.write(RiskRecord(4, 0, 7, 0.25, 1e-11, 1e-12))
            writer.close(success=False)
            self.assertFalse(os.path.exists(path))
            self.assertTrue(os.path.exists(path + '.partial'))

            with RecordWriter(path) as writer:
                writer.write(RiskRecord(4, 0, 7, 0.25, 1e-11, 1e-12))
            rows = read_records(path)
            self.assertEqual(rows[0]['risk'], 0.25)
            self.assertEqual(rows[0]['seed'], 7.)


class TestPrintBackend(unittest.TestCase):
    '''
    Switching between the rich and plain report printers
    '''
    def tearDown(self):
        set_print_backend('rich' if RICH_AVAILABLE else 'base')

    def test_base(self):
        set_print_backend('base')
        checks = {'localization': {'worst_slack': 0.25, 'passed': True},
                  'exp_moment': {'worst_slack': -1., 'passed': False}}
        stream = io.StringIO()
        with redirect_stdout(stream):
            print_backend.checks_report(checks)
        lines = stream.getvalue().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[0].endswith('ok'))
        self.assertTrue(lines[1].endswith('FAIL'))

    def test_unknown(self):
        with self.assertRaises(ValueError):
            set_print_backend('curses')


class TestCommands(unittest.TestCase):
    '''
    Subcommands, result files and exit codes
    '''
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def _run(self, command, config, out='out', name='config.json'):
        path = _write(self.dir, name, config)
        out_dir = os.path.join(self.dir, out)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            code = main(['--quiet', command, '--config', path, '--out',
                         out_dir])
        return code, out_dir

    def test_solve(self):
        (code, out) = self._run('solve', {'instance': ZERO_GAME})
        self.assertEqual(code, 0)
        solution = json.loads(_read(os.path.join(out, 'solution.json')))
        np.testing.assert_allclose(solution['x'], [0.5, 0.5], atol=1e-6)
        np.testing.assert_allclose(solution['y'], [0.5, 0.5], atol=1e-6)
        self.assertTrue(solution['converged'])
        manifest = json.loads(_read(os.path.join(out, 'manifest.json')))
        self.assertEqual(manifest['command'], 'solve')
        self.assertEqual(manifest['exit_code'], 0)

        (_, again) = self._run('solve', {'instance': ZERO_GAME}, out='again')
        self.assertEqual(_read(os.path.join(out, 'solution.json')),
                         _read(os.path.join(again, 'solution.json')))

    def test_solve_empirical(self):
        config = {'instance': D2_GAME, 'problem': 'empirical', 'n': 32,
                  'seed': 4, 'solver': {'gap_tolerance': 1e-8}}
        (code, out) = self._run('solve', config)
        self.assertEqual(code, 0)
        solution = json.loads(_read(os.path.join(out, 'solution.json')))
        self.assertLessEqual(solution['final_gap'], 1e-8)

    def test_config_errors(self):
        experiment = {'instance': D2_GAME, 'n_grid': [4], 'replications': 1,
                      'delta': 0.5}
        (code, _) = self._run('solve', experiment)
        self.assertEqual(code, 1)
        (code, _) = self._run('solve', '{"instance": \n', name='bad.json')
        self.assertEqual(code, 1)
        (code, _) = self._run('solve', {'instance': {'type': 'lasso'}})
        self.assertEqual(code, 1)
        (code, _) = self._run('shifted', {'instance': D2_GAME, 'draws': 10})
        self.assertEqual(code, 1)

    def test_experiment(self):
        config = {'instance': SINGLE_ATOM, 'n_grid': [4], 'replications': 1,
                  'delta': 0.5, 'master_seed': 3, 'threads': 1}
        (code, out) = self._run('experiment', config)
        self.assertEqual(code, 0)
        text = _read(os.path.join(out, 'records.csv'))
        self.assertEqual(text.splitlines()[0],
                         'n,rep,seed,risk,emp_gap,oracle_gap,wall_ms')
        rows = read_records(os.path.join(out, 'records.csv'))
        self.assertEqual(len(rows), 1)
        self.assertLessEqual(rows[0]['risk'], 2e-8)
        self.assertGreaterEqual(rows[0]['risk'], -1e-8)
        self.assertFalse(os.path.exists(
            os.path.join(out, 'records.csv.partial')))
        fit = json.loads(_read(os.path.join(out, 'rate_fit.json')))
        self.assertIsNone(fit['slope'])

    def test_negative_seeds(self):
        configs = [
            ('solve', {'instance': D2_GAME, 'problem': 'empirical', 'n': 8,
                       'seed': -1}),
            ('verify', {'instance': D2_GAME, 'seed': -2}),
            ('experiment', {'instance': D2_GAME, 'n_grid': [4, 8],
                            'replications': 2, 'delta': 0.5,
                            'master_seed': -1, 'threads': 1}),
            ('shifted', {'instance': D2_GAME, 'seed': -3}),
        ]
        for (command, config) in configs:
            (code, out) = self._run(command, config, out=command)
            self.assertEqual(code, 1, command)
            self.assertFalse(os.path.exists(
                os.path.join(out, 'records.csv.partial')))
        (code, _) = self._run('experiment', dict(configs[2][1],
                                                 master_seed=2.5))
        self.assertEqual(code, 1)

    def test_shifted_refinement_draw(self):
        data = {'instance': D2_GAME, 'n': 16, 'draws': 100, 'seed': 5,
                'chain_n': 8, 'chain_replications': 2, 'n_probe': 20,
                'threads': 1}
        (code, out) = self._run('shifted', data)
        self.assertIn(code, [0, 3])
        report = json.loads(_read(os.path.join(out, 'shifted.json')))

        config = parse_config(data, 'shifted')
        instance = from_config(D2_GAME)
        (samp, signs) = moment_check_draws(config, instance)
        gap = grid_refinement_gap(instance, samp, signs[0], config.resolution,
                                  refine=config.refine,
                                  oracle_config=config.oracle)
        self.assertAlmostEqual(
            report['checks']['grid_refinement']['worst_slack'],
            REFINEMENT_TOL - gap, places=12)

    def test_experiment_threads(self):
        config = {'instance': D2_GAME, 'n_grid': [4, 8], 'replications': 2,
                  'delta': 0.5, 'master_seed': 5}
        with mock.patch.dict(os.environ, {'SSP_THREADS': '1'}):
            (_, serial) = self._run('experiment', config, out='serial')
        with mock.patch.dict(os.environ, {'SSP_THREADS': '2'}):
            (_, parallel) = self._run('experiment', config, out='parallel')
        self.assertEqual(_read(os.path.join(serial, 'records.csv')),
                         _read(os.path.join(parallel, 'records.csv')))

    def test_verify_failure(self):
        instance = dict(D2_GAME, lambda_x=0.5, lambda_y=0.5)
        config = {'instance': instance, 'n_probe': 50,
                  'gradient_points': 20}
        (code, out) = self._run('verify', config)
        self.assertEqual(code, 3)
        report = json.loads(_read(os.path.join(out, 'verify.json')))
        self.assertIn('assumption4', report['failures'])

    def test_shifted_constant(self):
        instance = dict(D2_GAME, lambda_x=0.5, lambda_y=0.5)
        (code, out) = self._run('shifted', {'instance': instance})
        self.assertEqual(code, 3)
        report = json.loads(_read(os.path.join(out, 'shifted.json')))
        self.assertEqual(report['failures'], ['localization_constant'])


if __name__ == '__main__':
    unittest.main()
