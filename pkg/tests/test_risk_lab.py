import unittest
import warnings
from unittest import mock

import numpy as np

from ssprisk.problems import MatrixGame
from ssprisk.solver import SolverConfig, SaddlePair, solve_saddle
from ssprisk.risk import (ExperimentConfig, RiskRecord, QuantileCurve,
                          strong_excess_risk, run_replication, risk_quantile,
                          quantile_curve, fit_rate, delta_ratio,
                          replication_tasks, run_experiment)
from ssprisk.utils import make_rng, derive_seed

SWAP = np.array([[1., -1.], [-1., 1.]])
SMALL_GAME = {'type': 'matrix_game', 'dim': 2, 'num_atoms': 3, 'seed': 0}


def _curve(ns, values, delta=0.05):
    rows = [{'n': n, 'q': q, 'mean': q, 'median': q}
            for (n, q) in zip(ns, values)]
    return QuantileCurve(rows, delta, 20)


class TestStrongExcessRisk(unittest.TestCase):
    '''
    Population duality gap of candidate solutions
    '''
    def test_at_saddle(self):
        game = MatrixGame.random(3, seed=2)
        report = solve_saddle(game.population(),
                              SolverConfig(gap_tolerance=1e-12))
        self.assertLessEqual(abs(strong_excess_risk(game, report.solution)),
                             1e-8)

    def test_nonnegative(self):
        game = MatrixGame.random(3, num_atoms=4, seed=3)
        rng = make_rng(0)
        for _ in range(50):
            pair = SaddlePair(*game.random_pair(rng))
            self.assertGreaterEqual(strong_excess_risk(game, pair), -1e-8)

    def test_grid_search(self):
        game = MatrixGame(SWAP, [1.])
        x = np.array([0.5, 0.5])
        y = np.array([0.7, 0.3])
        floor = game.x_geometry.floor
        t = np.arange(floor, 1 - floor + 1e-12, 1e-4)
        grid = np.stack([t, 1 - t], axis=1)
        ent = np.sum(grid * np.log(grid), axis=1)
        # max over y of F(x, y) and min over x of F(x, y) on the grid
        sup_y = np.max(grid.dot(SWAP.T.dot(x)) + 2 * np.sum(x * np.log(x))
                       - 2 * ent)
        inf_x = np.min(grid.dot(SWAP.dot(y)) + 2 * ent
                       - 2 * np.sum(y * np.log(y)))
        risk = strong_excess_risk(game, SaddlePair(x, y))
        self.assertAlmostEqual(risk, sup_y - inf_x, delta=5e-4)

    def test_infeasible(self):
        game = MatrixGame(SWAP, [1.])
        with self.assertRaises(ValueError):
            strong_excess_risk(game, SaddlePair([1., 0.], [0.5, 0.5]))


class TestReplication(unittest.TestCase):
    '''
    Sample, solve, measure
    '''
    def test_single_atom(self):
        game = MatrixGame(make_rng(1).uniform(-1, 1, (3, 3)), [1.])
        rec = run_replication(game, 50, seed=4)
        self.assertLessEqual(rec.risk, 2e-8)
        self.assertGreaterEqual(rec.risk, -1e-8)
        self.assertTrue(rec.converged)

    def test_raw_risk(self):
        game = MatrixGame.random(2, seed=1)
        with mock.patch('ssprisk.risk.risk_lab.strong_excess_risk',
                        return_value=(-5e-9, 1e-10)):
            rec = run_replication(game, 16, seed=2)
        self.assertEqual(rec.risk, -5e-9)
        self.assertEqual(rec.oracle_gap, 1e-10)

    def test_deterministic(self):
        game = MatrixGame.random(3, seed=1)
        r1 = run_replication(game, 64, seed=9, rep=2)
        r2 = run_replication(game, 64, seed=9, rep=2)
        self.assertEqual(r1, r2)
        self.assertEqual(r1.wall_ms, 0.)
        self.assertEqual((r1.n, r1.rep, r1.seed), (64, 2, 9))

    def test_paired_decrease(self):
        game = MatrixGame.random(3, num_atoms=3, seed=0)
        wins = 0
        for rep in range(50):
            small = run_replication(game, 32, derive_seed(7, 32, rep))
            large = run_replication(game, 512, derive_seed(7, 512, rep))
            self.assertGreater(large.risk, 0.)
            wins += large.risk < small.risk
        self.assertGreaterEqual(wins, 45)


class TestQuantiles(unittest.TestCase):
    def test_order_statistics(self):
        self.assertEqual(risk_quantile([0.3] * 25, 0.05), 0.3)
        self.assertEqual(risk_quantile(np.arange(1, 101), 0.05), 95.)
        self.assertEqual(risk_quantile([5., 1., 3., 2., 4.], 0.5), 3.)
        risks = make_rng(0).random(200)
        self.assertGreaterEqual(risk_quantile(risks, 0.01),
                                risk_quantile(risks, 0.1))

    def test_curve(self):
        records = [RiskRecord(n, rep, 0, n * 10 + rep, 0., 0.)
                   for n in [4, 8] for rep in range(3)]
        curve = quantile_curve(records, [4, 8], 3, 0.5)
        self.assertEqual([row['q'] for row in curve.rows], [41., 81.])
        self.assertEqual([row['median'] for row in curve.rows], [41., 81.])
        np.testing.assert_allclose(curve.means, [41., 81.])

    def test_holes(self):
        records = [RiskRecord(4, rep, 0, 1., 0., 0.) for rep in [0, 2]]
        with self.assertRaises(ValueError) as cm:
            quantile_curve(records, [4], 3, 0.5)
        self.assertIn('(4, 1)', str(cm.exception))

    def test_delta_ratio(self):
        records = [RiskRecord(16, rep, 0, rep + 1., 0., 0.)
                   for rep in range(100)]
        self.assertAlmostEqual(delta_ratio(records, 16), 99. / 80.)
        with self.assertRaises(ValueError):
            delta_ratio(records, 32)


class TestRateFit(unittest.TestCase):
    def test_power_laws(self):
        ns = [64, 128, 256, 512, 1024]
        fit = fit_rate(_curve(ns, [3. / n for n in ns]))
        self.assertAlmostEqual(fit.slope, -1.)
        self.assertAlmostEqual(fit.intercept, np.log(3.))
        self.assertAlmostEqual(fit.residual_rms, 0.)
        self.assertAlmostEqual(fit.r2, 1.)
        fit = fit_rate(_curve(ns, [1. / np.sqrt(n) for n in ns]))
        self.assertAlmostEqual(fit.slope, -0.5)
        self.assertEqual(len(fit.as_dict()['quantiles']), 5)

    def test_errors(self):
        with self.assertRaises(ValueError):
            fit_rate(_curve([4, 8, 16], [1., 0.5, 0.25]))
        with self.assertRaises(ValueError):
            fit_rate(_curve([4, 8, 16, 32], [1., 0.5, 0., 0.1]))


class TestExperiment(unittest.TestCase):
    '''
    Parallel replications and aggregation
    '''
    def _config(self, **kwargs):
        options = dict(instance=SMALL_GAME, n_grid=[8, 16, 32, 64],
                       replications=3, delta=0.5, master_seed=11, threads=1)
        options.update(kwargs)
        return ExperimentConfig(**options)

    def test_validation(self):
        with self.assertRaises(ValueError):
            self._config(n_grid=[16, 8])
        with self.assertRaises(ValueError):
            self._config(n_grid=[1, 8])
        with self.assertRaises(ValueError):
            self._config(n_grid=[])
        with self.assertRaises(ValueError):
            self._config(delta=0.05)
        with self.assertRaises(ValueError):
            self._config(delta=1.)
        with self.assertRaises(ValueError):
            self._config(threads=0)
        for seed in [-1, 1.5, None]:
            with self.assertRaises(ValueError) as cm:
                self._config(master_seed=seed)
            self.assertIn("'master_seed'", str(cm.exception))

    def test_tasks(self):
        config = self._config()
        tasks = replication_tasks(config)
        self.assertEqual(len(tasks), 12)
        self.assertEqual(len(set(seed for (_, _, seed) in tasks)), 12)
        self.assertEqual(tasks, replication_tasks(self._config(threads=4)))
        with self.assertRaises(ValueError):
            derive_seed(-1, 8, 0)
        with self.assertRaises(ValueError):
            derive_seed(3, 8.5, 0)

    def test_run(self):
        seen = []
        result = run_experiment(self._config(), on_record=seen.append)
        self.assertEqual(len(result.records), 12)
        self.assertEqual([(r.n, r.rep) for r in seen],
                         [(n, rep) for n in [8, 16, 32, 64]
                          for rep in range(3)])
        self.assertEqual(len(result.curve.rows), 4)
        if result.fit is not None:
            self.assertTrue(np.isfinite(result.fit.slope))

    def test_threads(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            serial = run_experiment(self._config(threads=1))
            parallel = run_experiment(self._config(threads=2))
        self.assertEqual(serial.records, parallel.records)

    def test_short_grid(self):
        result = run_experiment(self._config(n_grid=[8, 16]))
        self.assertIsNone(result.fit)
        self.assertIsNone(result.mean_fit)


class TestRateReproduction(unittest.TestCase):
    '''
    Reduced-scale rate studies: the fitted slope of the quantile curve,
    its dependence on delta and the AUC decay
    '''
    @classmethod
    def setUpClass(cls):
        config = ExperimentConfig(
            instance={'type': 'matrix_game', 'dim': 2, 'num_atoms': 3,
                      'seed': 0, 'truncation_L': 3.},
            n_grid=[64, 128, 256, 512, 1024], replications=40, delta=0.05,
            master_seed=20240601, solver=SolverConfig(gap_tolerance=1e-8),
            threads=2)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            cls.result = run_experiment(config)

    def test_slope(self):
        fit = self.result.fit
        self.assertGreaterEqual(fit.slope, -1.30)
        self.assertLessEqual(fit.slope, -0.75)
        self.assertGreaterEqual(fit.r2, 0.95)

    def test_records(self):
        self.assertEqual(len(self.result.records), 200)
        for rec in self.result.records:
            self.assertGreaterEqual(rec.risk, -1e-8)
            self.assertTrue(rec.converged)

    def test_delta_ratio(self):
        ratio = delta_ratio(self.result.records, 1024)
        self.assertGreaterEqual(ratio, 1.)
        self.assertLessEqual(ratio, 20.)

    def test_auc_decay(self):
        config = ExperimentConfig(
            instance={'type': 'auc', 'dim': 3, 'num_atoms': 20, 'p': 0.5,
                      'seed': 0, 'beta': 1., 'radius': 1.},
            n_grid=[128, 2048], replications=60, delta=0.05, master_seed=7,
            solver=SolverConfig(gap_tolerance=1e-8), threads=2)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            result = run_experiment(config)
        (q_small, q_large) = result.curve.quantiles
        self.assertGreater(q_large, 0.)
        self.assertLessEqual(q_large, q_small / 8)


if __name__ == '__main__':
    unittest.main()
