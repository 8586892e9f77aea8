import unittest

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from ssprisk import viz
from ssprisk.problems import MatrixGame
from ssprisk.risk import QuantileCurve, fit_rate
from ssprisk.solver import SolverConfig, solve_saddle


class TestViz(unittest.TestCase):
    '''
    Plots of experiments, solves and suprema
    '''
    def tearDown(self):
        plt.close('all')

    def test_rate_curve(self):
        ns = [64, 128, 256, 512]
        rows = [{'n': n, 'q': 2. / n, 'mean': 1. / n, 'median': 1. / n}
                for n in ns]
        curve = QuantileCurve(rows, 0.05, 100)
        fit = fit_rate(curve)
        ax = viz.rate_curve(curve, fit=fit)
        self.assertEqual(ax.get_xscale(), 'log')
        labels = [line.get_label() for line in ax.get_lines()]
        self.assertIn('fit: slope -1.00', labels)

    def test_gap_trace(self):
        game = MatrixGame.random(2, seed=0)
        report = solve_saddle(game.population(),
                              SolverConfig(gap_tolerance=1e-8))
        ax = viz.gap_trace(report, tolerance=1e-8)
        np.testing.assert_array_equal(ax.get_lines()[0].get_xdata(),
                                      report.gap_iters)

    def test_suprema_histogram(self):
        (fig, ax) = plt.subplots(1)
        out = viz.suprema_histogram(np.linspace(0., 1., 50), lam=2., ax=ax)
        self.assertIs(out, ax)
        self.assertEqual(sum(p.get_height() for p in ax.patches), 50)


if __name__ == '__main__':
    unittest.main()
