import unittest

import numpy as np

from ssprisk.geometry import (EuclideanBall, EuclideanBox, TruncatedSimplex,
                              ProductGeometry, norm, dual_norm, project,
                              prox_step, project_simplex, simplex_grid)
from ssprisk.utils import make_rng


class TestNorms(unittest.TestCase):
    '''
    Block norms and their duals
    '''
    def test_zero(self):
        for g in [EuclideanBall(3, 1.), TruncatedSimplex(3, 3.)]:
            self.assertEqual(norm(np.zeros(3), g), 0.)
            self.assertEqual(dual_norm(np.zeros(3), g), 0.)

    def test_values(self):
        ball = EuclideanBall(2, 1.)
        simplex = TruncatedSimplex(2, 1.)
        self.assertAlmostEqual(norm(np.array([3., 4.]), ball), 5.)
        self.assertAlmostEqual(dual_norm(np.array([3., 4.]), ball), 5.)
        self.assertAlmostEqual(norm(np.array([0.3, -0.7]), simplex), 1.)
        self.assertAlmostEqual(dual_norm(np.array([0.3, -0.7]), simplex),
                               0.7)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            norm(np.ones(3), EuclideanBall(2, 1.))
        with self.assertRaises(ValueError):
            dual_norm(np.ones(2), TruncatedSimplex(3, 3.))

    def test_holder(self):
        rng = make_rng(0)
        for g in [EuclideanBall(4, 1.), TruncatedSimplex(4, 3.)]:
            for _ in range(1000):
                u = rng.standard_normal(4)
                v = rng.standard_normal(4)
                self.assertLessEqual(abs(u.dot(v)),
                                     g.dual_norm(u) * g.norm(v) + 1e-10)


class TestProjections(unittest.TestCase):
    '''
    Euclidean projections onto the block sets
    '''
    def test_examples(self):
        g = TruncatedSimplex(2, 1.)
        np.testing.assert_allclose(project(np.array([0.5, 0.5]), g),
                                   [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(project(np.array([2., 0.]), g),
                                   [1 - np.exp(-1), np.exp(-1)], atol=1e-12)
        np.testing.assert_allclose(
            project(np.array([6., 8.]), EuclideanBall(2, 5.)), [3., 4.])
        np.testing.assert_allclose(
            project(np.array([2., -0.5, -3.]), EuclideanBox(3, 1.)),
            [1., -0.5, -1.])

    def test_empty_simplex(self):
        with self.assertRaises(ValueError):
            TruncatedSimplex(5, 1.)

    def test_simplex_sorting(self):
        np.testing.assert_allclose(project_simplex(np.array([0.2, 0.3])),
                                   [0.45, 0.55])
        np.testing.assert_allclose(project_simplex(np.array([3., 0.])),
                                   [1., 0.])

    def test_idempotent_and_nearest(self):
        rng = make_rng(1)
        geoms = [
            TruncatedSimplex(4, 3.),
            EuclideanBall(4, 1.),
            EuclideanBox(4, 0.5),
            ProductGeometry([EuclideanBall(2, 1.), EuclideanBox(2, 2.)])
        ]
        for g in geoms:
            for _ in range(1000):
                v = 3 * rng.standard_normal(g.dim)
                p = g.project(v)
                self.assertTrue(g.contains(p))
                np.testing.assert_allclose(g.project(p), p, atol=1e-12)
                z = g.random_point(rng)
                self.assertLessEqual(np.linalg.norm(p - v),
                                     np.linalg.norm(z - v) + 1e-10)

    def test_product_split(self):
        g = ProductGeometry([EuclideanBall(2, 1.), EuclideanBox(1, 1.)])
        self.assertEqual(g.dim, 3)
        p = g.project(np.array([3., 4., 5.]))
        np.testing.assert_allclose(p, [0.6, 0.8, 1.])
        with self.assertRaises(ValueError):
            ProductGeometry([TruncatedSimplex(2, 3.)])


class TestProxStep(unittest.TestCase):
    '''
    Entropic and Euclidean prox steps
    '''
    def test_zero_grad(self):
        g = TruncatedSimplex(3, 3.)
        x = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(prox_step(x, np.zeros(3), 0.7, g), x,
                                   atol=1e-12)
        ball = EuclideanBall(3, 1.)
        np.testing.assert_allclose(prox_step(0.5 * x, np.zeros(3), 1., ball),
                                   0.5 * x)

    def test_constant_shift(self):
        g = TruncatedSimplex(4, 3.)
        x = g.center()
        np.testing.assert_allclose(prox_step(x, 2.5 * np.ones(4), 1., g), x,
                                   atol=1e-12)

    def test_entropic_example(self):
        g = TruncatedSimplex(2, 3.)
        out = prox_step(np.array([0.5, 0.5]), np.array([1., 0.]), 1., g)
        np.testing.assert_allclose(out, [0.26894142, 0.73105858], atol=1e-8)

    def test_feasible(self):
        rng = make_rng(2)
        g = TruncatedSimplex(3, 2.)
        for _ in range(500):
            x = g.random_point(rng)
            out = g.prox_step(x, 10 * rng.standard_normal(3),
                              rng.uniform(0.1, 5.))
            self.assertTrue(g.contains(out))

    def test_errors(self):
        g = TruncatedSimplex(2, 3.)
        with self.assertRaises(ValueError):
            g.prox_step(g.center(), np.array([np.nan, 0.]), 1.)
        with self.assertRaises(ValueError):
            g.prox_step(g.center(), np.zeros(2), 0.)


class TestSimplexGrid(unittest.TestCase):
    def test_grid(self):
        g = TruncatedSimplex(3, 3.)
        pts = simplex_grid(3, g.floor, 0.05)
        for p in pts:
            self.assertTrue(g.contains(p, tol=1e-10))
        # neighbouring lattice points are one l1 step apart
        step = np.sum(np.abs(pts[0] - pts[1]))
        self.assertLessEqual(step, 0.05 + 1e-12)

    def test_single_point(self):
        np.testing.assert_allclose(simplex_grid(1, np.exp(-3.), 0.05), [[1.]])

    def test_too_coarse(self):
        with self.assertRaises(ValueError):
            simplex_grid(2, np.exp(-1.), 1.)


if __name__ == '__main__':
    unittest.main()
