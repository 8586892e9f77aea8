import unittest

import numpy as np

import ssprisk
from ssprisk.backend import backend
from ssprisk.problems import MatrixGame, AucSaddle, autograd_gradients
from ssprisk.utils import make_rng


class TestAutogradGradients(unittest.TestCase):
    '''
    Closed-form gradients of the weighted loss vs. automatic
    differentiation
    '''
    def tearDown(self):
        ssprisk.set_backend('numpy')

    def _compare(self, instance, n_points=20):
        rng = make_rng(0)
        for _ in range(n_points):
            x, y = instance.random_pair(rng)
            weights = rng.dirichlet(np.ones(instance.num_atoms))
            (gx, gy) = autograd_gradients(instance, x, y, weights)
            np.testing.assert_allclose(
                gx, instance.value_grad_x(x, y, weights), rtol=1e-10,
                atol=1e-12)
            np.testing.assert_allclose(
                gy, instance.value_grad_y(x, y, weights), rtol=1e-10,
                atol=1e-12)

    def test_matrix_game(self):
        try:
            import autograd.numpy as npa
            from autograd import grad
        except:
            return 0

        ssprisk.set_backend('autograd')
        self._compare(MatrixGame.random(3, num_atoms=4, seed=2))

    def test_auc(self):
        try:
            import autograd.numpy as npa
            from autograd import grad
        except:
            return 0

        ssprisk.set_backend('autograd')
        self._compare(AucSaddle.random(dim=3, num_atoms=10, seed=1))

    def test_needs_backend(self):
        game = MatrixGame.random(2, seed=0)
        x, y = game.random_pair(make_rng(1))
        with self.assertRaises(ValueError):
            autograd_gradients(game, x, y, game.probs)


class TestBackend(unittest.TestCase):
    '''
    Operations the losses are written against
    '''
    def test_numpy_ops(self):
        bd = backend
        self.assertEqual(repr(bd), 'NumpyBackend')
        x = np.array([0.25, 0.75])
        self.assertEqual(bd.dot(x, x), 0.625)
        self.assertEqual(bd.sum(x), 1.)
        np.testing.assert_allclose(bd.log(x), np.log(x))

    def test_loss_through_backend(self):
        game = MatrixGame(np.array([[0., 1.], [1., 0.]]), [1.])
        x = np.array([0.5, 0.5])
        # the entropy terms cancel for equal x and y and lambda_x = lambda_y
        self.assertAlmostEqual(game.population_loss(x, x), 0.5)

    def test_unknown(self):
        with self.assertRaises(ValueError):
            ssprisk.set_backend('jax')
        self.assertEqual(repr(backend), 'NumpyBackend')


if __name__ == '__main__':
    unittest.main()
