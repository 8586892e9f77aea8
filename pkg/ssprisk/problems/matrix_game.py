import warnings

import numpy as np

from ssprisk.backend import backend as bd
from ssprisk.geometry import TruncatedSimplex
from ssprisk.utils import make_rng
from .instance import ProblemInstance, TheoreticalConstants


class MatrixGame(ProblemInstance):
    """
    Two-player stochastic matrix game with entropic regularizers on the
    truncated simplex:

        min_x max_y  x^T E[A_xi] y + lambda_x sum_i x_i log x_i
                                   - lambda_y sum_j y_j log y_j

    where the random matrix A_xi takes the values `matrices[k]` with
    probabilities `probs[k]`.
    """
    def __init__(self, matrices, probs, lambda_x: float = 2.,
                 lambda_y: float = 2., truncation_L: float = 3.):
        """Create a MatrixGame.

        Parameters
        ----------
        matrices : array_like
            Array of shape (K, d, d) of game matrices with entries in [-1, 1].
        probs : array_like
            Probabilities of the K matrices.
        lambda_x : float, optional
            Entropy weight of the minimizing player (>= 0).
        lambda_y : float, optional
            Entropy weight of the maximizing player (>= 0).
        truncation_L : float, optional
            Every coordinate of x and y is at least exp(-truncation_L).
        """
        matrices = np.asarray(matrices, dtype=np.float64)
        if matrices.ndim == 2:
            matrices = matrices[np.newaxis, :, :]
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
            raise ValueError("'matrices' must have shape (K, d, d), got "
                             f"{matrices.shape}")
        if np.any(np.abs(matrices) > 1 + 1e-12):
            raise ValueError("Matrix game entries must be bounded by 1 in "
                             "absolute value")
        if not (lambda_x >= 0 and lambda_y >= 0):
            raise ValueError("Entropy weights 'lambda_x', 'lambda_y' must be "
                             "nonnegative")
        dim = matrices.shape[1]
        geom = TruncatedSimplex(dim, truncation_L)
        super().__init__(geom, TruncatedSimplex(dim, truncation_L), probs)
        if self.num_atoms != matrices.shape[0]:
            raise ValueError(f"Got {matrices.shape[0]} matrices for "
                             f"{self.num_atoms} probabilities")

        self.matrices = matrices
        self.dim = dim
        self.lambda_x = float(lambda_x)
        self.lambda_y = float(lambda_y)
        self.truncation_L = float(truncation_L)
        self.a_max = float(np.max(np.abs(matrices)))
        self._check_floor()

    def __repr__(self):
        return (f"MatrixGame(dim = {self.dim}, num_atoms = {self.num_atoms}, "
                f"lambda_x = {self.lambda_x:.4g}, lambda_y = "
                f"{self.lambda_y:.4g}, truncation_L = {self.truncation_L:.4g})")

    def _check_floor(self):
        # Best responses have min coordinate >= 1/(1 + (d-1) exp(2 a / lam));
        # above that the floor can bind and the Euclidean repair moves the
        # fixed point.
        lam = min(self.lambda_x, self.lambda_y)
        if self.dim == 1 or lam == 0:
            return
        expo = min(2 * self.a_max / lam, 700.)
        min_coord = 1. / (1 + (self.dim - 1) * np.exp(expo))
        if self.x_geometry.floor > min_coord:
            warnings.warn(
                f"Truncation floor exp(-{self.truncation_L:.4g}) = "
                f"{self.x_geometry.floor:.4g} exceeds the smallest possible "
                f"best-response coordinate {min_coord:.4g}; the floor may be "
                "active at the saddle point", UserWarning)

    def mean_matrix(self, weights=None):
        """sum_k weights[k] A_k, the population mean matrix by default."""
        weights = self.probs if weights is None else weights
        return np.tensordot(np.asarray(weights, dtype=np.float64),
                            self.matrices, axes=1)

    def _value(self, x, y, weights):
        amat = self.mean_matrix(weights)
        wsum = np.sum(weights)
        bilinear = bd.dot(x, bd.dot(amat, y))
        ent_x = bd.sum(x * bd.log(x))
        ent_y = bd.sum(y * bd.log(y))
        return bilinear + wsum * (self.lambda_x * ent_x -
                                  self.lambda_y * ent_y)

    def _grad_x(self, x, y, weights):
        amat = self.mean_matrix(weights)
        wsum = np.sum(weights)
        return amat.dot(y) + wsum * self.lambda_x * (1 + np.log(x))

    def _grad_y(self, x, y, weights):
        amat = self.mean_matrix(weights)
        wsum = np.sum(weights)
        return amat.T.dot(x) - wsum * self.lambda_y * (1 + np.log(y))

    def curvature(self, weights):
        wsum = float(np.sum(weights))
        return (self.lambda_x * wsum, self.lambda_y * wsum)

    def block_smoothness(self):
        return (self.lambda_x + self.a_max, self.lambda_y + self.a_max,
                max(self.a_max, 1e-12))

    def theoretical_constants(self):
        """
        sigma = lambda (entropy is 1-strongly convex in l1), the loss is
        Lipschitz with lambda (L + 1) + 1 on the truncated simplex and the
        cross gradients with L_xy = 1.
        """
        L = self.truncation_L
        return TheoreticalConstants(sigma_x=self.lambda_x,
                                    sigma_y=self.lambda_y,
                                    L_x=self.lambda_x * (L + 1) + 1,
                                    L_y=self.lambda_y * (L + 1) + 1,
                                    L_xy=1.)

    def spec(self):
        return {
            'type': 'matrix_game',
            'dim': self.dim,
            'lambda_x': self.lambda_x,
            'lambda_y': self.lambda_y,
            'truncation_L': self.truncation_L,
            'matrices': self.matrices.tolist(),
            'probs': self.probs.tolist()
        }

    def scaled(self, factor):
        """Copy of the game with both entropy weights multiplied by `factor`.
        """
        return MatrixGame(self.matrices, self.probs, self.lambda_x * factor,
                          self.lambda_y * factor, self.truncation_L)

    @classmethod
    def random(cls, dim: int, num_atoms: int = 3, lambda_x: float = 2.,
               lambda_y: float = 2., truncation_L: float = 3., seed: int = 0,
               base_scale: float = 0.5, noise_scale: float = 0.5,
               probs=None):
        """
        Random game: a base matrix with entries uniform in
        [-base_scale, base_scale] plus `num_atoms` perturbations uniform in
        [-noise_scale, noise_scale], clipped to [-1, 1]. The atoms are
        equiprobable unless `probs` is given.
        """
        rng = make_rng(seed)
        base = rng.uniform(-base_scale, base_scale, size=(dim, dim))
        noise = rng.uniform(-noise_scale, noise_scale,
                            size=(num_atoms, dim, dim))
        matrices = np.clip(base[np.newaxis, :, :] + noise, -1., 1.)
        if probs is None:
            probs = np.full(num_atoms, 1. / num_atoms)
        return cls(matrices, probs, lambda_x, lambda_y, truncation_L)
