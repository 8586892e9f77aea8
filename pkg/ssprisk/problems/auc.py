import numpy as np

from ssprisk.backend import backend as bd
from ssprisk.geometry import EuclideanBall, EuclideanBox, ProductGeometry
from ssprisk.utils import make_rng
from .instance import ProblemInstance, TheoreticalConstants


class AucSaddle(ProblemInstance):
    """
    Square-loss AUC maximization of a linear scorer written as a saddle-point
    problem. With s = w^T x and label y in {+1, -1},

        F(w, a, b, alpha; x, y) = (1-p) (s - a)^2 I[y=1] + p (s - b)^2 I[y=-1]
                                  + 2 (1 + alpha) s (p I[y=-1] - (1-p) I[y=1])
                                  - p (1-p) alpha^2 + beta ||w||^2

    The min block u = (w, a, b) lives in B_r x [-c, c]^2 and the max block
    alpha in [-c, c].
    """
    def __init__(self, features, labels, probs, beta: float = 1.,
                 radius: float = 1., box: float = None, p: float = None):
        """Create an AucSaddle.

        Parameters
        ----------
        features : array_like
            Array of shape (K, d) of support feature vectors, all in B_r.
        labels : array_like
            Labels (+1 or -1) of the K support atoms.
        probs : array_like
            Probabilities of the K support atoms.
        beta : float, optional
            Ridge weight (> 0).
        radius : float, optional
            Radius r <= 1 of the feature ball and of the ball of w.
        box : float, optional
            Bound c on |a|, |b| and |alpha|; 2 * radius if None, which
            contains every best response.
        p : float, optional
            Positive-class probability; checked against the label mass of
            `probs` if given.
        """
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels).ravel()
        if features.ndim != 2:
            raise ValueError("'features' must have shape (K, d), got "
                             f"{features.shape}")
        if not np.all(np.isin(labels, [-1, 1])):
            raise ValueError("AUC labels must be +1 or -1")
        if labels.size != features.shape[0]:
            raise ValueError(f"Got {labels.size} labels for "
                             f"{features.shape[0]} feature vectors")
        if not beta > 0:
            raise ValueError(f"Ridge weight 'beta' must be positive, got "
                             f"{beta}")
        if not 0 < radius <= 1:
            raise ValueError("AUC 'radius' must be in (0, 1], got "
                             f"{radius}")
        if np.any(np.linalg.norm(features, axis=1) > radius + 1e-12):
            raise ValueError("AUC support features must lie in the ball of "
                             f"radius {radius}")
        box = 2. * radius if box is None else float(box)

        dim = features.shape[1]
        x_geometry = ProductGeometry(
            [EuclideanBall(dim, radius),
             EuclideanBox(2, box)])
        super().__init__(x_geometry, EuclideanBox(1, box), probs)

        pos_mass = float(np.sum(self.probs[labels == 1]))
        if p is not None and abs(p - pos_mass) > 1e-12:
            raise ValueError(f"Positive-class probability p = {p} does not "
                             f"match the label mass {pos_mass:.16g}")
        if not 0 < pos_mass < 1:
            raise ValueError("AUC support needs both labels with positive "
                             "probability")

        self.features = features
        self.labels = labels.astype(np.int64)
        self.dim = dim
        self.p = pos_mass
        self.beta = float(beta)
        self.radius = float(radius)
        self.box = box
        self._pos = (self.labels == 1).astype(np.float64)
        self._neg = (self.labels == -1).astype(np.float64)

    def __repr__(self):
        return (f"AucSaddle(dim = {self.dim}, num_atoms = {self.num_atoms}, "
                f"p = {self.p:.4g}, beta = {self.beta:.4g}, "
                f"radius = {self.radius:.4g}, box = {self.box:.4g})")

    def _split(self, u):
        return u[:self.dim], u[self.dim], u[self.dim + 1]

    def _value(self, u, alpha, weights):
        p = self.p
        w, a, b = self._split(u)
        al = alpha[0]
        s = bd.dot(self.features, w)
        coupling = p * self._neg - (1 - p) * self._pos
        per_atom = (1 - p) * (s - a)**2 * self._pos \
            + p * (s - b)**2 * self._neg \
            + 2 * (1 + al) * s * coupling
        wsum = np.sum(weights)
        return bd.sum(weights * per_atom) + wsum * (
            self.beta * bd.sum(w * w) - p * (1 - p) * al**2)

    def _grad_x(self, u, alpha, weights):
        p = self.p
        w, a, b = self._split(u)
        al = alpha[0]
        s = self.features.dot(w)
        wsum = np.sum(weights)
        res_a = 2 * (1 - p) * (s - a) * self._pos
        res_b = 2 * p * (s - b) * self._neg
        coupling = 2 * (1 + al) * (p * self._neg - (1 - p) * self._pos)
        g_w = self.features.T.dot(weights * (res_a + res_b + coupling))
        g_w = g_w + 2 * self.beta * wsum * w
        g_a = -np.sum(weights * res_a)
        g_b = -np.sum(weights * res_b)
        return np.concatenate([g_w, [g_a, g_b]])

    def _grad_y(self, u, alpha, weights):
        p = self.p
        w = u[:self.dim]
        s = self.features.dot(w)
        coupling = 2 * s * (p * self._neg - (1 - p) * self._pos)
        return np.array([
            np.sum(weights * coupling) -
            2 * p * (1 - p) * alpha[0] * np.sum(weights)
        ])

    def hessian_x(self, weights):
        """Hessian of the weighted objective in the min block (constant)."""
        p = self.p
        weights = np.asarray(weights, dtype=np.float64)
        dim = self.dim
        vpos = np.hstack([self.features, -np.ones((self.num_atoms, 1)),
                          np.zeros((self.num_atoms, 1))])
        vneg = np.hstack([self.features, np.zeros((self.num_atoms, 1)),
                          -np.ones((self.num_atoms, 1))])
        cpos = 2 * (1 - p) * weights * self._pos
        cneg = 2 * p * weights * self._neg
        hess = (vpos.T * cpos).dot(vpos) + (vneg.T * cneg).dot(vneg)
        hess[:dim, :dim] += 2 * self.beta * np.sum(weights) * np.eye(dim)
        return hess

    def curvature(self, weights):
        sigma_x = float(np.linalg.eigvalsh(self.hessian_x(weights))[0])
        sigma_y = 2 * self.p * (1 - self.p) * float(np.sum(weights))
        return (max(sigma_x, 0.), sigma_y)

    def block_smoothness(self):
        q = max(self.p, 1 - self.p)
        r = self.radius
        return (2 * q * (r**2 + 1) + 2 * self.beta,
                2 * self.p * (1 - self.p), 2 * q * r)

    def theoretical_constants(self):
        # Gradient bounds over |x|, |w| <= r and |a|, |b|, |alpha| <= c:
        #   |dF/dw| <= 2q r (r^2 + 1 + 2c) + 2 beta r,  |dF/da| <= 2q (r^2 + c)
        #   |dF/dalpha| <= 2q r^2 + 2p(1-p) c
        # and the cross gradients change by at most 2q r per unit step.
        p, r, c = self.p, self.radius, self.box
        q = max(p, 1 - p)
        bound_w = 2 * q * r * (r**2 + 1 + 2 * c) + 2 * self.beta * r
        bound_ab = 2 * q * (r**2 + c)
        sigma_x, sigma_y = self.curvature(self.probs)
        return TheoreticalConstants(sigma_x=sigma_x,
                                    sigma_y=sigma_y,
                                    L_x=np.sqrt(bound_w**2 + bound_ab**2),
                                    L_y=2 * q * r**2 + 2 * p * (1 - p) * c,
                                    L_xy=2 * q * r)

    def auc_score(self, w):
        """
        Exact population AUC of the linear scorer x -> w^T x: probability
        that a positive atom outscores a negative one, ties counted 1/2.
        """
        w = np.asarray(w, dtype=np.float64).ravel()[:self.dim]
        scores = self.features.dot(w)
        pos = self.labels == 1
        neg = ~pos
        ppos = self.probs[pos] / self.p
        pneg = self.probs[neg] / (1 - self.p)
        diff = scores[pos][:, np.newaxis] - scores[neg][np.newaxis, :]
        wins = (diff > 0) + 0.5 * (diff == 0)
        return float(ppos.dot(wins).dot(pneg))

    def spec(self):
        return {
            'type': 'auc',
            'beta': self.beta,
            'radius': self.radius,
            'box': self.box,
            'features': self.features.tolist(),
            'labels': self.labels.tolist(),
            'probs': self.probs.tolist()
        }

    @classmethod
    def random(cls, dim: int, num_atoms: int = 20, p: float = 0.5,
               beta: float = 1., radius: float = 1., box: float = None,
               seed: int = 0, separation: float = 0.3, spread: float = 0.3):
        """
        Random two-class dataset: Gaussian clouds centered at
        +/- separation along the first axis, pulled back into B_r. The
        positive atoms share mass p and the negative atoms share 1 - p.
        """
        if not 0 < p < 1:
            raise ValueError(f"'p' must be in (0, 1), got {p}")
        if num_atoms < 2:
            raise ValueError("AUC support needs at least 2 atoms")
        rng = make_rng(seed)
        n_pos = int(min(max(round(p * num_atoms), 1), num_atoms - 1))
        labels = np.array([1] * n_pos + [-1] * (num_atoms - n_pos))
        centers = np.zeros((num_atoms, dim))
        centers[:, 0] = separation * labels
        features = centers + spread * rng.standard_normal((num_atoms, dim))
        norms = np.linalg.norm(features, axis=1)
        scale = np.minimum(1., radius / np.maximum(norms, 1e-300))
        features = features * scale[:, np.newaxis]
        probs = np.where(labels == 1, p / n_pos,
                         (1 - p) / (num_atoms - n_pos))
        return cls(features, labels, probs, beta, radius, box)
