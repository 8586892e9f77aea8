import numpy as np

from ssprisk.constants import FEAS_TOL
from .projections import (project_truncated_simplex, project_ball,
                          project_box)


class GeometrySpec(object):
    """
    Base class for the geometry of one block of a saddle-point problem: the
    feasible set together with its norm, dual norm, projection and prox step.
    Block vectors are one-dimensional numpy arrays of length `dim`.
    """
    kind = None
    euclidean = True

    def __init__(self, dim: int):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"Geometry dimension must be a positive integer, "
                             f"got {dim}")
        self.dim = int(dim)

    def _check_dim(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size != self.dim:
            raise ValueError(f"Dimension mismatch: vector of shape {v.shape} "
                             f"for a {self.kind} block of dim {self.dim}")
        return v

    def norm(self, v):
        """Primal block norm of `v` (l2 for Euclidean blocks)."""
        return float(np.linalg.norm(self._check_dim(v)))

    def dual_norm(self, v):
        """Dual block norm of `v` (l2 for Euclidean blocks)."""
        return float(np.linalg.norm(self._check_dim(v)))

    def project(self, v):
        raise NotImplementedError("project() needs to be implemented by"
                                  "GeometrySpec subclasses")

    def contains(self, v, tol=FEAS_TOL):
        raise NotImplementedError("contains() needs to be implemented by"
                                  "GeometrySpec subclasses")

    def prox_step(self, x, grad, eta):
        """
        One prox (mirror) step from the feasible point `x` along `-grad` with
        step `eta`. For Euclidean blocks this is project(x - eta * grad).
        """
        x = self._check_dim(x)
        grad = self._check_grad(grad, eta)
        return self.project(x - eta * grad)

    def _check_grad(self, grad, eta):
        grad = self._check_dim(grad)
        if not np.all(np.isfinite(grad)):
            raise ValueError("Non-finite gradient entries in prox step")
        if not eta > 0:
            raise ValueError(f"Prox step size must be positive, got {eta}")
        return grad

    def center(self):
        return np.zeros(self.dim)

    def diameter(self):
        raise NotImplementedError("diameter() needs to be implemented by"
                                  "GeometrySpec subclasses")

    def random_point(self, rng):
        raise NotImplementedError("random_point() needs to be implemented by"
                                  "GeometrySpec subclasses")


class EuclideanBall(GeometrySpec):
    """
    Ball of given radius centered at 0, with the l2 norm.
    """
    kind = 'euclidean_ball'

    def __init__(self, dim: int, radius: float):
        super().__init__(dim)
        if not radius > 0:
            raise ValueError(f"Ball radius must be positive, got {radius}")
        self.radius = float(radius)

    def __repr__(self):
        return f"EuclideanBall(dim = {self.dim}, radius = {self.radius:.4g})"

    def project(self, v):
        return project_ball(self._check_dim(v), self.radius)

    def contains(self, v, tol=FEAS_TOL):
        return bool(np.linalg.norm(self._check_dim(v)) <= self.radius + tol)

    def diameter(self):
        return 2 * self.radius

    def random_point(self, rng):
        direction = rng.standard_normal(self.dim)
        direction /= np.linalg.norm(direction)
        return self.radius * rng.random()**(1. / self.dim) * direction


class EuclideanBox(GeometrySpec):
    """
    Box [-bound, bound]^dim with the l2 norm.
    """
    kind = 'euclidean_box'

    def __init__(self, dim: int, bound: float):
        super().__init__(dim)
        if not bound > 0:
            raise ValueError(f"Box bound must be positive, got {bound}")
        self.bound = float(bound)

    def __repr__(self):
        return f"EuclideanBox(dim = {self.dim}, bound = {self.bound:.4g})"

    def project(self, v):
        return project_box(self._check_dim(v), self.bound)

    def contains(self, v, tol=FEAS_TOL):
        return bool(np.all(np.abs(self._check_dim(v)) <= self.bound + tol))

    def diameter(self):
        return 2 * self.bound * np.sqrt(self.dim)

    def random_point(self, rng):
        return rng.uniform(-self.bound, self.bound, size=self.dim)


class TruncatedSimplex(GeometrySpec):
    """
    Probability simplex with every coordinate at least exp(-truncation_L),
    with the l1 norm (dual l-infinity) and the entropic prox step.
    """
    kind = 'truncated_simplex'
    euclidean = False

    def __init__(self, dim: int, truncation_L: float):
        super().__init__(dim)
        if not truncation_L > 0:
            raise ValueError(f"truncation_L must be positive, got "
                             f"{truncation_L}")
        self.truncation_L = float(truncation_L)
        self.floor = float(np.exp(-self.truncation_L))
        if self.dim * self.floor >= 1:
            raise ValueError(
                f"Truncated simplex is empty: dim * exp(-L) = "
                f"{self.dim * self.floor:.6g} >= 1 for dim = {self.dim}, "
                f"L = {self.truncation_L}")

    def __repr__(self):
        return (f"TruncatedSimplex(dim = {self.dim}, "
                f"truncation_L = {self.truncation_L:.4g})")

    @property
    def mass(self):
        """Mass left above the floor, 1 - dim * exp(-L)."""
        return 1. - self.dim * self.floor

    def norm(self, v):
        return float(np.sum(np.abs(self._check_dim(v))))

    def dual_norm(self, v):
        return float(np.max(np.abs(self._check_dim(v))))

    def project(self, v):
        return project_truncated_simplex(self._check_dim(v), self.floor)

    def contains(self, v, tol=FEAS_TOL):
        v = self._check_dim(v)
        return bool(
            np.all(v >= self.floor - tol) and abs(np.sum(v) - 1.) <= tol)

    def prox_step(self, x, grad, eta):
        """
        Entropic step: multiplicative update x_i * exp(-eta * grad_i),
        normalized, then Euclidean projection onto the truncated simplex.
        """
        x = self._check_dim(x)
        grad = self._check_grad(grad, eta)
        if np.any(x <= 0):
            raise ValueError("Entropic prox step needs strictly positive "
                             "coordinates")
        logu = np.log(x) - eta * grad
        logu -= np.max(logu)
        u = np.exp(logu)
        return self.project(u / np.sum(u))

    def center(self):
        return np.full(self.dim, 1. / self.dim)

    def diameter(self):
        return 2 * self.mass if self.dim > 1 else 0.

    def random_point(self, rng):
        if self.dim == 1:
            return np.ones(1)
        return self.floor + self.mass * rng.dirichlet(np.ones(self.dim))


class ProductGeometry(GeometrySpec):
    """
    Concatenation of Euclidean blocks (balls and boxes). The norm is the l2
    norm of the whole vector and projections act part by part.
    """
    kind = 'product'

    def __init__(self, parts):
        if len(parts) == 0:
            raise ValueError("ProductGeometry needs at least one part")
        for part in parts:
            if not part.euclidean or isinstance(part, ProductGeometry):
                raise ValueError("ProductGeometry only combines Euclidean "
                                 "balls and boxes")
        super().__init__(sum(part.dim for part in parts))
        self.parts = list(parts)
        bounds = np.cumsum([0] + [part.dim for part in parts])
        self.slices = [slice(bounds[i], bounds[i + 1])
                       for i in range(len(parts))]

    def __repr__(self):
        return "ProductGeometry(" + ", ".join(repr(p)
                                              for p in self.parts) + ")"

    def split(self, v):
        v = self._check_dim(v)
        return [v[sl] for sl in self.slices]

    def project(self, v):
        return np.concatenate([
            part.project(vi) for (part, vi) in zip(self.parts, self.split(v))
        ])

    def contains(self, v, tol=FEAS_TOL):
        return all(
            part.contains(vi, tol)
            for (part, vi) in zip(self.parts, self.split(v)))

    def diameter(self):
        return float(np.sqrt(sum(part.diameter()**2 for part in self.parts)))

    def center(self):
        return np.concatenate([part.center() for part in self.parts])

    def random_point(self, rng):
        return np.concatenate([part.random_point(rng) for part in self.parts])


def norm(v, g):
    """Primal norm of the block vector `v` in geometry `g`."""
    return g.norm(v)


def dual_norm(v, g):
    """Dual norm of the block vector `v` in geometry `g`."""
    return g.dual_norm(v)


def project(v, g):
    """Euclidean projection of `v` onto the feasible set of `g`."""
    return g.project(v)


def prox_step(x, grad, eta, g):
    """Prox step of geometry `g` from `x` along `-grad` with step `eta`."""
    return g.prox_step(x, grad, eta)
