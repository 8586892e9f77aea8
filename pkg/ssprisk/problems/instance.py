import numpy as np

from ssprisk.constants import FEAS_TOL
from ssprisk.utils import check_seed, make_rng, get_value


class TheoreticalConstants(object):
    """
    Strong-convexity and Lipschitz constants of a stochastic saddle-point
    problem: sigma_x, sigma_y (strong convexity/concavity), L_x, L_y
    (Lipschitz continuity of the loss) and L_xy (Lipschitz continuity of the
    cross gradients).
    """
    def __init__(self, sigma_x, sigma_y, L_x, L_y, L_xy):
        for name, val in [('sigma_x', sigma_x), ('sigma_y', sigma_y)]:
            if not val >= 0:
                raise ValueError(f"'{name}' must be nonnegative, got {val}")
        for name, val in [('L_x', L_x), ('L_y', L_y), ('L_xy', L_xy)]:
            if not val > 0:
                raise ValueError(f"'{name}' must be positive, got {val}")
        self.sigma_x = float(sigma_x)
        self.sigma_y = float(sigma_y)
        self.L_x = float(L_x)
        self.L_y = float(L_y)
        self.L_xy = float(L_xy)

    def __repr__(self):
        return (f"TheoreticalConstants(sigma_x = {self.sigma_x:.6g}, "
                f"sigma_y = {self.sigma_y:.6g}, L_x = {self.L_x:.6g}, "
                f"L_y = {self.L_y:.6g}, L_xy = {self.L_xy:.6g}, "
                f"assumption4_holds = {self.assumption4_holds})")

    @property
    def assumption4_holds(self):
        """Whether the cross-gradient constant is strictly dominated by the
        strong convexity constants, L_xy < min(sigma_x, sigma_y). At
        equality the localization constant vanishes.
        """
        return bool(self.L_xy < min(self.sigma_x, self.sigma_y))

    def swapped(self):
        """Constants of the problem with the roles of x and y exchanged."""
        return TheoreticalConstants(self.sigma_y, self.sigma_x, self.L_y,
                                    self.L_x, self.L_xy)

    def as_dict(self):
        return {
            'sigma_x': self.sigma_x,
            'sigma_y': self.sigma_y,
            'L_x': self.L_x,
            'L_y': self.L_y,
            'L_xy': self.L_xy,
            'assumption4_holds': self.assumption4_holds
        }


class SampleSet(object):
    """
    An i.i.d. sample from the support of a ProblemInstance, stored as atom
    indices (with multiplicity) together with the seed that generated it.
    """
    def __init__(self, indices, seed):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.seed = int(seed)

    def __repr__(self):
        return f"SampleSet(n = {self.n}, seed = {self.seed})"

    def __len__(self):
        return self.indices.size

    def __eq__(self, other):
        return isinstance(other, SampleSet) and self.seed == other.seed and \
            np.array_equal(self.indices, other.indices)

    @property
    def n(self):
        return self.indices.size

    def counts(self, num_atoms):
        return np.bincount(self.indices, minlength=num_atoms)

    def weights(self, num_atoms):
        """Empirical measure P_n as a weight vector over the support."""
        return self.counts(num_atoms) / self.n


class ProblemInstance(object):
    """
    Base class for a stochastic saddle-point problem
        min_{x in X} max_{y in Y} E_xi F(x, y, xi)
    with a finite support {xi_k} and probabilities {p_k}.

    Subclasses implement the loss and its gradients as functions of a weight
    vector over the support, which is linear in the weights: a one-hot vector
    gives the loss of a single atom, the probabilities give the population
    objective and the sample frequencies give the empirical objective.
    """
    def __init__(self, x_geometry, y_geometry, probs):
        probs = np.asarray(probs, dtype=np.float64).ravel()
        if probs.size == 0:
            raise ValueError("Empty support")
        if np.any(probs < 0) or abs(np.sum(probs) - 1) > 1e-12:
            raise ValueError("Support probabilities must be nonnegative and "
                             f"sum to 1 (sum = {np.sum(probs):.16g})")
        self.x_geometry = x_geometry
        self.y_geometry = y_geometry
        self._probs = probs

    @property
    def probs(self):
        """Probabilities of the support atoms."""
        return self._probs

    @property
    def num_atoms(self):
        return self._probs.size

    def _value(self, x, y, weights):
        raise NotImplementedError("_value() needs to be implemented by "
                                  "ProblemInstance subclasses")

    def _grad_x(self, x, y, weights):
        raise NotImplementedError("_grad_x() needs to be implemented by "
                                  "ProblemInstance subclasses")

    def _grad_y(self, x, y, weights):
        raise NotImplementedError("_grad_y() needs to be implemented by "
                                  "ProblemInstance subclasses")

    def curvature(self, weights):
        """Strong convexity (in x) and concavity (in y) moduli of the
        weighted objective."""
        raise NotImplementedError("curvature() needs to be implemented by "
                                  "ProblemInstance subclasses")

    def block_smoothness(self):
        """Gradient-Lipschitz bounds (L_xx, L_yy, L_cross) of a
        probability-weighted objective, relative to the block geometries."""
        raise NotImplementedError("block_smoothness() needs to be "
                                  "implemented by ProblemInstance subclasses")

    def theoretical_constants(self):
        raise NotImplementedError("theoretical_constants() needs to be "
                                  "implemented by ProblemInstance subclasses")

    def value(self, x, y, weights):
        """
        Weighted loss sum_k weights[k] * F(x, y, xi_k), without feasibility
        checks (finite differences need to step slightly outside the domain).
        """
        return self._value(x, y, np.asarray(weights, dtype=np.float64))

    def value_grad_x(self, x, y, weights):
        return self._grad_x(x, y, np.asarray(weights, dtype=np.float64))

    def value_grad_y(self, x, y, weights):
        return self._grad_y(x, y, np.asarray(weights, dtype=np.float64))

    def onehot(self, atom):
        if int(atom) != atom or atom < 0 or atom >= self.num_atoms:
            raise ValueError(f"Unknown atom {atom}: the support has "
                             f"{self.num_atoms} atoms")
        w = np.zeros(self.num_atoms)
        w[int(atom)] = 1.
        return w

    def check_pair(self, x, y):
        """Raise ValueError if (x, y) is not feasible."""
        if not self.x_geometry.contains(get_value(x), FEAS_TOL):
            raise ValueError("Infeasible point: x is outside of "
                             f"{self.x_geometry}")
        if not self.y_geometry.contains(get_value(y), FEAS_TOL):
            raise ValueError("Infeasible point: y is outside of "
                             f"{self.y_geometry}")

    def _check_interior(self, x, y):
        for (g, v, name) in [(self.x_geometry, x, 'x'),
                             (self.y_geometry, y, 'y')]:
            v = g._check_dim(get_value(v))
            if not g.euclidean and np.any(v <= 0):
                raise ValueError(f"Entropic block '{name}' has a coordinate "
                                 "at or below 0")

    def loss(self, x, y, atom):
        """Loss F(x, y, xi_k) of the support atom with index `atom`."""
        self.check_pair(x, y)
        return self._value(x, y, self.onehot(atom))

    def grad_x(self, x, y, atom):
        """Gradient of F(x, y, xi_k) with respect to x."""
        self._check_interior(x, y)
        return self._grad_x(x, y, self.onehot(atom))

    def grad_y(self, x, y, atom):
        """Gradient of F(x, y, xi_k) with respect to y."""
        self._check_interior(x, y)
        return self._grad_y(x, y, self.onehot(atom))

    def population_loss(self, x, y):
        """Exact population objective F(x, y) = sum_k p_k F(x, y, xi_k)."""
        self.check_pair(x, y)
        return self._value(x, y, self._probs)

    def population_grads(self, x, y):
        """Gradients of the population objective, (grad_x, grad_y)."""
        self._check_interior(x, y)
        return (self._grad_x(x, y, self._probs),
                self._grad_y(x, y, self._probs))

    def sample(self, n: int, seed: int):
        """
        Draw `n` i.i.d. atoms by inverse-CDF sampling of uniform variates
        from a Philox generator keyed by `seed`.
        """
        if int(n) != n or n < 1:
            raise ValueError(f"Sample size must be a positive integer, "
                             f"got {n}")
        seed = check_seed(seed)
        rng = make_rng(seed)
        cdf = np.cumsum(self._probs)
        cdf[-1] = 1.
        u = rng.random(int(n))
        indices = np.searchsorted(cdf, u, side='right')
        indices = np.minimum(indices, self.num_atoms - 1)
        return SampleSet(indices, seed)

    def population(self):
        """Population objective as a SaddleObjective."""
        return SaddleObjective(self, self._probs, label='population')

    def empirical(self, sample_set):
        """Empirical (sample-average) objective of a SampleSet."""
        return SaddleObjective(self,
                               sample_set.weights(self.num_atoms),
                               label=f'empirical(n={sample_set.n})')

    def random_pair(self, rng):
        """A random feasible pair (x, y)."""
        return (self.x_geometry.random_point(rng),
                self.y_geometry.random_point(rng))

    def spec(self):
        """JSON-serializable description of the instance."""
        raise NotImplementedError("spec() needs to be implemented by "
                                  "ProblemInstance subclasses")


class SaddleObjective(object):
    """
    Objective sum_k weights[k] F(x, y, xi_k) of a ProblemInstance, the object
    the solver works with. Nonnegative weights summing to 1 give a population
    or empirical saddle-point problem.
    """
    def __init__(self, instance, weights, label='objective'):
        self.instance = instance
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.size != instance.num_atoms:
            raise ValueError("Objective weights do not match the support")
        self.label = label
        self._sigma = None

    def __repr__(self):
        return f"SaddleObjective({self.label}, {self.instance!r})"

    @property
    def x_geometry(self):
        return self.instance.x_geometry

    @property
    def y_geometry(self):
        return self.instance.y_geometry

    @property
    def sigma(self):
        """Strong convexity/concavity moduli (sigma_x, sigma_y)."""
        if self._sigma is None:
            self._sigma = tuple(
                float(s) for s in self.instance.curvature(self.weights))
        return self._sigma

    @property
    def smoothness(self):
        return self.instance.block_smoothness()

    def loss(self, x, y):
        return float(self.instance._value(x, y, self.weights))

    def grad_x(self, x, y):
        return self.instance._grad_x(x, y, self.weights)

    def grad_y(self, x, y):
        return self.instance._grad_y(x, y, self.weights)


def sample(instance, n, seed):
    """Draw a SampleSet of size `n` from `instance` keyed by `seed`."""
    return instance.sample(n, seed)


def population_loss(instance, x, y):
    return instance.population_loss(x, y)


def population_grads(instance, x, y):
    return instance.population_grads(x, y)


def theoretical_constants(instance):
    return instance.theoretical_constants()
