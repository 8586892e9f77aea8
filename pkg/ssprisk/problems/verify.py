"""
Numerical probes of the structural constants of a ProblemInstance and a
finite-difference check of its closed-form gradients.
"""
import numpy as np

from ssprisk.backend import backend as bd
from ssprisk.backend import AG_AVAILABLE
from ssprisk.constants import FD_STEP, FD_RTOL
from ssprisk.utils import grad_num, rel_error, make_rng
from ssprisk.print_utils import verbose_print

if AG_AVAILABLE:
    from autograd import grad


class AssumptionReport(object):
    """
    Result of verify_assumptions: empirical extremes of the curvature,
    Lipschitz and cross-Lipschitz ratios compared with the theoretical
    constants of the instance.

    Attributes
    ----------
    estimates : dict
        Empirical sigma_x, sigma_y (minima) and L_x, L_y, L_xy (maxima).
    constants : TheoreticalConstants
    checks : list of dict
        One entry per check with keys 'name', 'estimate', 'theory' and
        'passed'.
    """
    def __init__(self, estimates, constants, checks, n_probe, seed):
        self.estimates = estimates
        self.constants = constants
        self.checks = checks
        self.n_probe = n_probe
        self.seed = seed

    def __repr__(self):
        return (f"AssumptionReport(n_probe = {self.n_probe}, "
                f"passed = {self.passed})")

    @property
    def passed(self):
        return all(check['passed'] for check in self.checks)

    @property
    def failures(self):
        return [check['name'] for check in self.checks if not check['passed']]

    def as_dict(self):
        return {
            'n_probe': self.n_probe,
            'seed': self.seed,
            'estimates': dict(self.estimates),
            'constants': self.constants.as_dict(),
            'checks': [dict(check) for check in self.checks],
            'passed': self.passed
        }


def verify_assumptions(instance, n_probe: int = 1000, seed: int = 0,
                       rtol: float = 1e-6, verbose: bool = False):
    """
    Probe the strong convexity-concavity, Lipschitz and cross-gradient
    Lipschitz constants of `instance` on random feasible pairs.

    Curvature is estimated on the population objective with the midpoint
    gap 8 [(F(x) + F(x'))/2 - F((x + x')/2)] / ||x - x'||^2. Lipschitz and
    cross-gradient ratios are estimated per atom.

    Parameters
    ----------
    instance : ProblemInstance
    n_probe : int, optional
        Number of random probes (>= 2).
    seed : int, optional
    rtol : float, optional
        Relative tolerance of the comparison with the theoretical constants.
    verbose : bool, optional

    Returns
    -------
    AssumptionReport
    """
    if int(n_probe) != n_probe or n_probe < 2:
        raise ValueError(f"'n_probe' must be an integer >= 2, got {n_probe}")
    xg, yg = instance.x_geometry, instance.y_geometry
    if xg.diameter() == 0 or yg.diameter() == 0:
        raise ValueError("Degenerate domain: a block has zero diameter")

    rng = make_rng(seed)
    theory = instance.theoretical_constants()
    pop = instance.probs
    est = {'sigma_x': np.inf, 'sigma_y': np.inf, 'L_x': 0., 'L_y': 0.,
           'L_xy': 0.}

    for ip in range(int(n_probe)):
        x1, y1 = instance.random_pair(rng)
        x2, y2 = instance.random_pair(rng)
        atom = int(rng.choice(instance.num_atoms, p=pop))
        onehot = instance.onehot(atom)
        dx = xg.norm(x1 - x2)
        dy = yg.norm(y1 - y2)
        if dx == 0 or dy == 0:
            continue

        xm = (x1 + x2) / 2
        ym = (y1 + y2) / 2
        f11 = instance.value(x1, y1, pop)
        gap_x = (f11 + instance.value(x2, y1, pop)) / 2 - \
            instance.value(xm, y1, pop)
        gap_y = instance.value(x1, ym, pop) - \
            (f11 + instance.value(x1, y2, pop)) / 2
        est['sigma_x'] = min(est['sigma_x'], 8 * gap_x / dx**2)
        est['sigma_y'] = min(est['sigma_y'], 8 * gap_y / dy**2)

        fa = instance.value(x1, y1, onehot)
        est['L_x'] = max(est['L_x'],
                         abs(fa - instance.value(x2, y1, onehot)) / dx)
        est['L_y'] = max(est['L_y'],
                         abs(fa - instance.value(x1, y2, onehot)) / dy)

        dgy = instance.value_grad_y(x1, y1, onehot) - \
            instance.value_grad_y(x2, y1, onehot)
        dgx = instance.value_grad_x(x1, y1, onehot) - \
            instance.value_grad_x(x1, y2, onehot)
        est['L_xy'] = max(est['L_xy'],
                          yg.dual_norm(dgy) / dx, xg.dual_norm(dgx) / dy)

    checks = []
    for name in ['sigma_x', 'sigma_y']:
        target = getattr(theory, name)
        checks.append({
            'name': name,
            'estimate': float(est[name]),
            'theory': target,
            'passed': bool(est[name] >= target * (1 - rtol) - 1e-10)
        })
    for name in ['L_x', 'L_y', 'L_xy']:
        target = getattr(theory, name)
        checks.append({
            'name': name,
            'estimate': float(est[name]),
            'theory': target,
            'passed': bool(est[name] <= target * (1 + rtol) + 1e-10)
        })
    checks.append({
        'name': 'assumption4',
        'estimate': theory.L_xy / max(min(theory.sigma_x, theory.sigma_y),
                                      1e-300),
        'theory': 1.,
        'passed': theory.assumption4_holds
    })
    verbose_print(f"Probed {n_probe} pairs of {instance!r}", verbose)

    return AssumptionReport({k: float(v) for (k, v) in est.items()}, theory,
                            checks, int(n_probe), seed)


def gradient_check(instance, n_points: int = 200, seed: int = 0,
                   step_size: float = FD_STEP, rtol: float = FD_RTOL):
    """
    Compare the closed-form per-atom gradients with central finite
    differences of the loss at random feasible points.

    Returns
    -------
    dict
        'max_rel_error_x', 'max_rel_error_y', 'n_points' and 'passed'.
    """
    rng = make_rng(seed)
    err_x = 0.
    err_y = 0.
    for ip in range(int(n_points)):
        x, y = instance.random_pair(rng)
        onehot = instance.onehot(int(rng.integers(instance.num_atoms)))
        gx_num = grad_num(lambda xx: instance.value(xx, y, onehot), x,
                          step_size)
        gy_num = grad_num(lambda yy: instance.value(x, yy, onehot), y,
                          step_size)
        err_x = max(err_x,
                    rel_error(gx_num, instance.value_grad_x(x, y, onehot)))
        err_y = max(err_y,
                    rel_error(gy_num, instance.value_grad_y(x, y, onehot)))
    return {
        'n_points': int(n_points),
        'max_rel_error_x': float(err_x),
        'max_rel_error_y': float(err_y),
        'passed': bool(err_x <= rtol and err_y <= rtol)
    }


def autograd_gradients(instance, x, y, weights):
    """
    Gradients of the weighted loss computed by automatic differentiation.
    Needs the 'autograd' backend.
    """
    if not AG_AVAILABLE or bd.__class__.__name__ != 'AutogradBackend':
        raise ValueError("autograd_gradients needs the 'autograd' backend, "
                         "see ssprisk.set_backend")
    weights = np.asarray(weights, dtype=np.float64)
    gx = grad(lambda xx: instance.value(xx, y, weights))(x)
    gy = grad(lambda yy: instance.value(x, yy, weights))(y)
    return np.asarray(gx), np.asarray(gy)
