import warnings
from dataclasses import dataclass, asdict
from typing import Union

import numpy as np

from ssprisk.constants import FEAS_TOL, GAP_CLAMP, GAP_INNER_TOL
from ssprisk.print_utils import verbose_print


@dataclass
class SolverConfig:
    """
    Parameters of the mirror-prox solver and of the best-response loops.

    Parameters
    ----------
    step_size : float or 'auto'
        Mirror-prox step; 'auto' uses 1 / (2 L_total) with L_total the
        largest block smoothness plus the cross smoothness.
    max_iters : int
        Maximum number of mirror-prox iterations.
    gap_tolerance : float
        The solver stops once the duality gap is below this value.
    inner_tolerance : float
        Best responses stop when the prox-gradient mapping norm is below
        inner_tolerance * sigma of the block.
    inner_max_iters : int
        Iteration budget of each best-response loop.
    averaging : {'last', 'ergodic'}
        Whether the last iterate or the average of the extrapolated points
        is returned.
    gap_every : int
        The duality gap is certified every `gap_every` iterations.
    """
    step_size: Union[float, str] = 'auto'
    max_iters: int = 10000
    gap_tolerance: float = 1e-8
    inner_tolerance: float = GAP_INNER_TOL
    inner_max_iters: int = 20000
    averaging: str = 'last'
    gap_every: int = 10

    def __post_init__(self):
        if self.step_size != 'auto' and not (
                isinstance(self.step_size, (int, float))
                and self.step_size > 0):
            raise ValueError("'step_size' must be a positive number or "
                             f"'auto', got {self.step_size!r}")
        for name in ['max_iters', 'inner_max_iters', 'gap_every']:
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise ValueError(f"'{name}' must be a positive integer, "
                                 f"got {val!r}")
        for name in ['gap_tolerance', 'inner_tolerance']:
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and val > 0):
                raise ValueError(f"'{name}' must be positive, got {val!r}")
        if self.averaging not in ['last', 'ergodic']:
            raise ValueError("'averaging' must be 'last' or 'ergodic', got "
                             f"{self.averaging!r}")

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"Unknown solver field(s) {sorted(unknown)}")
        return cls(**d)

    def replace(self, **kwargs):
        """Copy of the config with some fields changed."""
        d = asdict(self)
        d.update(kwargs)
        return SolverConfig(**d)

    def as_dict(self):
        return asdict(self)


class SaddlePair(object):
    """
    A candidate saddle point (x, y).
    """
    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)

    def __repr__(self):
        return f"SaddlePair(x = {self.x}, y = {self.y})"

    def __iter__(self):
        return iter((self.x, self.y))

    def is_feasible(self, x_geometry, y_geometry, tol=FEAS_TOL):
        return x_geometry.contains(self.x, tol) and \
            y_geometry.contains(self.y, tol)

    def as_dict(self):
        return {'x': self.x.tolist(), 'y': self.y.tolist()}


class SolveReport(object):
    """
    Result of solve_saddle.

    Attributes
    ----------
    solution : SaddlePair
    final_gap : float
        Last certified duality gap.
    iterations : int
    gap_trace : list of float
        Duality gaps, certified at the iterations in `gap_iters`.
    gap_iters : list of int
    converged : bool
        Whether final_gap <= gap_tolerance.
    """
    def __init__(self, solution, final_gap, iterations, gap_trace, gap_iters,
                 converged):
        self.solution = solution
        self.final_gap = final_gap
        self.iterations = iterations
        self.gap_trace = gap_trace
        self.gap_iters = gap_iters
        self.converged = converged

    def __repr__(self):
        return (f"SolveReport(final_gap = {self.final_gap:.4e}, "
                f"iterations = {self.iterations}, "
                f"converged = {self.converged})")

    def as_dict(self):
        return {
            'x': self.solution.x.tolist(),
            'y': self.solution.y.tolist(),
            'final_gap': self.final_gap,
            'iterations': self.iterations,
            'gap_trace': list(self.gap_trace),
            'gap_iters': list(self.gap_iters),
            'converged': self.converged
        }


def _best_response(objective, other, config, warm_start, block):
    """
    Prox-gradient loop on one block with the other block frozen. The loop
    keeps the iterate with the best objective value, starting from the warm
    start, so that a best response never does worse than the warm start.
    """
    config = SolverConfig() if config is None else config
    Lxx, Lyy, _ = objective.smoothness
    if block == 'x':
        geom = objective.x_geometry
        sigma = objective.sigma[0]
        eta = 1. / max(Lxx, 1e-12)

        def value(v):
            return objective.loss(v, other)

        def descent(v):
            return objective.grad_x(v, other)
    else:
        geom = objective.y_geometry
        sigma = objective.sigma[1]
        eta = 1. / max(Lyy, 1e-12)

        def value(v):
            return -objective.loss(other, v)

        def descent(v):
            return -objective.grad_y(other, v)

    # Without curvature the tolerance is taken in absolute terms
    thresh = config.inner_tolerance * sigma if sigma > 0 \
        else config.inner_tolerance
    v = geom.center() if warm_start is None else geom.project(warm_start)
    best, best_val = v, value(v)
    mapping = np.inf
    converged = False
    it = 0
    for it in range(1, config.inner_max_iters + 1):
        v_new = geom.prox_step(v, descent(v), eta)
        mapping = geom.norm(v - v_new) / eta
        val = value(v_new)
        if val <= best_val:
            best, best_val = v_new, val
        v = v_new
        if mapping <= thresh:
            converged = True
            break

    if not converged:
        warnings.warn(
            f"Best response in block '{block}' stopped after "
            f"{config.inner_max_iters} iterations with prox-gradient "
            f"mapping norm {mapping:.3e} > {thresh:.3e}", UserWarning)

    bound = mapping**2 / (2 * sigma) if sigma > 0 else np.inf
    info = {
        'iterations': it,
        'mapping_norm': float(mapping),
        'converged': converged,
        'gap_bound': float(bound)
    }
    return best, info


def best_response_x(objective, y, config=None, warm_start=None, info=False):
    """
    x*(y) = argmin_x F(x, y) by a prox-gradient loop in the x geometry.

    Parameters
    ----------
    objective : SaddleObjective
    y : np.ndarray
        Frozen y block.
    config : SolverConfig, optional
        Uses `inner_tolerance` and `inner_max_iters`.
    warm_start : np.ndarray, optional
        Starting point; the center of the domain if None.
    info : bool, optional
        If True, also return a dict with 'iterations', 'mapping_norm',
        'converged' and 'gap_bound'.
    """
    (x, res) = _best_response(objective, y, config, warm_start, 'x')
    return (x, res) if info else x


def best_response_y(objective, x, config=None, warm_start=None, info=False):
    """
    y*(x) = argmax_y F(x, y); see best_response_x.
    """
    (y, res) = _best_response(objective, x, config, warm_start, 'y')
    return (y, res) if info else y


def duality_gap(objective, pair, config=None, info=False):
    """
    F(x, y*(x)) - F(x*(y), y) of the candidate `pair`, with best responses
    warm-started at the pair.

    Parameters
    ----------
    objective : SaddleObjective
    pair : SaddlePair
    config : SolverConfig, optional
    info : bool, optional
        If True, return (gap, x*(y), y*(x)).
    """
    x, y = pair
    y_br = best_response_y(objective, x, config, warm_start=y)
    x_br = best_response_x(objective, y, config, warm_start=x)
    gap = objective.loss(x, y_br) - objective.loss(x_br, y)
    if gap < 0:
        if gap < -GAP_CLAMP:
            raise ValueError(f"Negative duality gap {gap:.3e}: the best "
                             "response subsolver failed")
        gap = 0.
    return (gap, x_br, y_br) if info else gap


def kkt_residual(objective, pair):
    """
    Prox-gradient mapping norms (r_x, r_y) of both blocks at `pair`, with
    steps 1 / L_block. Both vanish exactly at the saddle point.
    """
    x, y = pair
    Lxx, Lyy, _ = objective.smoothness
    eta_x = 1. / max(Lxx, 1e-12)
    eta_y = 1. / max(Lyy, 1e-12)
    xg, yg = objective.x_geometry, objective.y_geometry
    x_new = xg.prox_step(x, objective.grad_x(x, y), eta_x)
    y_new = yg.prox_step(y, -objective.grad_y(x, y), eta_y)
    return (xg.norm(x - x_new) / eta_x, yg.norm(y - y_new) / eta_y)


def solve_saddle(objective, config=None, init=None, verbose=False,
                 callback=None):
    """
    Solve min_x max_y F(x, y) by mirror-prox (extragradient with prox steps
    in each block geometry), certifying the duality gap every
    `config.gap_every` iterations.

    Parameters
    ----------
    objective : SaddleObjective
    config : SolverConfig, optional
    init : SaddlePair, optional
        Starting point; the centers of the domains if None.
    verbose : bool, optional
        Print the certified gaps.
    callback : callable, optional
        Called as callback(iteration, x, y) after every iteration.

    Returns
    -------
    SolveReport
        Non-convergence is reported by `converged = False`.
    """
    config = SolverConfig() if config is None else config
    xg, yg = objective.x_geometry, objective.y_geometry
    if config.step_size == 'auto':
        Lxx, Lyy, Lxy = objective.smoothness
        eta = 1. / (2 * max(max(Lxx, Lyy) + Lxy, 1e-12))
    else:
        eta = float(config.step_size)

    if init is None:
        x, y = xg.center(), yg.center()
    else:
        x, y = xg.project(init.x), yg.project(init.y)
    x_avg = np.zeros(x.shape)
    y_avg = np.zeros(y.shape)

    gap_trace = []
    gap_iters = []
    gap = np.inf
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        # Extrapolation
        xh = xg.prox_step(x, objective.grad_x(x, y), eta)
        yh = yg.prox_step(y, -objective.grad_y(x, y), eta)
        # Update
        x = xg.prox_step(x, objective.grad_x(xh, yh), eta)
        y = yg.prox_step(y, -objective.grad_y(xh, yh), eta)

        if config.averaging == 'ergodic':
            x_avg += (xh - x_avg) / it
            y_avg += (yh - y_avg) / it
        if callback is not None:
            callback(it, x, y)

        if it % config.gap_every == 0 or it == config.max_iters:
            if config.averaging == 'ergodic':
                cand = SaddlePair(x_avg.copy(), y_avg.copy())
            else:
                cand = SaddlePair(x, y)
            gap = duality_gap(objective, cand, config)
            gap_trace.append(gap)
            gap_iters.append(it)
            verbose_print(f"Iteration {it:6d} | duality gap {gap:.4e}",
                          verbose)
            if gap <= config.gap_tolerance:
                converged = True
                break

    solution = cand
    return SolveReport(solution, float(gap), it, gap_trace, gap_iters,
                       converged)
