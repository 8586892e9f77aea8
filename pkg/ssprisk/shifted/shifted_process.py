"""
Desk-scale checks of the localization argument behind the high-probability
excess-risk bound: the shifted Rademacher process, its exponential moment,
the deterministic excess-risk inequality and the best-response Lipschitz
and localization inequalities.
"""
import warnings
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool

import numpy as np
from scipy.special import logsumexp

from ssprisk.constants import (MIN_DRAWS, MAX_GRID_RESOLUTION, POP_INNER_TOL,
                               FEAS_TOL)
from ssprisk.geometry import TruncatedSimplex, simplex_grid
from ssprisk.solver import (SolverConfig, SaddlePair, solve_saddle,
                            best_response_x, best_response_y)
from ssprisk.risk import default_threads
from ssprisk.utils import check_seed, derive_seed, make_rng, log_mean_exp
from ssprisk.print_utils import update_prog, verbose_print

# Largest number of (x, y) grid pairs evaluated by the supremum search
MAX_GRID_PAIRS = 50_000_000


@dataclass
class ShiftedProcessConfig:
    """
    Configuration of the shifted-process checks.

    Parameters
    ----------
    instance : dict
        Matrix-game spec (d <= 3 recommended).
    n : int
        Sample size of the shifted process.
    draws : int
        Number M >= 100 of Rademacher vectors.
    resolution : float
        l1 spacing (<= 0.05) of the block grids of the supremum search.
    seed : int
    refine : bool
        Refine the best grid point by a local pattern search.
    penalty_scale : float
        Multiplier of the localization penalty.
    chain_n : int
        Sample size of the excess-risk inequality replications.
    chain_replications : int
    n_probe : int
        Number of probes of the localization inequalities.
    threads : int
    oracle : SolverConfig
        Population best-response solver.
    """
    instance: dict
    n: int = 64
    draws: int = 500
    resolution: float = 0.05
    seed: int = 0
    refine: bool = True
    penalty_scale: float = 1.
    chain_n: int = 16
    chain_replications: int = 100
    n_probe: int = 1000
    threads: int = field(default_factory=default_threads)
    oracle: SolverConfig = field(
        default_factory=lambda: SolverConfig(inner_tolerance=POP_INNER_TOL))

    def __post_init__(self):
        if not isinstance(self.draws, (int, np.integer)) or \
                self.draws < MIN_DRAWS:
            raise ValueError(f"'draws' must be an integer >= {MIN_DRAWS}, "
                             f"got {self.draws!r}")
        if not 0 < self.resolution <= MAX_GRID_RESOLUTION:
            raise ValueError("'resolution' must be in (0, "
                             f"{MAX_GRID_RESOLUTION}], got {self.resolution}")
        for name in ['n', 'chain_n', 'chain_replications', 'n_probe',
                     'threads']:
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise ValueError(f"'{name}' must be a positive integer, "
                                 f"got {val!r}")
        if not self.penalty_scale > 0:
            raise ValueError("'penalty_scale' must be positive")
        check_seed(self.seed)


class LocalizationConstants(object):
    """
    lam: exponent of the moment bound; C = 1 - L_xy / min(sigma);
    C_tilde = sqrt(2) (1 + L_xy / min(sigma)); L_tilde = 2 max(L) C_tilde.
    """
    def __init__(self, lam, C, C_tilde, L_tilde):
        self.lam = lam
        self.C = C
        self.C_tilde = C_tilde
        self.L_tilde = L_tilde

    def __repr__(self):
        return (f"LocalizationConstants(lam = {self.lam:.6g}, C = "
                f"{self.C:.6g}, C_tilde = {self.C_tilde:.6g}, L_tilde = "
                f"{self.L_tilde:.6g})")

    def as_dict(self):
        return {
            'lambda': self.lam,
            'C': self.C,
            'C_tilde': self.C_tilde,
            'L_tilde': self.L_tilde
        }


def localization_lambda(constants, n):
    """
    lam = max(sigma) C^2 n / (32 sqrt(2) e L_tilde^2) together with the
    localization constants C, C_tilde and L_tilde.

    Raises
    ------
    ValueError
        If L_xy > min(sigma_x, sigma_y), where C would be negative.
    """
    sig_min = min(constants.sigma_x, constants.sigma_y)
    sig_max = max(constants.sigma_x, constants.sigma_y)
    if sig_min <= 0 or constants.L_xy > sig_min:
        raise ValueError(
            f"L_xy = {constants.L_xy:.4g} exceeds min(sigma_x, sigma_y) = "
            f"{sig_min:.4g}: the localization constant is not positive")
    ratio = constants.L_xy / sig_min
    C = 1 - ratio
    C_tilde = np.sqrt(2) * (1 + ratio)
    L_tilde = 2 * max(constants.L_x, constants.L_y) * C_tilde
    lam = sig_max * C**2 * n / (32 * np.sqrt(2) * np.e * L_tilde**2)
    return LocalizationConstants(float(lam), float(C), float(C_tilde),
                                 float(L_tilde))


def log_moment_bound(dim):
    """log(e + e^{3d} + 12 e^{2048 (1 + e)^2 d / e})."""
    return float(
        logsumexp([
            1., 3. * dim,
            np.log(12) + 2048 * (1 + np.e)**2 * dim / np.e
        ]))


def signed_weights(sample_set, eps, num_atoms):
    """(1/n) sum_i eps_i delta_{xi_i} as a weight vector over the support."""
    eps = np.asarray(eps, dtype=np.float64).ravel()
    if eps.size != sample_set.n:
        raise ValueError(f"Got {eps.size} Rademacher signs for a sample of "
                         f"size {sample_set.n}")
    if not np.all(np.abs(eps) == 1):
        raise ValueError("Rademacher signs must be +1 or -1")
    return np.bincount(sample_set.indices, weights=eps,
                       minlength=num_atoms) / sample_set.n


def population_saddle(instance, oracle_config=None, polish_rounds=50):
    """
    Population saddle point (x*, y*), solved by mirror-prox and, when
    L_xy < min(sigma), polished by alternating best responses (a
    contraction with ratio L_xy / sigma).
    """
    oracle_config = SolverConfig(inner_tolerance=POP_INNER_TOL) \
        if oracle_config is None else oracle_config
    pop = instance.population()
    cfg = oracle_config.replace(gap_tolerance=1e-12)
    report = solve_saddle(pop, cfg)
    x, y = report.solution
    if instance.theoretical_constants().assumption4_holds:
        tight = oracle_config.replace(inner_tolerance=1e-11)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', UserWarning)
            for ir in range(polish_rounds):
                x_new = best_response_x(pop, y, tight, warm_start=x)
                y_new = best_response_y(pop, x_new, tight, warm_start=y)
                change = np.max(np.abs(x_new - x)) + np.max(np.abs(y_new - y))
                x, y = x_new, y_new
                if change < 1e-15:
                    break
    return SaddlePair(x, y)


class _Oracle(object):
    """
    Population best responses and penalty weights of an instance. Best
    responses to the blocks of `saddle` (if given) are read off the saddle
    point itself.
    """
    def __init__(self, instance, oracle_config, saddle=None,
                 penalty_scale=1.):
        self.instance = instance
        self.config = SolverConfig(inner_tolerance=POP_INNER_TOL) \
            if oracle_config is None else oracle_config
        self.pop = instance.population()
        self.saddle = saddle
        constants = instance.theoretical_constants()
        self.pen_x = penalty_scale * constants.sigma_x / 8
        self.pen_y = penalty_scale * constants.sigma_y / 8

    def br_x(self, y, warm_start=None):
        if self.saddle is not None and np.array_equal(y, self.saddle.y):
            return self.saddle.x
        return best_response_x(self.pop, y, self.config, warm_start)

    def br_y(self, x, warm_start=None):
        if self.saddle is not None and np.array_equal(x, self.saddle.x):
            return self.saddle.y
        return best_response_y(self.pop, x, self.config, warm_start)

    def value(self, x, y, weights, x_br=None, y_br=None):
        x_br = self.br_x(y) if x_br is None else x_br
        y_br = self.br_y(x) if y_br is None else y_br
        xg, yg = self.instance.x_geometry, self.instance.y_geometry
        linear = self.instance.value(x, y_br, weights) - \
            self.instance.value(x_br, y, weights)
        return float(linear - self.pen_y * yg.norm(y - y_br)**2 -
                     self.pen_x * xg.norm(x - x_br)**2)


def shifted_process_value(instance, pair, sample_set, eps, oracle_config=None,
                          saddle=None, penalty_scale=1.):
    """
    Value of the shifted Rademacher process at `pair`:

        (1/n) sum_i eps_i [F(x, y*(x), xi_i) - F(x*(y), y, xi_i)]
            - (sigma_y/8) ||y - y*(x)||^2 - (sigma_x/8) ||x - x*(y)||^2

    with population best responses.

    Parameters
    ----------
    instance : ProblemInstance
    pair : SaddlePair
    sample_set : SampleSet
    eps : array_like
        n Rademacher signs.
    oracle_config : SolverConfig, optional
    saddle : SaddlePair, optional
        Population saddle point; best responses to x* and y* are taken
        from it.
    penalty_scale : float, optional
    """
    x, y = pair
    instance.check_pair(x, y)
    weights = signed_weights(sample_set, eps, instance.num_atoms)
    oracle = _Oracle(instance, oracle_config, saddle, penalty_scale)
    return oracle.value(x, y, weights)


class ShiftedGrid(object):
    """
    Sample-independent part of the supremum search: block grids (with the
    population saddle point added), per-atom losses at the best responses
    and the penalty matrix. For signed weights c the process on the grid is

        values[i, j] = fx[i] . c - fy[j] . c - penalty[i, j]
    """
    def __init__(self, instance, resolution, oracle_config=None,
                 penalty_scale=1., saddle=None, verbose=False):
        xg, yg = instance.x_geometry, instance.y_geometry
        if not (isinstance(xg, TruncatedSimplex)
                and isinstance(yg, TruncatedSimplex)):
            raise ValueError("The supremum search needs truncated-simplex "
                             "blocks")
        self.instance = instance
        self.resolution = resolution
        if saddle is None:
            saddle = population_saddle(instance, oracle_config)
        self.oracle = _Oracle(instance, oracle_config, saddle, penalty_scale)

        xs = simplex_grid(xg.dim, xg.floor, resolution)
        ys = simplex_grid(yg.dim, yg.floor, resolution)
        if xs.shape[0] * ys.shape[0] > MAX_GRID_PAIRS:
            raise ValueError(f"Grid of {xs.shape[0]} x {ys.shape[0]} points "
                             f"at resolution {resolution} is too large")
        self.xs = np.vstack([xs, saddle.x])
        self.ys = np.vstack([ys, saddle.y])

        num_atoms = instance.num_atoms
        eye = np.eye(num_atoms)
        self.y_brs = np.zeros((self.xs.shape[0], yg.dim))
        self.x_brs = np.zeros((self.ys.shape[0], xg.dim))
        self.fx = np.zeros((self.xs.shape[0], num_atoms))
        self.fy = np.zeros((self.ys.shape[0], num_atoms))
        for (i, x) in enumerate(self.xs):
            y_br = self.oracle.br_y(x)
            self.y_brs[i] = y_br
            self.fx[i] = [instance.value(x, y_br, eye[k])
                          for k in range(num_atoms)]
            update_prog(i, self.xs.shape[0], verbose, "Grid x")
        for (j, y) in enumerate(self.ys):
            x_br = self.oracle.br_x(y)
            self.x_brs[j] = x_br
            self.fy[j] = [instance.value(x_br, y, eye[k])
                          for k in range(num_atoms)]
            update_prog(j, self.ys.shape[0], verbose, "Grid y")
        verbose_print("", verbose)

        # l1 distances between grid points and best responses
        dist_y = np.sum(np.abs(self.ys[np.newaxis, :, :] -
                               self.y_brs[:, np.newaxis, :]), axis=2)
        dist_x = np.sum(np.abs(self.xs[:, np.newaxis, :] -
                               self.x_brs[np.newaxis, :, :]), axis=2)
        self.penalty = self.oracle.pen_y * dist_y**2 + \
            self.oracle.pen_x * dist_x**2

    def __repr__(self):
        return (f"ShiftedGrid({self.xs.shape[0]} x {self.ys.shape[0]} points,"
                f" resolution = {self.resolution})")

    @property
    def saddle(self):
        return self.oracle.saddle

    def values(self, weights):
        return self.fx.dot(weights)[:, np.newaxis] - \
            self.fy.dot(weights)[np.newaxis, :] - self.penalty

    def maximize(self, weights):
        """Largest grid value and its indices (i, j)."""
        vals = self.values(weights)
        (i, j) = np.unravel_index(np.argmax(vals), vals.shape)
        return float(vals[i, j]), int(i), int(j)

    def refine(self, weights, i, j, max_evals=2000, min_step=1e-7):
        """
        Coordinate pattern search along e_k - e_l directions of both blocks,
        starting at grid point (i, j) with step resolution / 2.
        """
        xg = self.instance.x_geometry
        yg = self.instance.y_geometry
        oracle = self.oracle
        x, y = self.xs[i], self.ys[j]
        x_br, y_br = self.x_brs[j], self.y_brs[i]
        best = oracle.value(x, y, weights, x_br, y_br)

        dirs_x = _pair_directions(xg.dim)
        dirs_y = _pair_directions(yg.dim)
        step = self.resolution / 2
        n_evals = 0
        while step >= min_step and n_evals < max_evals:
            improved = False
            for (block, dirs) in [('x', dirs_x), ('y', dirs_y)]:
                for d in dirs:
                    if block == 'x':
                        cand = x + step * d
                        if not xg.contains(cand, FEAS_TOL):
                            continue
                        cand_br = oracle.br_y(cand, warm_start=y_br)
                        val = oracle.value(cand, y, weights, x_br, cand_br)
                    else:
                        cand = y + step * d
                        if not yg.contains(cand, FEAS_TOL):
                            continue
                        cand_br = oracle.br_x(cand, warm_start=x_br)
                        val = oracle.value(x, cand, weights, cand_br, y_br)
                    n_evals += 1
                    if val > best:
                        best = val
                        improved = True
                        if block == 'x':
                            x, y_br = cand, cand_br
                        else:
                            y, x_br = cand, cand_br
            if not improved:
                step /= 2
        return best, SaddlePair(x, y)


def _pair_directions(dim):
    dirs = []
    for k in range(dim):
        for l in range(dim):
            if k != l:
                d = np.zeros(dim)
                d[k], d[l] = 1., -1.
                dirs.append(d)
    return dirs


def sup_shifted_process(instance, sample_set, eps, resolution=0.05,
                        refine=True, oracle_config=None, penalty_scale=1.,
                        grid=None):
    """
    Supremum of the shifted process over X x Y, by maximization over a
    product grid refined by a local pattern search from the best grid point.
    The population saddle point belongs to the grid, where the process is
    exactly 0, so the returned value is nonnegative.

    Parameters
    ----------
    instance : MatrixGame
    sample_set : SampleSet
    eps : array_like
        n Rademacher signs.
    resolution : float, optional
        l1 spacing of the block grids.
    refine : bool, optional
    oracle_config : SolverConfig, optional
    penalty_scale : float, optional
    grid : ShiftedGrid, optional
        Precomputed grid, reused across draws.

    Returns
    -------
    value : float
    pair : SaddlePair
        The maximizing pair.
    """
    if grid is None:
        grid = ShiftedGrid(instance, resolution, oracle_config, penalty_scale)
    weights = signed_weights(sample_set, eps, instance.num_atoms)
    (value, i, j) = grid.maximize(weights)
    pair = SaddlePair(grid.xs[i], grid.ys[j])
    if refine:
        (value, pair) = grid.refine(weights, i, j)
    if not np.isfinite(value):
        raise ValueError("Non-finite supremum of the shifted process")
    return max(value, 0.), pair


def moment_check_draws(config, instance):
    """
    The sample and the (draws, n) array of Rademacher signs used by
    `exp_moment_check`, both derived from `config.seed`.
    """
    sample_set = instance.sample(config.n, derive_seed(config.seed, 0))
    rng = make_rng(derive_seed(config.seed, 1))
    signs = 2 * rng.integers(0, 2, size=(config.draws, config.n)) - 1
    return sample_set, signs


def exp_moment_check(config, instance=None, grid=None, verbose=False):
    """
    Monte-Carlo estimate of log E_eps exp(lam * sup shifted process) for one
    sample, compared with the bound log(e + e^{3d} + 12 e^{2048(1+e)^2 d/e}).

    Returns
    -------
    dict
        'lambda', 'log_mc_estimate', 'stderr' (bootstrap), 'log_bound',
        'draws', 'suprema' and 'passed'.
    """
    if instance is None:
        from ssprisk.problems import from_config
        instance = from_config(config.instance)
    loc = localization_lambda(instance.theoretical_constants(), config.n)
    if grid is None:
        grid = ShiftedGrid(instance, config.resolution, config.oracle,
                           config.penalty_scale, verbose=verbose)
    (sample_set, signs) = moment_check_draws(config, instance)

    sups = np.zeros(config.draws)
    for im in range(config.draws):
        (sups[im], _) = sup_shifted_process(instance, sample_set, signs[im],
                                            refine=config.refine, grid=grid)
        update_prog(im, config.draws, verbose, "Rademacher draws")
    verbose_print("", verbose)

    log_mc = log_mean_exp(loc.lam * sups)
    rng = make_rng(derive_seed(config.seed, 3))
    boot = np.zeros(200)
    for ib in range(boot.size):
        boot[ib] = log_mean_exp(
            loc.lam * sups[rng.integers(0, config.draws, config.draws)])
    dim = max(instance.x_geometry.dim, instance.y_geometry.dim)
    log_bound = log_moment_bound(dim)
    return {
        'lambda': loc.lam,
        'log_mc_estimate': log_mc,
        'stderr': float(np.std(boot)),
        'log_bound': log_bound,
        'draws': int(config.draws),
        'suprema': sups,
        'passed': bool(log_mc <= log_bound)
    }


def excess_risk_chain(instance, pair, sample_set, oracle_config=None,
                      sigma_scale=1.):
    """
    Both sides of the deterministic inequality satisfied by the empirical
    saddle point (x, y):

        F(x, y*(x)) - F(x*(y), y)
            <= 2 (P - P_n)(F(x, y*(x), .) - F(x*(y), y, .))
               - (3 sigma_y / 4) ||y - y*(x)||^2
               - (3 sigma_x / 4) ||x - x*(y)||^2

    Returns
    -------
    dict
        'lhs', 'rhs', 'penalty' and 'slack' = rhs - lhs.
    """
    oracle_config = SolverConfig(inner_tolerance=POP_INNER_TOL) \
        if oracle_config is None else oracle_config
    x, y = pair
    pop = instance.population()
    y_br = best_response_y(pop, x, oracle_config, warm_start=y)
    x_br = best_response_x(pop, y, oracle_config, warm_start=x)
    constants = instance.theoretical_constants()
    xg, yg = instance.x_geometry, instance.y_geometry

    diff = instance.probs - sample_set.weights(instance.num_atoms)
    lhs = pop.loss(x, y_br) - pop.loss(x_br, y)
    deviation = instance.value(x, y_br, diff) - instance.value(x_br, y, diff)
    penalty = sigma_scale * 0.75 * (constants.sigma_y * yg.norm(y - y_br)**2 +
                                    constants.sigma_x * xg.norm(x - x_br)**2)
    rhs = 2 * deviation - penalty
    return {
        'lhs': float(lhs),
        'rhs': float(rhs),
        'penalty': float(penalty),
        'slack': float(rhs - lhs)
    }


def check_excess_risk_chain(instance, n, seed, solver_config=None,
                            oracle_config=None, allowance=1e-6):
    """
    Draw a sample of size `n`, solve the empirical problem and evaluate
    excess_risk_chain at its solution.

    Returns
    -------
    dict
        The excess_risk_chain terms plus 'passed' (slack >= -allowance).
    """
    solver_config = SolverConfig(gap_tolerance=1e-11) \
        if solver_config is None else solver_config
    sample_set = instance.sample(n, seed)
    report = solve_saddle(instance.empirical(sample_set), solver_config)
    terms = excess_risk_chain(instance, report.solution, sample_set,
                              oracle_config)
    terms['passed'] = bool(terms['slack'] >= -allowance)
    terms['emp_gap'] = report.final_gap
    return terms


def excess_risk_chain_sweep(instance, n, seeds, solver_config=None,
                            oracle_config=None, allowance=1e-6, threads=1,
                            verbose=False):
    """
    check_excess_risk_chain for every seed of `seeds`, over `threads`
    worker processes. Results are returned in the order of `seeds`.
    """
    worker = partial(_chain_task, instance, n, solver_config, oracle_config,
                     allowance)
    results = []

    def collect(iterator):
        for (ik, terms) in enumerate(iterator):
            results.append(terms)
            update_prog(ik, len(seeds), verbose, "Excess-risk inequality")

    if threads == 1:
        collect(map(worker, seeds))
    else:
        with Pool(processes=threads) as pool:
            collect(pool.imap(worker, seeds))
    verbose_print("", verbose)
    return results


def _chain_task(instance, n, solver_config, oracle_config, allowance, seed):
    return check_excess_risk_chain(instance, n, seed, solver_config,
                                   oracle_config, allowance)


def check_localization(instance, n_probe=1000, seed=0, oracle_config=None,
                       saddle=None, allowance=1e-6, verbose=False):
    """
    On random feasible pairs (x, y), check the best-response Lipschitz
    inequalities

        ||x*(y) - x*|| <= (L_xy / sigma_x) ||y - y*||
        ||y*(x) - y*|| <= (L_xy / sigma_y) ||x - x*||

    and the localization inequality, with C = 1 - L_xy / min(sigma),

        (C^2 / 2) (||x - x*|| + ||y - y*||)^2
            <= ||x - x*(y)||^2 + ||y - y*(x)||^2

    Returns
    -------
    dict
        Inequality name -> {'worst_slack', 'passed'}.
    """
    constants = instance.theoretical_constants()
    if not constants.assumption4_holds:
        raise ValueError("The localization inequalities need "
                         "L_xy < min(sigma_x, sigma_y)")
    if saddle is None:
        saddle = population_saddle(instance, oracle_config)
    oracle = _Oracle(instance, oracle_config, saddle)
    xs, ys = saddle
    xg, yg = instance.x_geometry, instance.y_geometry
    C = 1 - constants.L_xy / min(constants.sigma_x, constants.sigma_y)

    rng = make_rng(seed)
    worst = {'best_response_lipschitz_x': np.inf,
             'best_response_lipschitz_y': np.inf,
             'localization': np.inf}
    for ip in range(int(n_probe)):
        x, y = instance.random_pair(rng)
        x_br = oracle.br_x(y, warm_start=xs)
        y_br = oracle.br_y(x, warm_start=ys)
        dx, dy = xg.norm(x - xs), yg.norm(y - ys)
        worst['best_response_lipschitz_x'] = min(
            worst['best_response_lipschitz_x'],
            constants.L_xy / constants.sigma_x * dy - xg.norm(x_br - xs))
        worst['best_response_lipschitz_y'] = min(
            worst['best_response_lipschitz_y'],
            constants.L_xy / constants.sigma_y * dx - yg.norm(y_br - ys))
        worst['localization'] = min(
            worst['localization'],
            xg.norm(x - x_br)**2 + yg.norm(y - y_br)**2 -
            C**2 / 2 * (dx + dy)**2)
        update_prog(ip, n_probe, verbose, "Localization probes")
    verbose_print("", verbose)
    return {
        name: {
            'worst_slack': float(slack),
            'passed': bool(slack >= -allowance)
        }
        for (name, slack) in worst.items()
    }


def grid_refinement_gap(instance, sample_set, eps, resolution=0.05,
                        factor=10, refine=True, oracle_config=None):
    """
    |sup at `resolution` - sup at `resolution / factor`|, sharing the
    population saddle point between the two searches.
    """
    coarse = ShiftedGrid(instance, resolution, oracle_config)
    fine = ShiftedGrid(instance, resolution / factor, oracle_config,
                       saddle=coarse.saddle)
    (v_coarse, _) = sup_shifted_process(instance, sample_set, eps,
                                        refine=refine, grid=coarse)
    (v_fine, _) = sup_shifted_process(instance, sample_set, eps,
                                      refine=refine, grid=fine)
    return abs(v_coarse - v_fine)
