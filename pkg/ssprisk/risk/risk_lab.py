"""
Monte-Carlo study of the strong excess risk of empirical saddle points:
draw a sample, solve the empirical problem, measure the population duality
gap of its solution, and fit the decay of the high-probability quantile of
the risk in the sample size.
"""
import os
import time
import warnings
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool

import numpy as np
from scipy.stats import linregress

from ssprisk.constants import RISK_FLOOR, POP_INNER_TOL
from ssprisk.solver import (SolverConfig, solve_saddle, best_response_x,
                            best_response_y)
from ssprisk.utils import check_seed, derive_seed, order_statistic
from ssprisk.print_utils import update_prog, verbose_print


def default_threads():
    """Worker count: the SSP_THREADS environment variable, else the number
    of CPUs."""
    env = os.environ.get('SSP_THREADS')
    if env is not None:
        try:
            threads = int(env)
        except ValueError:
            raise ValueError(f"SSP_THREADS must be a positive integer, got "
                             f"'{env}'")
        if threads < 1:
            raise ValueError(f"SSP_THREADS must be a positive integer, got "
                             f"'{env}'")
        return threads
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    """
    Configuration of a rate experiment.

    Parameters
    ----------
    instance : dict
        Instance spec, see ssprisk.problems.from_config.
    n_grid : list of int
        Strictly increasing sample sizes, each >= 2.
    replications : int
        Number R of replications per sample size.
    delta : float
        Confidence level in (0, 1); the (1 - delta)-quantile is fitted.
    master_seed : int
    solver : SolverConfig
        Solver of the empirical problems.
    oracle : SolverConfig
        Solver of the population best responses.
    threads : int
        Number of worker processes.
    timing : bool
        Record wall times (otherwise 0, so that outputs are reproducible).
    """
    instance: dict
    n_grid: list
    replications: int
    delta: float = 0.05
    master_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    oracle: SolverConfig = field(
        default_factory=lambda: SolverConfig(inner_tolerance=POP_INNER_TOL))
    threads: int = field(default_factory=default_threads)
    timing: bool = False

    def __post_init__(self):
        if len(self.n_grid) == 0:
            raise ValueError("'n_grid' must not be empty")
        for n in self.n_grid:
            if not isinstance(n, (int, np.integer)) or n < 2:
                raise ValueError(f"'n_grid' entries must be integers >= 2, "
                                 f"got {n!r}")
        if any(b <= a for (a, b) in zip(self.n_grid[:-1], self.n_grid[1:])):
            raise ValueError("'n_grid' must be strictly increasing")
        if not isinstance(self.replications, (int, np.integer)) or \
                self.replications < 1:
            raise ValueError("'replications' must be a positive integer")
        if not 0 < self.delta < 1:
            raise ValueError(f"'delta' must be in (0, 1), got {self.delta}")
        if self.delta <= 0.1 and self.replications < 20:
            raise ValueError("At least 20 replications are needed for "
                             f"delta = {self.delta} <= 0.1")
        if not isinstance(self.threads, (int, np.integer)) or \
                self.threads < 1:
            raise ValueError("'threads' must be a positive integer")
        check_seed(self.master_seed, 'master_seed')


class RiskRecord(object):
    """
    One replication: sample size, replication index, seed, strong excess
    risk of the empirical solution, certified empirical duality gap, oracle
    error bound and wall time in milliseconds.
    """
    fields = ['n', 'rep', 'seed', 'risk', 'emp_gap', 'oracle_gap', 'wall_ms']

    def __init__(self, n, rep, seed, risk, emp_gap, oracle_gap, wall_ms=0.,
                 converged=True):
        self.n = int(n)
        self.rep = int(rep)
        self.seed = int(seed)
        self.risk = float(risk)
        self.emp_gap = float(emp_gap)
        self.oracle_gap = float(oracle_gap)
        self.wall_ms = float(wall_ms)
        self.converged = bool(converged)

    def __repr__(self):
        return (f"RiskRecord(n = {self.n}, rep = {self.rep}, "
                f"risk = {self.risk:.4e}, converged = {self.converged})")

    def __eq__(self, other):
        return isinstance(other, RiskRecord) and \
            self.as_tuple() == other.as_tuple()

    def as_tuple(self):
        return tuple(getattr(self, f) for f in self.fields) + \
            (self.converged, )


class QuantileCurve(object):
    """
    Per-n (1 - delta)-quantile, mean and median of the risks. `rows` is a
    list of dicts with keys 'n', 'q', 'mean' and 'median'.
    """
    def __init__(self, rows, delta, replications):
        self.rows = rows
        self.delta = delta
        self.replications = replications

    def __repr__(self):
        return (f"QuantileCurve(delta = {self.delta}, "
                f"n = {[row['n'] for row in self.rows]})")

    @property
    def ns(self):
        return np.array([row['n'] for row in self.rows], dtype=np.float64)

    @property
    def quantiles(self):
        return np.array([row['q'] for row in self.rows])

    @property
    def means(self):
        return np.array([row['mean'] for row in self.rows])


class RateFit(object):
    """
    Log-log least-squares fit log(q) = intercept + slope * log(n).
    """
    def __init__(self, slope, intercept, r2, residuals, ns, values):
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.r2 = float(r2)
        self.residuals = np.asarray(residuals)
        self.ns = np.asarray(ns)
        self.values = np.asarray(values)

    def __repr__(self):
        return (f"RateFit(slope = {self.slope:.4f}, "
                f"intercept = {self.intercept:.4f}, r2 = {self.r2:.4f})")

    @property
    def residual_rms(self):
        return float(np.sqrt(np.mean(self.residuals**2)))

    def as_dict(self):
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'r2': self.r2,
            'residual_rms': self.residual_rms,
            'quantiles': [{
                'n': int(n),
                'q': float(q)
            } for (n, q) in zip(self.ns, self.values)]
        }


class ExperimentResult(object):
    """Records, quantile curve and rate fits of run_experiment. The fits are
    None when the grid has fewer than 4 sample sizes."""
    def __init__(self, records, curve, fit, mean_fit):
        self.records = records
        self.curve = curve
        self.fit = fit
        self.mean_fit = mean_fit

    def __repr__(self):
        return (f"ExperimentResult({len(self.records)} records, "
                f"fit = {self.fit!r})")


def strong_excess_risk(instance, pair, oracle_config=None, info=False):
    """
    Strong excess risk F(x, y*(x)) - F(x*(y), y) of `pair` for the
    population objective of `instance`, with best responses warm-started at
    the pair.

    Parameters
    ----------
    instance : ProblemInstance
    pair : SaddlePair
    oracle_config : SolverConfig, optional
        Defaults to inner_tolerance = POP_INNER_TOL.
    info : bool, optional
        If True, return (risk, slack) with slack the sum of the certified
        best-response optimality bounds.
    """
    if oracle_config is None:
        oracle_config = SolverConfig(inner_tolerance=POP_INNER_TOL)
    x, y = pair
    instance.check_pair(x, y)
    pop = instance.population()
    y_br, info_y = best_response_y(pop, x, oracle_config, warm_start=y,
                                   info=True)
    x_br, info_x = best_response_x(pop, y, oracle_config, warm_start=x,
                                   info=True)
    risk = pop.loss(x, y_br) - pop.loss(x_br, y)
    if risk < -RISK_FLOOR:
        raise ValueError(f"Negative strong excess risk {risk:.3e}: the "
                         "population oracle failed")
    slack = info_x['gap_bound'] + info_y['gap_bound']
    return (risk, slack) if info else risk


def run_replication(instance, n, seed, solver_config=None, oracle_config=None,
                    rep=0, timing=False, max_tightening=3):
    """
    Sample `n` atoms with `seed`, solve the empirical problem and measure
    the strong excess risk of its solution.

    The oracle tolerance is divided by 10 (at most `max_tightening` times)
    while the certified oracle error is not two orders of magnitude below the
    measured risk.

    Returns
    -------
    RiskRecord
    """
    solver_config = SolverConfig() if solver_config is None \
        else solver_config
    if oracle_config is None:
        oracle_config = SolverConfig(inner_tolerance=POP_INNER_TOL)

    t_start = time.time()
    sample_set = instance.sample(n, seed)
    report = solve_saddle(instance.empirical(sample_set), solver_config)

    cfg = oracle_config
    for attempt in range(max_tightening + 1):
        (risk, slack) = strong_excess_risk(instance, report.solution, cfg,
                                           info=True)
        if not (0 < risk < 100 * slack) or attempt == max_tightening:
            break
        cfg = cfg.replace(inner_tolerance=cfg.inner_tolerance / 10)
        warnings.warn(
            f"Oracle error bound {slack:.2e} is not negligible against the "
            f"risk {risk:.2e} (n = {n}, seed = {seed}); tightening the "
            f"oracle tolerance to {cfg.inner_tolerance:.1e}", UserWarning)

    wall_ms = 1000 * (time.time() - t_start) if timing else 0.
    return RiskRecord(n, rep, seed, risk, report.final_gap, slack,
                      wall_ms, report.converged)


def risk_quantile(risks, delta):
    """The ceil((1 - delta) R)-th order statistic of R risks."""
    risks = np.asarray(risks, dtype=np.float64)
    k = int(np.ceil((1 - delta) * risks.size - 1e-9))
    return order_statistic(risks, min(max(k, 1), risks.size))


def _group_risks(records, n_grid, replications):
    table = {(rec.n, rec.rep): rec.risk for rec in records}
    holes = [(n, rep) for n in n_grid for rep in range(replications)
             if (n, rep) not in table]
    if holes:
        raise ValueError(f"Missing replications (n, rep): {holes}")
    return {
        n: np.array([table[(n, rep)] for rep in range(replications)])
        for n in n_grid
    }


def quantile_curve(records, n_grid, replications, delta):
    """
    (1 - delta)-quantile, mean and median of the strong excess risk for
    each sample size of `n_grid`.

    Raises
    ------
    ValueError
        If any (n, rep) pair of the grid has no record.
    """
    grouped = _group_risks(records, n_grid, replications)
    rows = []
    for n in n_grid:
        risks = grouped[n]
        rows.append({
            'n': int(n),
            'q': risk_quantile(risks, delta),
            'mean': float(np.mean(risks)),
            'median': float(np.median(risks))
        })
    return QuantileCurve(rows, delta, replications)


def fit_rate(curve, values=None):
    """
    Least-squares fit of log(quantile) on log(n).

    Parameters
    ----------
    curve : QuantileCurve
    values : np.ndarray, optional
        Values to fit instead of the quantiles (e.g. curve.means).

    Returns
    -------
    RateFit
    """
    ns = curve.ns
    values = curve.quantiles if values is None else np.asarray(values)
    if ns.size < 4:
        raise ValueError(f"Rate fit needs at least 4 sample sizes, got "
                         f"{ns.size}")
    if np.any(values <= 0):
        raise ValueError("Rate fit needs positive quantiles; tighten the "
                         "oracle tolerance")
    logn, logq = np.log(ns), np.log(values)
    res = linregress(logn, logq)
    residuals = logq - (res.intercept + res.slope * logn)
    return RateFit(res.slope, res.intercept, res.rvalue**2, residuals, ns,
                   values)


def delta_ratio(records, n, delta_small=0.01, delta_large=0.2):
    """
    Ratio quantile(delta_small) / quantile(delta_large) of the risks at
    sample size `n`.
    """
    risks = [rec.risk for rec in records if rec.n == n]
    if len(risks) == 0:
        raise ValueError(f"No records for n = {n}")
    q_large = risk_quantile(risks, delta_large)
    if q_large <= 0:
        raise ValueError("delta_ratio needs a positive reference quantile")
    return risk_quantile(risks, delta_small) / q_large


def _replication_task(instance, solver_config, oracle_config, timing, task):
    (n, rep, seed) = task
    return run_replication(instance, n, seed, solver_config, oracle_config,
                           rep=rep, timing=timing)


def replication_tasks(config):
    """(n, rep, seed) of every replication, seeds derived from
    (master_seed, n, rep)."""
    return [(n, rep, derive_seed(config.master_seed, n, rep))
            for n in config.n_grid for rep in range(config.replications)]


def run_experiment(config, instance=None, verbose=False, on_record=None):
    """
    Run all replications of `config` (in parallel over `config.threads`
    processes), then compute the quantile curve and the rate fits.

    Parameters
    ----------
    config : ExperimentConfig
    instance : ProblemInstance, optional
        Built from `config.instance` if None.
    verbose : bool, optional
    on_record : callable, optional
        Called with every RiskRecord in (n, rep) order as soon as it is
        available.

    Returns
    -------
    ExperimentResult
    """
    if instance is None:
        from ssprisk.problems import from_config
        instance = from_config(config.instance)
    tasks = replication_tasks(config)
    worker = partial(_replication_task, instance, config.solver,
                     config.oracle, config.timing)

    records = []

    def collect(results):
        for (ik, rec) in enumerate(results):
            records.append(rec)
            if on_record is not None:
                on_record(rec)
            update_prog(ik, len(tasks), verbose, "Replications")

    if config.threads == 1:
        collect(map(worker, tasks))
    else:
        chunksize = max(1, len(tasks) // (4 * config.threads))
        with Pool(processes=config.threads) as pool:
            collect(pool.imap(worker, tasks, chunksize=chunksize))
    verbose_print("", verbose)

    curve = quantile_curve(records, config.n_grid, config.replications,
                           config.delta)
    fit, mean_fit = None, None
    if len(config.n_grid) >= 4:
        try:
            fit = fit_rate(curve)
            mean_fit = fit_rate(curve, curve.means)
        except ValueError as err:
            warnings.warn(f"No rate fit: {err}", UserWarning)
    return ExperimentResult(records, curve, fit, mean_fit)
