"""
Command-line interface:

    ssprisk solve      --config solve.json      --out results/
    ssprisk experiment --config experiment.json --out results/
    ssprisk verify     --config verify.json     --out results/
    ssprisk shifted    --config shifted.json    --out results/

Exit codes: 0 success, 1 configuration error, 2 non-convergence or failed
run, 3 failed check.
"""
import argparse
import os
import sys
import traceback

from ssprisk.config import ConfigError, load_config
from ssprisk.output import (RunManifest, RecordWriter, write_json,
                            write_table)
from ssprisk.print_backend import print_backend, set_print_backend
from ssprisk.print_utils import verbose_print
from ssprisk.problems import from_config, verify_assumptions, gradient_check
from ssprisk.solver import solve_saddle
from ssprisk.risk import run_experiment, delta_ratio
from ssprisk.shifted import (ShiftedGrid, localization_lambda,
                             exp_moment_check, excess_risk_chain_sweep,
                             check_localization, grid_refinement_gap,
                             moment_check_draws)
from ssprisk.utils import derive_seed

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_CHECK_FAILED = 3

REFINEMENT_TOL = 1e-3


def _load(path, kind):
    """Config, raw data and instance; raises ConfigError."""
    config, data = load_config(path, kind)
    try:
        instance = from_config(config.instance)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"Invalid instance: {err}", path)
    return config, data, instance


def _report_error(err):
    print(f"error: {err}", file=sys.stderr)


def cmd_solve(config_path, out_dir, verbose=True):
    """Solve the population or empirical problem of a config."""
    try:
        config, data, instance = _load(config_path, 'solve')
    except ConfigError as err:
        _report_error(err)
        return EXIT_CONFIG
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest('solve', data, config.seed,
                           {'problem': config.problem,
                            'solver': config.solver.as_dict()})

    if config.problem == 'population':
        objective = instance.population()
    else:
        objective = instance.empirical(instance.sample(config.n, config.seed))
    report = solve_saddle(objective, config.solver)
    if verbose:
        print_backend.solve_report(report)

    result = report.as_dict()
    result['problem'] = config.problem
    result['instance'] = repr(instance)
    write_json(os.path.join(out_dir, 'solution.json'), result)
    code = EXIT_OK if report.converged else EXIT_NOT_CONVERGED
    manifest.write(out_dir, code)
    return code


def _rate_fit_report(result, config):
    fit = result.fit
    if fit is not None:
        report = fit.as_dict()
    else:
        report = {
            'slope': None,
            'intercept': None,
            'r2': None,
            'residual_rms': None,
            'quantiles': [{
                'n': row['n'],
                'q': row['q']
            } for row in result.curve.rows]
        }
    report['delta'] = config.delta
    report['replications'] = config.replications
    report['rows'] = result.curve.rows
    report['mean_fit'] = None if result.mean_fit is None \
        else result.mean_fit.as_dict()

    n_ref = 1024 if 1024 in config.n_grid else \
        config.n_grid[len(config.n_grid) // 2]
    try:
        ratio = delta_ratio(result.records, n_ref)
    except ValueError:
        ratio = None
    report['delta_ratio'] = {'n': n_ref, 'delta_small': 0.01,
                             'delta_large': 0.2, 'value': ratio}
    return report


def cmd_experiment(config_path, out_dir, verbose=True):
    """Run a rate experiment: records CSV and rate-fit JSON."""
    try:
        config, data, instance = _load(config_path, 'experiment')
    except ConfigError as err:
        _report_error(err)
        return EXIT_CONFIG
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest('experiment', data, config.master_seed,
                           {'n_grid': list(config.n_grid),
                            'replications': config.replications,
                            'delta': config.delta,
                            'threads': config.threads})

    writer = RecordWriter(os.path.join(out_dir, 'records.csv'))
    try:
        result = run_experiment(config, instance, verbose,
                                on_record=writer.write)
    except Exception as err:
        writer.close(success=False)
        _report_error(f"experiment failed: {err}")
        verbose_print(traceback.format_exc(), verbose)
        manifest.write(out_dir, EXIT_NOT_CONVERGED)
        return EXIT_NOT_CONVERGED
    writer.close(success=True)

    write_json(os.path.join(out_dir, 'rate_fit.json'),
               _rate_fit_report(result, config))
    if verbose:
        print_backend.experiment_report(result.curve, result.fit)

    converged = all(rec.converged for rec in result.records)
    if not converged:
        _report_error("some empirical problems did not reach the gap "
                      "tolerance")
    code = EXIT_OK if converged else EXIT_NOT_CONVERGED
    manifest.write(out_dir, code)
    return code


def cmd_verify(config_path, out_dir, verbose=True):
    """Probe the constants of an instance and check its gradients."""
    try:
        config, data, instance = _load(config_path, 'verify')
    except ConfigError as err:
        _report_error(err)
        return EXIT_CONFIG
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest('verify', data, config.seed,
                           {'n_probe': config.n_probe,
                            'gradient_points': config.gradient_points})
    try:
        report = verify_assumptions(instance, config.n_probe, config.seed,
                                    config.rtol)
    except ValueError as err:
        _report_error(err)
        manifest.write(out_dir, EXIT_CONFIG)
        return EXIT_CONFIG
    grads = gradient_check(instance, config.gradient_points, config.seed)

    if verbose:
        print_backend.assumption_report(report)
        status = 'ok' if grads['passed'] else 'FAIL'
        print(f"  gradient check: max relative error "
              f"{max(grads['max_rel_error_x'], grads['max_rel_error_y']):.3e}"
              f"  {status}")
    failures = report.failures + ([] if grads['passed'] else ['gradients'])
    for name in failures:
        _report_error(f"check failed: {name}")

    result = report.as_dict()
    result['gradient_check'] = grads
    result['failures'] = failures
    write_json(os.path.join(out_dir, 'verify.json'), result)
    code = EXIT_OK if not failures else EXIT_CHECK_FAILED
    manifest.write(out_dir, code)
    return code


def cmd_shifted(config_path, out_dir, verbose=True):
    """Shifted-process, excess-risk inequality and localization checks."""
    try:
        config, data, instance = _load(config_path, 'shifted')
    except ConfigError as err:
        _report_error(err)
        return EXIT_CONFIG
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest('shifted', data, config.seed,
                           {'n': config.n, 'draws': config.draws,
                            'resolution': config.resolution})

    constants = instance.theoretical_constants()
    try:
        loc = localization_lambda(constants, config.n)
    except ValueError as err:
        _report_error(f"check failed: localization constant ({err})")
        write_json(os.path.join(out_dir, 'shifted.json'), {
            'constants': constants.as_dict(),
            'failures': ['localization_constant']
        })
        manifest.write(out_dir, EXIT_CHECK_FAILED)
        return EXIT_CHECK_FAILED
    try:
        grid = ShiftedGrid(instance, config.resolution, config.oracle,
                           config.penalty_scale, verbose=verbose)
    except ValueError as err:
        _report_error(ConfigError(str(err), config_path))
        manifest.write(out_dir, EXIT_CONFIG)
        return EXIT_CONFIG

    moment = exp_moment_check(config, instance, grid, verbose)
    chain = excess_risk_chain_sweep(
        instance, config.chain_n,
        [derive_seed(config.seed, 2, rep)
         for rep in range(config.chain_replications)],
        oracle_config=config.oracle, threads=config.threads, verbose=verbose)
    if constants.assumption4_holds:
        localization = check_localization(instance, config.n_probe,
                                          config.seed, config.oracle,
                                          saddle=grid.saddle,
                                          verbose=verbose)
    else:
        localization = {
            'localization': {
                'worst_slack': min(constants.sigma_x, constants.sigma_y) -
                constants.L_xy,
                'passed': False
            }
        }

    checks = {
        'exp_moment': {
            'worst_slack': moment['log_bound'] - moment['log_mc_estimate'],
            'passed': moment['passed']
        },
        'excess_risk_chain': {
            'worst_slack': min(terms['slack'] for terms in chain),
            'passed': all(terms['passed'] for terms in chain)
        }
    }
    checks.update(localization)

    # Grid error on the first Rademacher draw; skipped when the finer grid
    # is too large
    (sample_set, signs) = moment_check_draws(config, instance)
    try:
        refinement = grid_refinement_gap(instance, sample_set, signs[0],
                                         config.resolution,
                                         refine=config.refine,
                                         oracle_config=config.oracle)
        checks['grid_refinement'] = {
            'worst_slack': REFINEMENT_TOL - refinement,
            'passed': bool(refinement <= REFINEMENT_TOL)
        }
    except ValueError as err:
        verbose_print(f"Grid refinement check skipped: {err}", verbose)
    if verbose:
        print_backend.checks_report(checks)
    failures = [name for (name, check) in checks.items()
                if not check['passed']]
    for name in failures:
        _report_error(f"check failed: {name} (worst slack "
                      f"{checks[name]['worst_slack']:.3e})")

    sups = moment.pop('suprema')
    write_table(os.path.join(out_dir, 'suprema.csv'), ['draw', 'sup'],
                [(im, float(s)) for (im, s) in enumerate(sups)])
    write_json(os.path.join(out_dir, 'shifted.json'), {
        'constants': constants.as_dict(),
        'localization_constants': loc.as_dict(),
        'saddle': grid.saddle.as_dict(),
        'exp_moment': moment,
        'excess_risk_chain': chain,
        'checks': checks,
        'failures': failures
    })
    code = EXIT_OK if not failures else EXIT_CHECK_FAILED
    manifest.write(out_dir, code)
    return code


COMMANDS = {
    'solve': cmd_solve,
    'experiment': cmd_experiment,
    'verify': cmd_verify,
    'shifted': cmd_shifted
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog='ssprisk',
        description='Empirical saddle-point solver and excess-risk '
        'experiments.')
    parser.add_argument('--quiet', action='store_true',
                        help='only print errors')
    parser.add_argument('--print-backend', choices=['rich', 'base'],
                        default=None, help='summary table style')
    sub = parser.add_subparsers(dest='command', required=True)
    helps = {
        'solve': 'solve a population or empirical saddle-point problem',
        'experiment': 'excess-risk rate experiment',
        'verify': 'probe the constants and gradients of an instance',
        'shifted': 'shifted-process and localization checks'
    }
    for (name, text) in helps.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument('--config', required=True, help='JSON config file')
        cmd.add_argument('--out', default='.', help='output directory')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.print_backend is not None:
        set_print_backend(args.print_backend)
    code = COMMANDS[args.command](args.config, args.out,
                                  verbose=not args.quiet)
    return code


if __name__ == '__main__':
    sys.exit(main())
