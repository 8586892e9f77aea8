"""
Various utilities used in the main code for printing

"""
import sys
import numpy as np
# Import rich if available
try:
    from rich.console import Console
    from rich.table import Table
    from rich import box
    from rich import print  # This is an upgraded version of standard print
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False


def load_bar(perc, precision=20):
    box = "█"
    pipe = "│"

    filled_blocks = int(perc / 100 * precision)
    bar = box * filled_blocks + '-' * (precision - filled_blocks)

    return pipe + bar + pipe


def verbose_print(text, verbose, flush=False, end='\n'):
    """Print if verbose==True
    """
    if verbose == True:
        if flush == False:
            print(text, end=end)
        else:
            sys.stdout.write("\r" + text)
            sys.stdout.flush()


def update_prog(ik, num_k, verbose, text):
    verbose_print(f"{text} {load_bar((ik+1)/num_k*100,precision=30)}" +
                  f" {ik+1} of {num_k}",
                  verbose,
                  flush=True)


def _fmt_vec(v, digits=6):
    return "[" + ", ".join(f"{vi:.{digits}f}" for vi in np.ravel(v)) + "]"


def print_solve_report_rich(report):
    table = Table(title="", box=box.SIMPLE)
    table.add_column("Saddle-point solve", justify="left", style="cyan",
                     no_wrap=True)
    table.add_column("Value", style="magenta")
    table.add_row("x", _fmt_vec(report.solution.x))
    table.add_row("y", _fmt_vec(report.solution.y))
    table.add_row("Duality gap", f"{report.final_gap:.3e}")
    table.add_row("Iterations", f"{report.iterations}")
    status = "[green]converged[/green]" if report.converged else \
        "[red]not converged[/red]"
    table.add_row("Status", status, style="bold")
    console = Console()
    console.print(table)


def print_solve_report(report):
    print(f"x = {_fmt_vec(report.solution.x)}")
    print(f"y = {_fmt_vec(report.solution.y)}")
    print(f"duality gap {report.final_gap:.3e} after {report.iterations} "
          f"iterations ({'converged' if report.converged else 'not converged'})")


def print_assumption_report_rich(report):
    table = Table(title="", box=box.SIMPLE)
    table.add_column("Check", justify="left", style="cyan", no_wrap=True)
    table.add_column("Estimate", style="magenta")
    table.add_column("Theory", style="magenta")
    table.add_column("Result", justify="right")
    for check in report.checks:
        result = "[green]ok[/green]" if check['passed'] else "[red]FAIL[/red]"
        table.add_row(check['name'], f"{check['estimate']:.6g}",
                      f"{check['theory']:.6g}", result)
    console = Console()
    console.print(table)


def print_assumption_report(report):
    for check in report.checks:
        status = 'ok' if check['passed'] else 'FAIL'
        print(f"  {check['name']:<14} estimate {check['estimate']:.6g}"
              f"  theory {check['theory']:.6g}  {status}")


def print_experiment_report_rich(curve, fit):
    table = Table(title="", box=box.SIMPLE)
    table.add_column(f"n", justify="right", style="cyan")
    table.add_column(f"{1 - curve.delta:g}-quantile", style="magenta")
    table.add_column("mean", style="magenta")
    table.add_column("median", style="magenta")
    for row in curve.rows:
        table.add_row(f"{row['n']}", f"{row['q']:.4e}", f"{row['mean']:.4e}",
                      f"{row['median']:.4e}")
    if fit is not None:
        table.add_row("slope", f"[u]{fit.slope:.4f}[/u]", "", "",
                      style="bold", end_section=True)
        table.add_row("R^2", f"{fit.r2:.4f}", "", "")
    console = Console()
    console.print(table)


def print_experiment_report(curve, fit):
    print(f"{'n':>8} {'quantile':>12} {'mean':>12} {'median':>12}")
    for row in curve.rows:
        print(f"{row['n']:>8} {row['q']:>12.4e} {row['mean']:>12.4e} "
              f"{row['median']:>12.4e}")
    if fit is not None:
        print(f"log-log slope {fit.slope:.4f}, R^2 {fit.r2:.4f}")


def print_checks_report_rich(checks):
    table = Table(title="", box=box.SIMPLE)
    table.add_column("Inequality", justify="left", style="cyan",
                     no_wrap=True)
    table.add_column("Worst slack", style="magenta")
    table.add_column("Result", justify="right")
    for name, check in checks.items():
        result = "[green]ok[/green]" if check['passed'] else "[red]FAIL[/red]"
        table.add_row(name, f"{check['worst_slack']:.3e}", result)
    console = Console()
    console.print(table)


def print_checks_report(checks):
    for name, check in checks.items():
        status = 'ok' if check['passed'] else 'FAIL'
        print(f"  {name:<24} worst slack {check['worst_slack']:.3e}  {status}")
