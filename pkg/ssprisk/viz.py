import matplotlib.pyplot as plt
import numpy as np


def rate_curve(curve,
               fit=None,
               mean_fit=None,
               ax=None,
               figsize=(5, 4),
               color='#1f77b4',
               markersize=6,
               show_means=True):
    """Plot the risk quantiles of an experiment against n on log-log axes

    Parameters
    ----------
    curve : QuantileCurve
    fit : RateFit, optional
        Fit of the quantiles; drawn as a dashed line with its slope in the
        legend.
    mean_fit : RateFit, optional
        Fit of the mean risks.
    ax : matplotlib axis object, optional
        Matplotlib axis object for plotting. If not provided, a new figure and
        axis are automatically created.
    figsize : Tuple, optional
        Figure size for created figure. Default is (5,4).
    color : str, optional
        Color of the quantile markers and fit line.
    markersize : float, optional
        Marker size. Default is 6.
    show_means : bool, optional
        Also plot the mean risk at every n. Default is True.

    Returns
    -------
    ax : matplotlib axis object
        Axis object for the plot.
    """
    if ax is None:
        fig, ax = plt.subplots(1, constrained_layout=True, figsize=figsize)

    ns = curve.ns
    ax.loglog(ns, curve.quantiles, 'o', color=color, markersize=markersize,
              label=f"{1 - curve.delta:.2f}-quantile")
    if show_means:
        ax.loglog(ns, curve.means, 's', color='#aaaaaa',
                  markersize=markersize - 2, label='mean')

    for (rate, style, name) in [(fit, '--', 'fit'), (mean_fit, ':',
                                                     'mean fit')]:
        if rate is None:
            continue
        n_line = np.geomspace(ns.min(), ns.max(), 50)
        ax.loglog(n_line, np.exp(rate.intercept) * n_line**rate.slope,
                  style, color=color if name == 'fit' else '#aaaaaa',
                  label=f"{name}: slope {rate.slope:.2f}")

    ax.set_xlabel('sample size $n$')
    ax.set_ylabel('strong excess risk')
    ax.legend(frameon=False)
    return ax


def gap_trace(report, ax=None, figsize=(5, 4), color='k', lw=1.5,
              tolerance=None):
    """Plot the certified duality gaps of a SolveReport per iteration

    Parameters
    ----------
    report : SolveReport
    ax : matplotlib axis object, optional
    figsize : Tuple, optional
        Default is (5,4).
    color : str, optional
    lw : float, optional
        Line width. Default is 1.5.
    tolerance : float, optional
        If given, drawn as a horizontal line.

    Returns
    -------
    ax : matplotlib axis object
    """
    if ax is None:
        fig, ax = plt.subplots(1, constrained_layout=True, figsize=figsize)

    gaps = np.maximum(np.array(report.gap_trace), 1e-300)
    ax.semilogy(report.gap_iters, gaps, '-o', color=color, lw=lw,
                markersize=3)
    if tolerance is not None:
        ax.axhline(tolerance, color='#cccccc', ls='--')
    ax.set_xlabel('iteration')
    ax.set_ylabel('duality gap')
    return ax


def suprema_histogram(suprema, lam=None, ax=None, figsize=(5, 4), bins=30):
    """Histogram of shifted-process suprema over the Rademacher draws;
    scaled by `lam` if given."""
    if ax is None:
        fig, ax = plt.subplots(1, constrained_layout=True, figsize=figsize)
    values = np.asarray(suprema)
    if lam is not None:
        values = lam * values
    ax.hist(values, bins=bins, color='#cccccc', edgecolor='k')
    ax.set_xlabel('supremum' if lam is None else r'$\lambda \cdot$ supremum')
    ax.set_ylabel('draws')
    return ax
