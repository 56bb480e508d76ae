"""
Contents:

Big plots:
    plot_convergence_figure

Small helper functions:
    plot_convergence
    plot_reference_slopes
"""
import matplotlib.pyplot as plt
import numpy as np


def plot_reference_slopes(ax, Ns, anchor_err):
    """
    Dashed N^{-1} and N^{-1/2} guides through (Ns[0], anchor_err).
    """
    Ns = np.asarray(Ns, dtype=float)
    for exponent, ls in [(-1.0, '--'), (-0.5, ':')]:
        guide = anchor_err * (Ns / Ns[0]) ** exponent
        label = r"$N^{-1}$" if exponent == -1 else r"$N^{-1/2}$"
        ax.plot(Ns, guide, c='gray', lw=0.7, ls=ls, label=label)


def plot_convergence(ax, rows, title=None, label=None, c='k', guides=False):
    """
    Plot |price - limit| against N on log-log axes, on the provided Axes.
    `rows` is a sequence of ConvergenceRow.  Raw (unnormalized) errors.
    """
    Ns = np.array([r.N for r in rows], dtype=float)
    errs = np.array([r.abs_err for r in rows], dtype=float)
    sel = errs > 0
    ax.plot(Ns[sel], errs[sel], marker='o', markersize=3, lw=1, c=c, label=label)
    if guides and np.any(sel):
        plot_reference_slopes(ax, Ns[sel], errs[sel][0])
    ax.set_xscale('log')
    ax.set_yscale('log')
    ax.set_xlabel("N (steps)")
    ax.set_ylabel("|price - limit|")
    if title is not None:
        ax.set_title(title)


def plot_convergence_figure(series, png_path, etas=(-1.0, 1.0)):
    """
    One panel per trend value in `etas`, each overplotting the theta series.

    Args:
        series (dict): (eta, theta) -> sequence of ConvergenceRow.
        png_path (str): output path.
    """
    fig, axs = plt.subplots(ncols=len(etas), figsize=(5 * len(etas), 4))
    axs = np.atleast_1d(axs)
    colors = ['k', 'C0', 'C1', 'C2', 'C3']

    for ax, eta in zip(axs, etas):
        keys = sorted(k for k in series if k[0] == eta)
        for ix, key in enumerate(keys):
            plot_convergence(ax, series[key], label=fr"$\theta$={key[1]:g}",
                             c=colors[ix % len(colors)], guides=(ix == 0))
        ax.set_title(fr"Convergence for $\eta$={eta:g}")
        ax.legend(fontsize='small')

    fig.tight_layout()
    fig.savefig(png_path, dpi=200, bbox_inches='tight')
    plt.close(fig)
    return png_path
