import os
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from qlattice.converge import sweep, geometric_grid, table1_params
from qlattice.visualization import plot_convergence, plot_convergence_figure
from qlattice.paths import TESTRESULTSDIR


def test_plot_convergence_figure():
    """
    Error against N for eta = -1, 1 and theta = 1, 1.1, as in the
    convergence driver but on a shorter grid.
    """
    Ns = geometric_grid(50, 2, 5)
    series = {}
    for eta in [-1.0, 1.0]:
        for theta in [1.0, 1.1]:
            series[(eta, theta)] = sweep(table1_params(eta, theta), Ns)

    png_path = os.path.join(TESTRESULTSDIR, "test_convergence_figure.png")
    if os.path.exists(png_path):
        os.remove(png_path)
    plot_convergence_figure(series, png_path)
    assert os.path.exists(png_path)


def test_plot_convergence_single_axis():
    rows = sweep(table1_params(0.0, 1.0), geometric_grid(50, 2, 4))
    fig, ax = plt.subplots(figsize=(4, 3))
    plot_convergence(ax, rows, title="eta=0", label="theta=1", guides=True)
    assert ax.get_xscale() == 'log'
    # data line plus the two guides
    assert len(ax.get_lines()) == 3
    plt.close(fig)


if __name__ == "__main__":
    test_plot_convergence_figure()
