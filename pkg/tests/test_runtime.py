import os
import csv
import time as timemodule
import numpy as np
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from qlattice.lattice import call_payoff, price_european_closed, price_call_dual
from qlattice.converge import table1_params
from qlattice.paths import TESTRESULTSDIR


def test_runtime():
    """
    Runtime of the closed-form and dual pricers against the number of steps.
    Writes a CSV and a log-log plot to TESTRESULTSDIR.
    """
    csv_path = os.path.join(TESTRESULTSDIR, "runtime.csv")
    png_path = os.path.join(TESTRESULTSDIR, "runtime.png")

    Ns = [100, 1000, 10000, 20000]
    params = table1_params(1.0, 1.1)

    # first call compiles the numba kernels
    price_european_closed(params.replace(N=10), call_payoff(params.K))

    results = []
    for N in Ns:
        p = params.replace(N=N)
        start = timemodule.time()
        closed = price_european_closed(p, call_payoff(p.K))
        t_closed = timemodule.time() - start

        start = timemodule.time()
        dual = price_call_dual(p)
        t_dual = timemodule.time() - start

        print(f"N={N}: closed {t_closed:.4f}s, dual {t_dual:.4f}s")
        assert np.isfinite(closed) and abs(closed - dual) < 1e-8
        results.append((N, t_closed, t_dual))

    with open(csv_path, 'w', newline='') as csvfile:
        writer = csv.writer(csvfile)
        writer.writerow(['N', 'closed_seconds', 'dual_seconds'])
        writer.writerows(results)

    n_arr = np.array([r[0] for r in results])
    plt.figure(figsize=(6, 4))
    plt.plot(n_arr, [r[1] for r in results], 'o-', label='closed')
    plt.plot(n_arr, [r[2] for r in results], 's-', label='dual')
    plt.xscale('log')
    plt.yscale('log')
    plt.xlabel('N (steps)')
    plt.ylabel('Elapsed time (s)')
    plt.legend()
    plt.savefig(png_path, dpi=200, bbox_inches='tight')
    plt.close()


if __name__ == "__main__":
    test_runtime()
    print("Test completed successfully.")
