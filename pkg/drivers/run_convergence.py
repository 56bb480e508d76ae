"""
Usage: `python run_convergence.py [--n0 50] [--count 8] [--nworkers 4]`

Sweep the (eta, theta) in {-1, 1} x {1, 1.1} markets of the reference table
over a doubling N grid, write one CSV per market plus a rate-check summary,
and render the two convergence panels.

Examples:
```
python run_convergence.py
python run_convergence.py --n0 25 --count 10 --method backward
```
"""
import os
import json
import argparse

from qlattice.converge import (
    geometric_grid, rate_check, rows_to_frame, table1_params
)
from qlattice.paths import RESULTSDIR, PLOTDIR
from qlattice.visualization import plot_convergence_figure

parser = argparse.ArgumentParser(description="Convergence sweeps and figure.")
parser.add_argument("--n0", type=int, default=50, help="first grid size (default: 50)")
parser.add_argument("--count", type=int, default=7, help="number of doublings + 1 (default: 7)")
parser.add_argument("--method", type=str, default='closed', help="pricing method (default: closed)")
parser.add_argument("--nworkers", type=int, default=1, help="worker processes (default: 1)")


def main():
    args = parser.parse_args()
    N_list = geometric_grid(args.n0, 2, args.count)

    series, summary = {}, []
    for eta in [-1.0, 1.0]:
        for theta in [1.0, 1.1]:
            params = table1_params(eta, theta)
            res = rate_check(params, N_list, method=args.method, nworkers=args.nworkers)
            series[(eta, theta)] = res['rows']

            csvpath = os.path.join(RESULTSDIR, f"convergence_eta{eta:g}_theta{theta:g}.csv")
            rows_to_frame(res['rows']).to_csv(csvpath, index=False)
            summary.append({'eta': eta, 'theta': theta,
                            **{k: v for k, v in res.items() if k != 'rows'}})

    jsonpath = os.path.join(RESULTSDIR, "rate_check.json")
    with open(jsonpath, 'w') as f:
        json.dump(summary, f, indent=2)
    print(f"Wrote {jsonpath}")

    pngpath = os.path.join(PLOTDIR, "convergence.png")
    plot_convergence_figure(series, pngpath)
    print(f"Wrote {pngpath}")


if __name__ == "__main__":
    main()
