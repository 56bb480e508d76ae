"""
Command line interface.

Usage: `qlattice <subcommand> [flags]`

    price     one call price with schedule diagnostics
    dist      Kemp pmf/cdf table of Z_n            (--n, --theta, --q)
    curve     q-geometric survival and hazard       (--theta, --q, --kmax)
    limit     short rate, log-price law, limit price (always JSON)
    converge  sweep over --n-list with fitted order
    table1    reference convergence table
    mc        Monte Carlo validation reports        (--seed required)

Examples:
```
qlattice price --s0 100 --k 95 --sigma 0.2 --t 0.5 --theta 1 --zeta 1 \\
    --eta 0 --n 1000 --mode exponential --method closed
qlattice curve --theta 1 --q 1 --kmax 5
qlattice table1 --format csv
qlattice converge --theta 1.1 --n-list 50,100,200,400,800,1600,3200 --format json
qlattice mc --eta 1 --n 1000 --n-paths 100000 --seed 42
```

Data goes to stdout (or --output); diagnostics go to stderr.  Exit codes:
0 success, 1 validation failure, 2 parameter or usage error.
"""
#############
## LOGGING ##
#############
import logging
from qlattice import log_sub, log_fmt, log_date_fmt

DEBUG = False
if DEBUG:
    level = logging.DEBUG
else:
    level = logging.INFO
LOGGER = logging.getLogger(__name__)
logging.basicConfig(
    level=level,
    style=log_sub,
    format=log_fmt,
    datefmt=log_date_fmt,
    force=True
)

LOGDEBUG = LOGGER.debug
LOGINFO = LOGGER.info
LOGWARNING = LOGGER.warning
LOGERROR = LOGGER.error
LOGEXCEPTION = LOGGER.exception

#############
## IMPORTS ##
#############
import os
import sys
import json
import argparse
from os.path import join

import numpy as np
import pandas as pd

from qlattice import __version__
from qlattice.errors import (
    InsufficientDataError, ParameterError, SweepError, TableSizeError
)
from qlattice.config import METHODS, OUTPUT_FORMATS, build_run_config
from qlattice.paths import PLOTDIR
from qlattice.dist import KempParams, kemp_pmf_table, failure_curve
from qlattice.lattice import (
    SCHEDULE_MODES, build_schedule, bond_price, theta_N, call_cutoff,
    martingale_residual
)
from qlattice.limit import (
    short_rate, integrated_rate, limit_discount, limit_log_law, bs_d1_d2,
    bs_call_limit
)
from qlattice.approx import predict_rate
from qlattice.converge import (
    price_with_method, sweep, fit_order, rows_to_frame, table1_report,
    SLOPE_WINDOWS
)
from qlattice import mc

SCHEMA = "qlattice/1"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARAMETER = 2

# columns printed as 6-decimal fixed point; other float columns use %.6e
PRICE_COLUMNS = {
    'price', 'limit', 'reference_price', 'reference_limit', 'survival',
    'pmf', 'cdf', 'hazard', 'bond', 'theta_N', 'a', 'b', 'qN',
}
PARAM_COLUMNS = {'eta', 'theta', 't'}

# martingale residual is O(N^2); skip it above this size
MARTINGALE_N_MAX = 5000


class ArgumentError(Exception):
    """Usage error; the parser has already written its message to stderr."""


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise ArgumentError(message)


def _add_common_flags(p):
    g = p.add_argument_group('market')
    g.add_argument("--s0", dest="S0", type=float, default=None, help="spot price")
    g.add_argument("--k", dest="K", type=float, default=None, help="strike")
    g.add_argument("--sigma", dest="sigma", type=float, default=None, help="volatility")
    g.add_argument("--t", dest="T", type=float, default=None, help="maturity in years")
    g.add_argument("--theta", dest="theta", type=float, default=None, help="stretch (> 0)")
    g.add_argument("--zeta", dest="zeta", type=float, default=None, help="tilt")
    g.add_argument("--eta", dest="eta", type=float, default=None, help="trend")
    g.add_argument("--n", dest="N", type=int, default=None, help="number of steps")
    g.add_argument("--tq", dest="Tq", type=float, default=None,
                   help="timescale in q_N = 1 + eta (Tq/N)^1.5 (default: T)")
    g.add_argument("--mode", dest="schedule_mode", choices=SCHEDULE_MODES, default=None)

    g = p.add_argument_group('run')
    g.add_argument("--method", dest="method", choices=METHODS, default=None)
    g.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default=None)
    g.add_argument("--output", dest="output_path", type=str, default=None,
                   help="output file (plot format: output directory)")
    g.add_argument("--seed", dest="seed", type=int, default=None)
    g.add_argument("--config", dest="config", type=str, default=None,
                   help="key = value file; flags override its values")
    g.add_argument("--nworkers", dest="nworkers", type=int, default=None,
                   help="process count (default: QLATTICE_THREADS or cpu count)")

    g = p.add_argument_group('extras')
    g.add_argument("--q", dest="q", type=float, default=None, help="q for dist and curve")
    g.add_argument("--kmax", dest="kmax", type=int, default=None)
    g.add_argument("--n-list", dest="n_list", type=str, default=None,
                   help="comma separated increasing step counts")
    g.add_argument("--grid", dest="grid", type=str, default=None,
                   help="comma separated times as fractions of T")
    g.add_argument("--n-paths", dest="n_paths", type=int, default=None)


def make_parser():
    parser = _Parser(prog="qlattice", description="q-binomial CRR lattice toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    helps = {
        'price': "one call price with diagnostics",
        'dist': "Kemp pmf/cdf table",
        'curve': "q-geometric survival and failure rate",
        'limit': "continuous-time limit quantities (JSON)",
        'converge': "convergence sweep with fitted order",
        'table1': "reference convergence table",
        'mc': "Monte Carlo validation reports (JSON)",
    }
    for name, help_text in helps.items():
        _add_common_flags(sub.add_parser(name, help=help_text))
    return parser


##########
## I/O  ##
##########

def _format_frame(df):
    out = df.copy()
    for col in out.columns:
        if out[col].dtype.kind != 'f' and col != 'local_order':
            continue
        if col in PRICE_COLUMNS:
            fmt = '{:.6f}'
        elif col in PARAM_COLUMNS:
            fmt = '{:g}'
        else:
            fmt = '{:.6e}'
        out[col] = [
            '' if v is None or (isinstance(v, float) and np.isnan(v)) else fmt.format(v)
            for v in out[col]
        ]
    return out


def write_csv(df, output_path=None, stream=None):
    """Fixed column order, fixed-point prices; pandas writes '.' decimals regardless of locale."""
    text = _format_frame(df).to_csv(index=False, lineterminator='\n')
    _emit(text, output_path, stream)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def write_json(payload, output_path=None, stream=None):
    payload = {'schema': SCHEMA, **payload}
    text = json.dumps(payload, indent=2, default=_json_default) + '\n'
    _emit(text, output_path, stream)


def _emit(text, output_path, stream):
    if output_path:
        with open(output_path, 'w') as f:
            f.write(text)
        LOGINFO(f"Wrote {output_path}")
    else:
        (stream or sys.stdout).write(text)


def plot_series_path(eta, theta, outdir=None):
    outdir = PLOTDIR if outdir is None else outdir
    return join(outdir, f"convergence_eta{eta:g}_theta{theta:g}.dat")


def write_plot_series(Ns, errs, eta, theta, outdir=None):
    """Two-column (N, abs_err) text file for one (eta, theta) series."""
    outdir = PLOTDIR if outdir is None else outdir
    os.makedirs(outdir, exist_ok=True)
    path = plot_series_path(eta, theta, outdir)
    with open(path, 'w') as f:
        f.write(f"# eta={eta:g} theta={theta:g}\n# N abs_err\n")
        for N, e in zip(Ns, errs):
            f.write(f"{int(N)} {float(e):.10e}\n")
    LOGINFO(f"Wrote {path}")
    return path


def _params_dict(params):
    return {
        'S0': params.S0, 'K': params.K, 'sigma': params.sigma, 'T': params.T,
        'theta': params.theta, 'zeta': params.zeta, 'eta': params.eta,
        'N': params.N, 'Tq': params.Tq, 'schedule_mode': params.schedule_mode,
    }


def _nworkers(cfg):
    if cfg.nworkers is not None:
        return cfg.nworkers
    from qlattice.mp_converge import default_nworkers
    return default_nworkers()


def _require_not_plot(cfg, command):
    if cfg.output_format == 'plot':
        raise ParameterError(f"--format plot is only available for converge and table1, not {command}")


#################
## SUBCOMMANDS ##
#################

def cmd_price(cfg, stream=None):
    _require_not_plot(cfg, 'price')
    params = cfg.model_params()
    sched = build_schedule(params)
    price = price_with_method(params, cfg.method)
    limit = bs_call_limit(params)
    m, eps = call_cutoff(params, sched)
    diag = {
        'N': params.N,
        'method': cfg.method,
        'price': price,
        'limit': limit,
        'abs_err': abs(price - limit),
        'bond': bond_price(sched),
        'theta_N': theta_N(sched),
        'a': sched.a,
        'b': sched.b,
        'qN': sched.qN.q,
        'cutoff_m': m,
        'eps_N': eps,
    }
    if params.N <= MARTINGALE_N_MAX:
        diag['martingale_residual'] = martingale_residual(params, sched)
    if cfg.output_format == 'json':
        write_json({'command': 'price', 'params': _params_dict(params), **diag},
                   cfg.output_path, stream)
    else:
        write_csv(pd.DataFrame([diag]), cfg.output_path, stream)
    return EXIT_OK


def cmd_dist(cfg, stream=None):
    _require_not_plot(cfg, 'dist')
    table = kemp_pmf_table(KempParams(cfg.N, cfg.theta, cfg.q))
    df = table.to_frame()
    if cfg.output_format == 'json':
        write_json({'command': 'dist', 'n': cfg.N, 'theta': cfg.theta, 'q': cfg.q,
                    'rows': df.to_dict(orient='records')}, cfg.output_path, stream)
    else:
        write_csv(df, cfg.output_path, stream)
    return EXIT_OK


def cmd_curve(cfg, stream=None):
    _require_not_plot(cfg, 'curve')
    df = failure_curve(cfg.kmax, cfg.theta, cfg.q)
    if cfg.output_format == 'json':
        write_json({'command': 'curve', 'theta': cfg.theta, 'q': cfg.q,
                    'rows': df.to_dict(orient='records')}, cfg.output_path, stream)
    else:
        write_csv(df, cfg.output_path, stream)
    return EXIT_OK


def cmd_limit(cfg, stream=None):
    params = cfg.model_params()
    d1, d2 = bs_d1_d2(params)
    times = []
    for frac in cfg.grid:
        t = frac * params.T
        law = limit_log_law(t, params)
        times.append({'t': t, 'short_rate': short_rate(t, params),
                      'mean_log': law.mean_log, 'var_log': law.var_log})
    write_json({
        'command': 'limit',
        'params': _params_dict(params),
        'integrated_rate': integrated_rate(params),
        'discount': limit_discount(params),
        'd1': d1,
        'd2': d2,
        'limit_price': bs_call_limit(params),
        'times': times,
    }, cfg.output_path, stream)
    return EXIT_OK


def cmd_converge(cfg, stream=None):
    params = cfg.model_params()
    rows = sweep(params, cfg.n_list, method=cfg.method, nworkers=_nworkers(cfg))
    rate = predict_rate(params)
    try:
        slope, r2 = fit_order(rows)
        lo, hi = SLOPE_WINDOWS[rate]
        passed = bool(lo <= slope <= hi)
    except InsufficientDataError as e:
        LOGWARNING(f"no order fit: {e}")
        slope, r2, passed = None, None, None

    if cfg.output_format == 'json':
        write_json({
            'command': 'converge',
            'params': _params_dict(params),
            'method': cfg.method,
            'rows': [r.as_dict() for r in rows],
            'slope': slope,
            'r2': r2,
            'predicted_rate': rate.value,
            'passed': passed,
        }, cfg.output_path, stream)
    elif cfg.output_format == 'plot':
        write_plot_series([r.N for r in rows], [r.abs_err for r in rows],
                          params.eta, params.theta, cfg.output_path)
    else:
        write_csv(rows_to_frame(rows), cfg.output_path, stream)

    if slope is not None:
        LOGINFO(f"fitted slope {slope:.3f} (r2 {r2:.3f}), predicted {rate.value}")
    return EXIT_VALIDATION if passed is False else EXIT_OK


def cmd_table1(cfg, stream=None):
    report = table1_report(method=cfg.method, nworkers=_nworkers(cfg))
    all_passed = bool(report['passed'].all())
    if cfg.output_format == 'json':
        write_json({'command': 'table1', 'method': cfg.method,
                    'rows': report.to_dict(orient='records'),
                    'passed': all_passed}, cfg.output_path, stream)
    elif cfg.output_format == 'plot':
        for (eta, theta), grp in report.groupby(['eta', 'theta'], sort=False):
            write_plot_series(grp['N'], (grp['price'] - grp['limit']).abs(),
                              eta, theta, cfg.output_path)
    else:
        cols = ['eta', 'theta', 'N', 'price', 'reference_price', 'abs_dev',
                'limit', 'reference_limit', 'passed']
        write_csv(report[cols], cfg.output_path, stream)
    if not all_passed:
        LOGERROR(f"{int((~report['passed']).sum())} table cells outside tolerance")
    return EXIT_OK if all_passed else EXIT_VALIDATION


def cmd_mc(cfg, stream=None):
    if cfg.seed is None:
        raise ParameterError("mc requires --seed")
    params = cfg.model_params()
    grid = [frac * params.T for frac in cfg.grid]
    nworkers = _nworkers(cfg)
    batch = mc.sample(params, grid, cfg.n_paths, cfg.seed, nworkers=nworkers)
    report = {
        'command': 'mc',
        'params': _params_dict(params),
        'seed': cfg.seed,
        'n_paths': cfg.n_paths,
        'clt': mc.clt_check(batch, params),
        'fdd': mc.fdd_check(batch, params),
        'martingale': mc.martingale_check(batch, params),
    }
    if params.N <= 12:
        report['chi_square'] = mc.chi_square_check(batch, params)
    passed = all(report[k]['passed'] for k in ('clt', 'fdd', 'martingale'))
    report['passed'] = passed
    write_json(report, cfg.output_path, stream)
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    'price': cmd_price,
    'dist': cmd_dist,
    'curve': cmd_curve,
    'limit': cmd_limit,
    'converge': cmd_converge,
    'table1': cmd_table1,
    'mc': cmd_mc,
}


def run(argv=None, stream=None):
    """Parse argv, run one subcommand, and return the exit code."""
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except ArgumentError:
        return EXIT_PARAMETER
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    flags = {k: v for k, v in vars(args).items() if k not in ('command', 'config')}
    try:
        cfg = build_run_config(flags, config_path=args.config)
        return COMMANDS[args.command](cfg, stream=stream)
    except (ParameterError, TableSizeError, SweepError, InsufficientDataError) as e:
        sys.stderr.write(f"qlattice {args.command}: error: {e}\n")
        return EXIT_PARAMETER


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
