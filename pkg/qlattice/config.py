"""
Run configuration for the command line.

Contents:
    RunConfig: model parameters plus method, output format/path, seed and
        the per-subcommand extras.
    load_config_file: key = value file -> dict of raw strings.
    build_run_config: defaults, then file values, then flags.

Config files are read with configparser.  A file without a section header
is read as if it started with [qlattice]; comments start with # or ;.

    # example.cfg
    s0 = 100
    k = 95
    sigma = 0.2
    t = 0.5
    n_list = 100, 1000, 10000
"""
import os
import configparser
from dataclasses import dataclass, fields

from qlattice.errors import ParameterError
from qlattice.lattice import ModelParams, SCHEDULE_MODES

SECTION = 'qlattice'
METHODS = ('closed', 'backward', 'dual', 'edgeworth')
OUTPUT_FORMATS = ('csv', 'json', 'plot')


def _int_list(s):
    if isinstance(s, (list, tuple)):
        return tuple(int(x) for x in s)
    return tuple(int(x) for x in str(s).replace(',', ' ').split())


def _float_list(s):
    if isinstance(s, (list, tuple)):
        return tuple(float(x) for x in s)
    return tuple(float(x) for x in str(s).replace(',', ' ').split())


def _optional_int(s):
    return None if s is None or s == '' else int(s)


def _optional_float(s):
    return None if s is None or s == '' else float(s)


# config key -> (RunConfig field, converter)
KEYS = {
    's0': ('S0', float),
    'k': ('K', float),
    'sigma': ('sigma', float),
    't': ('T', float),
    'theta': ('theta', float),
    'zeta': ('zeta', float),
    'eta': ('eta', float),
    'n': ('N', int),
    'tq': ('Tq', _optional_float),
    'mode': ('schedule_mode', str),
    'method': ('method', str),
    'format': ('output_format', str),
    'output': ('output_path', str),
    'seed': ('seed', _optional_int),
    'q': ('q', float),
    'kmax': ('kmax', int),
    'n_list': ('n_list', _int_list),
    'grid': ('grid', _float_list),
    'n_paths': ('n_paths', int),
    'nworkers': ('nworkers', _optional_int),
}


@dataclass(frozen=True)
class RunConfig:
    # market; defaults are the S0=100, K=95, sigma=0.2, T=0.5 test market
    S0: float = 100.0
    K: float = 95.0
    sigma: float = 0.2
    T: float = 0.5
    theta: float = 1.0
    zeta: float = 1.0
    eta: float = 0.0
    N: int = 100
    Tq: float = None
    schedule_mode: str = 'exponential'
    # run
    method: str = 'closed'
    output_format: str = 'csv'
    output_path: str = None
    seed: int = None
    # subcommand extras
    q: float = 1.0
    kmax: int = 20
    n_list: tuple = (50, 100, 200, 400, 800, 1600, 3200)
    grid: tuple = (0.25, 0.5, 1.0)
    n_paths: int = 100_000
    nworkers: int = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ParameterError(
                f"format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}"
            )
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.q > 0:
            raise ParameterError(f"q must be > 0, got {self.q}")
        if self.kmax < 1:
            raise ParameterError(f"kmax must be >= 1, got {self.kmax}")
        if self.n_paths < 1:
            raise ParameterError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.nworkers is not None and self.nworkers < 1:
            raise ParameterError(f"nworkers must be >= 1, got {self.nworkers}")
        # raises ParameterError for any invalid market field
        self.model_params()

    def model_params(self, **changes):
        kwargs = {f: getattr(self, f) for f in
                  ('S0', 'K', 'sigma', 'T', 'theta', 'zeta', 'eta', 'N', 'Tq',
                   'schedule_mode')}
        kwargs.update(changes)
        return ModelParams(**kwargs)


def load_config_file(path):
    """
    Read a key = value file into a dict of raw strings, keyed by
    RunConfig field name.
    """
    if not os.path.isfile(path):
        raise ParameterError(f"config file not found: {path}")
    with open(path) as f:
        text = f.read()

    config = configparser.RawConfigParser(comment_prefixes=('#', ';'),
                                          inline_comment_prefixes=('#', ';'))
    try:
        config.read_string(text)
    except configparser.MissingSectionHeaderError:
        config.read_string(f"[{SECTION}]\n" + text)
    except configparser.Error as e:
        raise ParameterError(f"could not parse {path}: {e}") from e

    if not config.has_section(SECTION):
        raise ParameterError(f"{path} has no [{SECTION}] section")

    values = {}
    for key, raw in config.items(SECTION):
        key = key.replace('-', '_')
        if key not in KEYS:
            raise ParameterError(f"unknown key {key!r} in {path}")
        values[KEYS[key][0]] = raw
    return values


def _convert(field_name, value):
    for key, (name, conv) in KEYS.items():
        if name == field_name:
            try:
                return conv(value)
            except (TypeError, ValueError) as e:
                raise ParameterError(f"bad value for {key}: {value!r}") from e
    raise ParameterError(f"unknown configuration field {field_name!r}")


def build_run_config(flag_values=None, config_path=None):
    """
    RunConfig from defaults, overridden by the config file, overridden by
    every flag whose value is not None.
    """
    merged = {}
    if config_path is not None:
        merged.update(load_config_file(config_path))
    for name, value in (flag_values or {}).items():
        if value is not None:
            merged[name] = value

    known = {f.name for f in fields(RunConfig)}
    kwargs = {}
    for name, value in merged.items():
        if name not in known:
            raise ParameterError(f"unknown configuration field {name!r}")
        kwargs[name] = _convert(name, value)
    if 'schedule_mode' in kwargs and kwargs['schedule_mode'] not in SCHEDULE_MODES:
        raise ParameterError(
            f"mode must be one of {SCHEDULE_MODES}, got {kwargs['schedule_mode']!r}"
        )
    return RunConfig(**kwargs)
