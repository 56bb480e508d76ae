import os
from os.path import join

VERBOSE = 0

# cache for temporary files and results; QLATTICE_CACHE overrides the default
CACHEDIR = os.environ.get(
    "QLATTICE_CACHE", join(os.path.expanduser("~"), ".qlattice_cache")
)
RESULTSDIR = join(CACHEDIR, 'results')
TESTRESULTSDIR = join(RESULTSDIR, 'tests')
PLOTDIR = join(RESULTSDIR, 'plots')

for l in [CACHEDIR, RESULTSDIR, TESTRESULTSDIR, PLOTDIR]:
    if not os.path.exists(l):
        if VERBOSE:
            print(f"Making {l}")
        os.makedirs(l, exist_ok=True)
