"""
Exceptions raised by qlattice.

Contents:
    ParameterError: a model or run parameter violates its invariants.
    TableSizeError: a pmf table was requested above the configured cap.
    InsufficientDataError: too few usable rows for a convergence fit.
    SweepError: a pricer failed inside a convergence sweep.
"""


class ParameterError(ValueError):
    """A parameter violates an invariant; the message names the bound."""


class TableSizeError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class SweepError(RuntimeError):
    """Wraps a pricer failure, remembering which step count caused it."""

    def __init__(self, N, message):
        super().__init__(f"N={N}: {message}")
        self.N = N
