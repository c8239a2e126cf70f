"""Exception hierarchy shared across the package.

ConfigError maps to CLI exit code 2, InfeasibleError to 3 and
NumericsError (with its subclasses) to 4.
"""


class ConfigError(ValueError):
    """Invalid configuration file or option."""


class InfeasibleError(RuntimeError):
    """A computation has no feasible solution (e.g. fit window excludes the poles)."""


class NumericsError(RuntimeError):
    """Numerical failure (degeneracy, non-convergence, enclosure violation)."""


class DegeneracyError(NumericsError):
    """A denominator fell below the configured floor."""


class ConvergenceError(NumericsError):
    """An iterative scheme exhausted its budget without converging."""
