"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: input problems -> 2, numerical
failures -> 3, statistical assertion failures -> 1.
"""


class KbnetError(Exception):
    """Base class for all package errors."""


class PanelError(KbnetError):
    """Malformed or inconsistent input data (CSV, panels, weights)."""


class EstimationError(KbnetError):
    """Network estimation failed (singular / ill-conditioned design)."""


class StationarityError(KbnetError):
    """Spectral radius of the (scaled) adjacency matrix is not below one."""


class NumericalError(KbnetError):
    """A numerical routine produced an unusable result."""


class DegenerateStatisticError(KbnetError):
    """A test statistic is undefined (zero variance in a residual column)."""
