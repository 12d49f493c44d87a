"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific class that applies.
"""


class AmrDmdError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(AmrDmdError, ValueError):
    """A caller-supplied value violates a documented precondition."""


class InvalidPlanError(AmrDmdError):
    """A refinement/coarsening plan is inconsistent with the mesh."""


class PointNotFoundError(AmrDmdError, LookupError):
    """A query point lies outside the mesh beyond tolerance."""


class AssemblyError(AmrDmdError):
    """Finite-element assembly hit a degenerate element."""


class SolverError(AmrDmdError):
    """Iterative solver failed to converge.

    Carries the final relative residual in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericError(AmrDmdError):
    """A dense factorization failed to converge."""


class CoverageError(AmrDmdError):
    """Quadrature points of the target mesh were not locatable in the donor.

    Carries the offending points in ``points``.
    """

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points if points is not None else []


class FitError(AmrDmdError):
    """Model fitting failed (empty rank, eigen failure)."""


class StepError(AmrDmdError):
    """A simulation time step failed (e.g. Picard non-convergence)."""


class UndefinedRegionError(AmrDmdError):
    """A thresholded region is empty, so the requested QoI is undefined."""


class ConfigError(AmrDmdError):
    """A run-configuration file could not be parsed.

    ``line_no`` is the 1-based offending line, when known.
    """

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no


class StoreError(AmrDmdError):
    """A snapshot store is missing files or internally inconsistent."""
