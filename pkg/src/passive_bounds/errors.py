"""Exception hierarchy shared by all modules."""


class PassiveBoundsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PassiveBoundsError, ValueError):
    """Argument outside the domain where the operation is defined."""


class PoleError(DomainError):
    """Evaluation too close to a real pole of a lossless model."""


class UnsupportedDomainError(DomainError):
    """Model cannot be evaluated at the requested point (e.g. tabulated data off the real axis)."""


class SingularEvaluationError(DomainError):
    """Evaluation on the support of a measure from the real axis."""


class LoadError(PassiveBoundsError):
    """Malformed input file. ``row`` is the 1-based line number when known."""

    def __init__(self, message, row=None, omega=None):
        super().__init__(message)
        self.row = row
        self.omega = omega


class PassivityLoadError(LoadError):
    """Tabulated data with Im f < -tol."""


class PreconditionError(PassiveBoundsError):
    """Input violates the precondition of a bound (e.g. band is not a transparency window)."""


class QuadratureError(PassiveBoundsError):
    """Adaptive quadrature did not converge; ``worst`` holds the worst panel."""

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class ExtrapolationError(PassiveBoundsError):
    """Limit extrapolation diverged."""


class SolverError(PassiveBoundsError):
    """Krylov solve did not reach the requested residual."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


class GridTooCoarseError(PassiveBoundsError):
    """Grid cannot resolve the smallest geometric feature."""


class QualityError(PassiveBoundsError):
    """Solution failed a post-solve quality check (e.g. monopole too large)."""


class BracketError(PassiveBoundsError):
    """Root bracket does not contain a sign change."""


class ConfigError(PassiveBoundsError):
    """Invalid run configuration."""
