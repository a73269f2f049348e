"""Exception hierarchy shared by the numerical modules."""


class PTError(Exception):
    """Base class for every error raised by the package."""


class SingularSeriesError(PTError):
    """Division by a series whose constant term vanishes."""


class BranchPointError(PTError):
    """Root extraction from a series with zero constant term."""


class DegenerateMapError(PTError):
    """A map series with vanishing linear coefficient."""


class NearPoleError(PTError):
    """A ray came within tolerance of a singular point of the equation."""

    def __init__(self, message, point=None, ray=None):
        super().__init__(message)
        self.point = point
        self.ray = ray


class NoConvergenceError(PTError):
    """An integrator exhausted its step budget."""


class AmbiguousStartError(PTError):
    """A trajectory launch from a zero needs a direction index."""


class TracingError(PTError):
    """A trajectory failed to reach its stop condition."""


class StagnationError(PTError):
    """The trust region collapsed before the residual reached tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EvaluationError(PTError):
    """The residual function returned non-finite values."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class PathFailureError(PTError):
    """Continuation could not advance even with the smallest step."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path if path is not None else []


class TopologyMismatchError(PTError):
    """The solved angle table does not respect the configuration's word."""


class ModeGuardError(PTError):
    """A residual mode was requested outside the range where it is valid."""


class InfeasibleGeometryError(PTError):
    """The slit-domain construction has no solution for the parameters."""


class NoIntersectionError(PTError):
    """The parallel curves of the inradius test do not meet."""


class BisectionFailureError(PTError):
    """The radius search could not bracket or evaluate the margin."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CoefficientExtractionError(PTError):
    """The two coefficient routes disagree."""

    def __init__(self, message, composition=None, fourier=None):
        super().__init__(message)
        self.composition = composition
        self.fourier = fourier


class TailError(PTError):
    """A coefficient table is not converged enough for the requested bound."""


class EmptyScanError(PTError):
    """Every grid point of a scan was infeasible."""


class PipelineError(PTError):
    """A constants-pipeline failure labelled with the stage that failed."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
