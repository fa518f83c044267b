"""Exception hierarchy for the two-channel toolkit.

Exit-code mapping used by the CLI: input problems (StructuralError,
DomainError, ProblemFileError) -> 2, numerical failures (GapError,
SingularityError, ConvergenceError, ResolventError, NumericalError,
OracleFailureError, ClassificationError) -> 3, invariant violations
detected during verification -> 1.
"""


class TwoChanError(Exception):
    """Base class for all toolkit errors."""


class StructuralError(TwoChanError):
    """Invalid structure: dimension mismatch, empty spectrum, bad band."""


class DomainError(TwoChanError):
    """Operator data outside the admissible domain (e.g. I + N not positive)."""


class GapError(TwoChanError):
    """Spectra of the two channels are not separated (dist = 0)."""


class SingularityError(TwoChanError):
    """A resolvent or bracket solve hit a (numerically) singular operator."""

    def __init__(self, message: str, point: complex | None = None):
        super().__init__(message)
        self.point = point


class ConvergenceError(TwoChanError):
    """Fixed-point iteration failed to converge; carries the step table."""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class ClassificationError(TwoChanError):
    """Eigenvalue affiliation to a channel spectrum is ambiguous."""


class OracleFailureError(TwoChanError):
    """The projector-based oracle could not recover a graph operator."""


class PartitionOverlapError(TwoChanError):
    """Both channels claim the same full-Hamiltonian eigenvector."""


class PartitionResolutionError(TwoChanError):
    """Neither channel claims a full-Hamiltonian eigenvector."""


class ResolventError(TwoChanError):
    """Spectral point too close to the counterpart spectrum for a resolvent."""


class NumericalError(TwoChanError):
    """Generic numerical failure (e.g. weight operator not positive)."""


class ProblemFileError(TwoChanError):
    """Problem-file syntax or validation error; remembers the location."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class ReportError(TwoChanError):
    """Report post-processing failure (e.g. requested table not present)."""
