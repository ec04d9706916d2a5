"""Exception hierarchy shared across the package."""


class TscertError(Exception):
    """Base class for all package-specific errors."""


class LinAlgError(TscertError):
    """Dense linear-algebra failure (bad shape, non-finite data, overflow)."""


class NotSPDError(LinAlgError):
    """A matrix required to be symmetric positive definite is not."""


class EigenConvergenceError(LinAlgError):
    """The symmetric eigensolver did not converge."""


class ExprError(TscertError):
    """Expression parsing or evaluation failure.

    Carries the 0-based character position in the source text when the
    failure is attributable to a specific token.
    """

    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{message} (column {pos})"
        super().__init__(message)
        self.pos = pos


class ModelError(TscertError):
    """Model data inconsistent with its declared structure."""


class SolverError(TscertError):
    """The SDP backend failed in a way that cannot be interpreted."""
