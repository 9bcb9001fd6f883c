"""Exception and warning classes raised across the package."""

from __future__ import annotations


class PrabhakarError(Exception):
    """Base class for all package errors."""


class DomainError(PrabhakarError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class NonIntegerGamma(DomainError):
    """An operation that needs a positive integer ``gamma`` got something else."""


class OutOfCMRange(DomainError):
    """Parameters outside the completely-monotone range required by the spectral route."""


class StabilityViolation(DomainError):
    """Grünwald-Letnikov step violates ``|h**alpha * lambda| < 1``."""


class GridMismatch(DomainError):
    """A sampled function does not live on the grid an operator expects."""


class NoConvergence(PrabhakarError, ArithmeticError):
    """A series hit its term cap before its stopping rule fired."""


class OutOfRegime(PrabhakarError, ArithmeticError):
    """The asymptotic expansions cannot certify the requested accuracy."""


class NoAdmissibleContour(PrabhakarError, ArithmeticError):
    """No parabolic contour reaches the requested accuracy for this singularity layout."""


class CancellationFailure(PrabhakarError, ArithmeticError):
    """An alternating sum lost too many digits to be trusted."""


class TabulationFailure(PrabhakarError):
    """A waiting-time density could not be tabulated into a valid CDF."""


class Unsupported(PrabhakarError, NotImplementedError):
    """Requested quantity is deliberately not implemented."""


class Unevaluable(PrabhakarError, ArithmeticError):
    """No evaluation method could produce a certified value.

    ``attempts`` maps each attempted method name to the reason it was rejected.
    """

    def __init__(self, message: str, attempts: dict[str, str] | None = None) -> None:
        self.attempts = dict(attempts or {})
        if self.attempts:
            detail = "; ".join(f"{k}: {v}" for k, v in self.attempts.items())
            message = f"{message} (tried {detail})"
        super().__init__(message)


class CancellationWarning(RuntimeWarning):
    """Emitted when a computed value lost many digits to cancellation."""


class EstimatedInitialDataWarning(UserWarning):
    """Initial derivatives were estimated from samples instead of supplied."""
