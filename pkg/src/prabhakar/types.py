"""Parameter bundles, evaluation configuration and results."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from prabhakar.errors import DomainError

MACHINE_EPS = 2.220446049250313e-16


class Method(str, enum.Enum):
    """Evaluation route for the Prabhakar function."""

    AUTO = "auto"
    SERIES = "series"
    ASYMPTOTIC = "asym"
    INVERSION = "inversion"
    SPECTRAL = "spectral"
    EXACT = "exact"


@dataclass(frozen=True)
class PrabhakarParams:
    r"""The real parameters :math:`(\alpha, \beta, \gamma)` of :math:`E^\gamma_{\alpha,\beta}`."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real number, got {value!r}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    @property
    def gamma_is_integer(self) -> bool:
        return float(self.gamma).is_integer()

    @property
    def gamma_is_natural(self) -> bool:
        return self.gamma_is_integer and self.gamma > 0

    def with_(self, **changes: float) -> PrabhakarParams:
        values = {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}
        values.update(changes)
        return PrabhakarParams(**values)


@dataclass(frozen=True)
class KernelParams:
    r"""Prabhakar kernel :math:`e^\gamma_{\alpha,\beta}(t;\lambda) = t^{\beta-1}E^\gamma_{\alpha,\beta}(\lambda t^\alpha)`."""

    base: PrabhakarParams
    lam: complex | float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(abs(complex(self.lam))):
            raise DomainError(f"lambda must be finite, got {self.lam!r}")

    @classmethod
    def of(cls, alpha: float, beta: float, gamma: float, lam: complex | float) -> KernelParams:
        return cls(PrabhakarParams(alpha, beta, gamma), lam)

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def beta(self) -> float:
        return self.base.beta

    @property
    def gamma(self) -> float:
        return self.base.gamma


@dataclass(frozen=True)
class EvalConfig:
    """Accuracy target and method selection shared by all evaluators.

    ``series_radius`` is the modulus below which Auto always tries the series
    first; between it and ``series_max_radius`` the series is only accepted
    when it reports no cancellation.
    """

    rel_tol: float = 1e-14
    max_terms: int = 250
    method: Method = Method.AUTO
    series_radius: float = 1.0
    series_max_radius: float = 5.0
    certify: bool = False
    accept_factor: float = 1e4

    def __post_init__(self) -> None:
        if not (10 * MACHINE_EPS <= self.rel_tol < 1):
            raise DomainError(f"rel_tol must lie in [10*eps, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if not self.accept_factor >= 1:
            raise DomainError("accept_factor must be at least 1")
        object.__setattr__(self, "method", Method(self.method))

    @property
    def accept_tol(self) -> float:
        """Largest estimated relative error at which a route's result is accepted."""
        return min(0.5, self.rel_tol * self.accept_factor)


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class EvalResult:
    """Value of an evaluator together with an honest relative error estimate.

    ``work`` counts series terms or quadrature nodes.  ``cancellation`` is set
    when intermediate magnitudes exceeded the result by more than eight
    orders of magnitude.
    """

    value: complex
    est_error: float
    method_used: Method
    work: int = 0
    cancellation: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def real(self) -> float:
        return self.value.real

    def __complex__(self) -> complex:
        return complex(self.value)

    def __float__(self) -> float:
        return float(self.value.real)


@dataclass(frozen=True)
class ContourSpec:
    """Parabolic contour ``w(u) = mu*(1j*u + 1)**2`` sampled at ``u_k = k*h``, ``|k| <= n_half``."""

    mu: float
    h: float
    n_half: int

    def __post_init__(self) -> None:
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError(f"mu must be positive and finite, got {self.mu}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise DomainError(f"h must be positive and finite, got {self.h}")
        if self.n_half < 1:
            raise DomainError("n_half must be at least 1")

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_half + 1
