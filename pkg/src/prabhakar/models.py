"""Physical models built on the Prabhakar function.

Dielectric relaxation (Debye, Cole-Cole, Davidson-Cole, Havriliak-Negami),
the Maxwell-Prabhakar viscoelastic material functions, and mean squared
displacements of tempered fractional diffusion.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from prabhakar.calculus import GridFn, OperatorKind, OperatorSpec, apply_gl
from prabhakar.core.dispatch import evaluate, evaluate_with_fallback, magnitude_bound
from prabhakar.errors import (CancellationFailure, CancellationWarning, DomainError, NoConvergence,
                              Unevaluable)
from prabhakar.types import DEFAULT_CONFIG, EvalConfig, KernelParams, PrabhakarParams

_G_TERM_CAP = 400
_G_CANCELLATION = 1e6


def _E(alpha: float, beta: float, gamma: float, z: float, cfg: EvalConfig) -> float:
    return evaluate(PrabhakarParams(alpha, beta, gamma), z, cfg).value.real


# --------------------------------------------------------------------------- dielectrics


class RelaxKind(str, enum.Enum):
    DEBYE = "debye"
    COLE_COLE = "cole_cole"
    DAVIDSON_COLE = "davidson_cole"
    HAVRILIAK_NEGAMI = "havriliak_negami"


class Regime(str, enum.Enum):
    SMALL = "small"
    LARGE = "large"


@dataclass(frozen=True)
class RelaxModel:
    """Normalised dielectric relaxation law with shape exponents ``alpha``, ``gamma`` and time ``tau``.

    Debye fixes ``alpha = gamma = 1``, Cole-Cole fixes ``gamma = 1`` and
    Davidson-Cole fixes ``alpha = 1`` with ``0 < gamma <= 1``.  All kinds need
    ``0 < alpha <= 1`` and ``0 < alpha*gamma <= 1``.
    """

    kind: RelaxKind
    alpha: float = 1.0
    gamma: float = 1.0
    tau: float = 1.0

    def __post_init__(self) -> None:
        kind = RelaxKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be positive, got {self.tau}")
        if kind is RelaxKind.DEBYE and (self.alpha, self.gamma) != (1, 1):
            raise DomainError("Debye relaxation has alpha = gamma = 1")
        if kind is RelaxKind.COLE_COLE and self.gamma != 1:
            raise DomainError("Cole-Cole relaxation has gamma = 1")
        if kind is RelaxKind.DAVIDSON_COLE and (self.alpha != 1 or not 0 < self.gamma <= 1):
            raise DomainError("Davidson-Cole relaxation has alpha = 1 and 0 < gamma <= 1")
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.alpha * self.gamma <= 1:
            raise DomainError(f"alpha*gamma must lie in (0, 1], got {self.alpha * self.gamma}")

    @classmethod
    def debye(cls, tau: float = 1.0) -> RelaxModel:
        return cls(RelaxKind.DEBYE, 1.0, 1.0, tau)

    @classmethod
    def cole_cole(cls, alpha: float, tau: float = 1.0) -> RelaxModel:
        return cls(RelaxKind.COLE_COLE, alpha, 1.0, tau)

    @classmethod
    def davidson_cole(cls, gamma: float, tau: float = 1.0) -> RelaxModel:
        return cls(RelaxKind.DAVIDSON_COLE, 1.0, gamma, tau)

    @classmethod
    def havriliak_negami(cls, alpha: float, gamma: float, tau: float = 1.0) -> RelaxModel:
        return cls(RelaxKind.HAVRILIAK_NEGAMI, alpha, gamma, tau)


def response_laplace(m: RelaxModel, s: complex) -> complex:
    """Laplace transform of the response function, ``(1 + (s tau)**alpha)**(-gamma)``."""
    s = complex(s)
    return complex((1 + (s * m.tau) ** m.alpha) ** (-m.gamma))


def susceptibility(m: RelaxModel, omega: float) -> complex:
    """Normalised complex susceptibility at angular frequency ``omega``."""
    return response_laplace(m, 1j * omega)


def response(m: RelaxModel, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Response function ``phi(t)``, the density of the decay, for ``t > 0``."""
    if not t > 0:
        raise DomainError("the response function is evaluated at t > 0")
    x = t / m.tau
    if m.kind is RelaxKind.DEBYE:
        return math.exp(-x) / m.tau
    if m.kind is RelaxKind.DAVIDSON_COLE:
        # gamma density: x**(gamma-1) exp(-x) / Gamma(gamma)
        return math.exp((m.gamma - 1) * math.log(x) - x - special.gammaln(m.gamma)) / m.tau
    ag = m.alpha * m.gamma
    return x ** (ag - 1) * _E(m.alpha, ag, m.gamma, -(x ** m.alpha), cfg) / m.tau


def relaxation(m: RelaxModel, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Relaxation function ``Psi(t) = 1 - int_0^t phi``; ``Psi(0) = 1``."""
    if t < 0:
        raise DomainError("the relaxation function is evaluated at t >= 0")
    if t == 0:
        return 1.0
    x = t / m.tau
    if m.kind is RelaxKind.DEBYE:
        return math.exp(-x)
    if m.kind is RelaxKind.DAVIDSON_COLE:
        return float(special.gammaincc(m.gamma, x))
    if m.kind is RelaxKind.COLE_COLE:
        return _E(m.alpha, 1.0, 1.0, -(x ** m.alpha), cfg)
    ag = m.alpha * m.gamma
    return 1.0 - x ** ag * _E(m.alpha, ag + 1, m.gamma, -(x ** m.alpha), cfg)


def hn_asymptotic(m: RelaxModel, t: float, regime: Regime | str) -> float:
    """Leading small-time or large-time behaviour of the relaxation function."""
    regime = Regime(regime)
    if not t > 0:
        raise DomainError("t must be positive")
    x = t / m.tau
    if regime is Regime.SMALL:
        ag = m.alpha * m.gamma
        return 1.0 - x ** ag / math.gamma(1 + ag)
    if m.alpha == 1:
        raise DomainError("the power-law tail needs alpha < 1; for alpha = 1 the decay is exponential")
    return m.gamma * x ** (-m.alpha) / math.gamma(1 - m.alpha)


def hn_relaxation_residual(m: RelaxModel, t_grid, h: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Residual of the relaxation equation on a GL grid of step ``h``.

    The relaxation function is sampled on ``0, h, ..., T`` with
    ``T = max(t_grid)``, the regularised derivative with parameters
    ``(alpha, alpha*gamma, gamma, -tau**-alpha)`` is applied, and the largest
    ``|D Psi + tau**(-alpha*gamma)|`` over the grid points nearest to
    ``t_grid`` is returned.
    """
    t_eval = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_eval <= 0):
        raise DomainError("residual points must be positive")
    n = int(math.ceil(t_eval.max() / h - 1e-9))
    t = h * np.arange(n + 1)
    psi = np.array([relaxation(m, s, cfg) for s in t])
    ag = m.alpha * m.gamma
    spec = OperatorSpec(OperatorKind.DERIV_REGULARIZED,
                        KernelParams.of(m.alpha, ag, m.gamma, -m.tau ** (-m.alpha)))
    d = apply_gl(spec, GridFn(0.0, h, psi), initial=[1.0])
    idx = np.clip(np.rint(t_eval / h).astype(int), 1, n)
    return float(np.max(np.abs(d.values[idx] + m.tau ** (-ag))))


# --------------------------------------------------------------------------- viscoelasticity


@dataclass(frozen=True)
class ViscoParams:
    """Maxwell-Prabhakar material with ``sigma + a D sigma = b D epsilon``.

    ``a`` carries units of time**beta, ``b`` of stress*time**beta and ``lam``
    of time**-alpha.  Construction checks numerically that the creep
    compliance is nondecreasing and the relaxation modulus positive on
    ``check_window`` and warns when either fails.
    """

    a: float
    b: float
    alpha: float
    beta: float
    gamma: float
    lam: float
    check_window: tuple[float, float] = (1e-3, 1e3)

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise DomainError("a and b must be positive")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        if not 0 < self.beta < 1:
            raise DomainError("beta must lie in (0, 1)")
        if not (math.isfinite(self.gamma) and math.isfinite(self.lam)):
            raise DomainError("gamma and lambda must be finite")
        if self.check_window:
            self._check_material_functions()

    def _check_material_functions(self) -> None:
        lo, hi = self.check_window
        t = np.geomspace(lo, hi, 61)
        try:
            J = np.array([creep_compliance(self, s) for s in t])
        except Exception as exc:  # an unevaluable point also means the region is not certified
            warnings.warn(f"creep compliance could not be checked: {exc}", UserWarning, stacklevel=3)
            return
        if np.any(np.diff(J) < -1e-10 * np.abs(J[1:])):
            warnings.warn("creep compliance decreases on the check window; parameters may be unphysical",
                          UserWarning, stacklevel=3)
        with warnings.catch_warnings():
            warnings.simplefilter("error", CancellationWarning)
            for s in t:
                try:
                    g = relaxation_modulus(self, s)
                except (CancellationWarning, CancellationFailure, NoConvergence):
                    break
                if g <= 0:
                    warnings.warn(f"relaxation modulus is not positive at t = {s:.3g}",
                                  UserWarning, stacklevel=3)
                    break


def creep_compliance(v: ViscoParams, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """``J(t) = a/b + t**beta/b * E^gamma_{alpha,beta+1}(lam t**alpha)``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return v.a / v.b
    return v.a / v.b + t ** v.beta / v.b * _E(v.alpha, v.beta + 1, v.gamma, v.lam * t ** v.alpha, cfg)


def relaxation_modulus(v: ViscoParams, t: float, K: int = _G_TERM_CAP,
                       cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """``G(t) = (b/a) sum_n (-t**beta/a)**n E^{gamma n}_{alpha, beta n + 1}(lam t**alpha)``.

    The alternating series is summed with ``math.fsum`` until two
    consecutive terms are negligible.  A :class:`CancellationWarning` is
    emitted when the largest term exceeds the result by more than six
    orders of magnitude, which happens once ``t**beta/a`` is large.
    """
    if not t > 0:
        raise DomainError("the relaxation modulus is evaluated at t > 0")
    x = -(t ** v.beta) / v.a
    zl = v.lam * t ** v.alpha
    terms: list[float] = []
    abs_err = 0.0
    small = 0
    log_x = math.log(abs(x))
    for n in range(K + 1):
        log_scale = n * log_x
        if log_scale > 700:
            raise NoConvergence(f"terms of G overflow at t = {t}")
        p = PrabhakarParams(v.alpha, v.beta * n + 1, v.gamma * n)
        partial = math.fsum(terms)
        bound = magnitude_bound(p, zl) * math.exp(log_scale)
        if n > 0 and bound <= 1e-17 * abs(partial):
            # negligible by a rigorous bound; no need to evaluate it
            abs_err += bound
            small += 1
            if small >= 2:
                break
            continue
        try:
            res = evaluate_with_fallback(p, zl, cfg)
        except Unevaluable as exc:
            raise CancellationFailure(f"a term of the G series cannot be evaluated: {exc}") from exc
        term = (-1.0) ** n * math.exp(log_scale) * res.value.real
        terms.append(term)
        abs_err += abs(term) * res.est_error
        partial = math.fsum(terms)
        if abs(term) <= 1e-17 * abs(partial):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise NoConvergence(f"series for G did not settle within {K} terms at t = {t}")
    total = math.fsum(terms)
    if total == 0 or abs_err >= 0.1 * abs(total):
        raise CancellationFailure(f"G series at t = {t} has no reliable digits "
                                  f"(error bound {abs_err:.2e} against sum {total:.2e})")
    biggest = max(abs(u) for u in terms)
    if biggest > _G_CANCELLATION * abs(total) or abs_err > 1e-8 * abs(total):
        lost = math.log10(max(biggest * 1e-16, abs_err) / abs(total)) + 16
        warnings.warn(f"relaxation modulus at t = {t} lost about {lost:.0f} digits to cancellation",
                      CancellationWarning, stacklevel=2)
    return v.b / v.a * total


def creep_laplace(v: ViscoParams, s: complex) -> complex:
    """``s J~(s) = a/b + 1/(b s**beta (1 - lam s**-alpha)**gamma)``."""
    s = complex(s)
    return v.a / v.b + 1 / (v.b * s ** v.beta * (1 - v.lam * s ** (-v.alpha)) ** v.gamma)


def relaxation_laplace(v: ViscoParams, s: complex, t_max: float | None = None) -> complex:
    """``s G~(s)`` by quadrature of ``G`` against ``exp(-s t)`` in ``log t``.

    The integral is cut where ``exp(-Re(s) t)`` drops below ``1e-17``, or at
    ``t_max`` if given.
    """
    s = complex(s)
    if not s.real > 0:
        raise DomainError("the Laplace quadrature needs Re(s) > 0")
    upper = t_max if t_max is not None else 40.0 / s.real
    lo = math.log(1e-14)
    hi = math.log(upper)
    cache: dict[float, float] = {}

    def G(x: float) -> float:
        if x not in cache:
            cache[x] = relaxation_modulus(v, math.exp(x))
        return cache[x]

    def part(fn):
        val, _ = integrate.quad(fn, lo, hi, limit=200, epsabs=0.0, epsrel=1e-10)
        return val

    def re(x):
        t = math.exp(x)
        return (np.exp(-s * t) * t).real * G(x)

    def im(x):
        t = math.exp(x)
        return (np.exp(-s * t) * t).imag * G(x)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        warnings.simplefilter("always", CancellationWarning)
        head = v.b / v.a * complex(-np.expm1(-s * 1e-14)) / s  # G ~ b/a below the cut
        value = complex(part(re), part(im)) + head
    lossy = [w for w in caught if issubclass(w.category, CancellationWarning)]
    if lossy:
        warnings.warn(f"{len(lossy)} samples of G in the Laplace quadrature lost digits to cancellation",
                      CancellationWarning, stacklevel=2)
    return s * value


def reciprocity_residual(v: ViscoParams, s: complex) -> float:
    """``|s J~(s) * s G~(s) - 1|`` with ``G~`` from numerical Laplace quadrature."""
    return abs(creep_laplace(v, s) * relaxation_laplace(v, s) - 1)


# --------------------------------------------------------------------------- diffusion


class MsdKind(str, enum.Enum):
    SUB_TO_NORMAL = "sub_to_normal"
    SUB_TO_PLATEAU = "sub_to_plateau"


@dataclass(frozen=True)
class MsdModel:
    """Tempered fractional diffusion with exponent ``0 < alpha < 1`` and truncation rate ``b``."""

    kind: MsdKind
    alpha: float
    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MsdKind(self.kind))
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise DomainError("b must be positive")


def msd(m: MsdModel, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Mean squared displacement.

    Sub-to-normal: ``2 t**alpha E^{alpha-1}_{1,alpha+1}(-b t)``, linear for
    large t.  Sub-to-plateau: ``2 t**alpha E^{alpha}_{1,alpha+1}(-b t)``,
    the inverse Laplace transform of ``2 / (s (s+b)**alpha)``, which tends
    to ``2 b**-alpha``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    a = m.alpha
    g = a - 1 if m.kind is MsdKind.SUB_TO_NORMAL else a
    return 2 * t ** a * _E(1.0, a + 1, g, -m.b * t, cfg)


__all__ = [
    "MsdKind", "MsdModel", "Regime", "RelaxKind", "RelaxModel", "ViscoParams", "creep_compliance",
    "creep_laplace", "hn_asymptotic", "hn_relaxation_residual", "msd", "reciprocity_residual",
    "relaxation", "relaxation_laplace", "relaxation_modulus", "response", "response_laplace",
    "susceptibility",
]
