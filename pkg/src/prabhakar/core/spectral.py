"""Spectral (Laplace-Stieltjes) representation, complete monotonicity and Mellin transform."""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np
from scipy import integrate, special

from prabhakar.errors import DomainError, OutOfCMRange
from prabhakar.types import MACHINE_EPS, EvalResult, Method, PrabhakarParams


class CMRange(str, enum.Enum):
    """Where the parameters sit with respect to complete monotonicity of ``E(-t**alpha)``."""

    CLASSIC = "classic"
    EXTENDED = "extended"
    OUTSIDE = "outside"


def is_cm_range(p: PrabhakarParams) -> CMRange:
    """Classify ``(alpha, beta, gamma)`` by the complete-monotonicity conditions."""
    a, b, g = p.alpha, p.beta, p.gamma
    if 0 < a <= 1 and 0 < a * g <= b <= 1:
        return CMRange.CLASSIC
    if 0 < a < 1 and 0 < a * g <= b:
        return CMRange.EXTENDED
    return CMRange.OUTSIDE


def theta_alpha(alpha: float, r):
    """Angle of ``r**alpha * exp(1j*alpha*pi) + 1``, taken in ``[0, pi]``."""
    ra = np.power(r, alpha)
    return np.arctan2(ra * math.sin(alpha * math.pi), ra * math.cos(alpha * math.pi) + 1)


def spectral_density(p: PrabhakarParams, r: float) -> float:
    """Spectral density ``K(r)`` with ``t**(beta-1) E(-t**alpha) = int_0^inf exp(-r t) K(r) dr``.

    At ``r = 0`` the limit is returned: 0 when ``beta <= alpha*gamma``,
    a signed infinity when ``beta > alpha*gamma`` and ``sin((beta-alpha*gamma)*pi) != 0``,
    and the first nonvanishing order otherwise.  For ``alpha = 1`` the density
    is singular at ``r = 1`` and ``inf`` is returned there.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    if not (0 < a <= 1):
        raise DomainError("the spectral density is defined for 0 < alpha <= 1")
    if r < 0 or not math.isfinite(r):
        raise DomainError(f"r must be a finite nonnegative number, got {r}")
    d = b - a * g
    if r == 0:
        if d <= 0:
            return 0.0
        s = math.sin(d * math.pi)
        if abs(s) > 1e-15:
            return math.copysign(math.inf, s)
        # sin(g*theta + k*pi) ~ (-1)^k g sin(a*pi) r^a near the origin
        k = round(d)
        lead = (-1) ** k * g * math.sin(a * math.pi) / math.pi
        expo = a - d
        if lead == 0 or expo > 0:
            return 0.0
        if expo == 0:
            return lead
        return math.copysign(math.inf, lead)
    sign, log_mag = _log_density(p, r)
    if sign == 0:
        return 0.0
    if log_mag > 709:
        return math.copysign(math.inf, sign)
    return sign * math.exp(log_mag)


def _log_density(p: PrabhakarParams, r: float) -> tuple[float, float]:
    """Sign and log magnitude of ``K(r)`` for ``r > 0``."""
    a, b, g = p.alpha, p.beta, p.gamma
    d = b - a * g
    th = float(theta_alpha(a, r))
    ra = r ** a
    base = ra * ra + 2 * ra * math.cos(a * math.pi) + 1
    num = math.sin(g * th + d * math.pi)
    if a == 1:
        base = (r - 1) ** 2
        if r == 1:
            return (0.0, -math.inf) if num == 0 else (1.0, math.inf)
        if r > 1:
            num = math.sin(g * math.pi + d * math.pi)
    if num == 0:
        return 0.0, -math.inf
    # r**(-d) and base**(g/2) overflow separately for large gamma or tiny r
    return math.copysign(1.0, num), math.log(abs(num) / math.pi) - d * math.log(r) - 0.5 * g * math.log(base)


def spectral_laplace(p: PrabhakarParams, t: float) -> tuple[float, float]:
    """``int_0^inf exp(-r t) K(r) dr`` and its absolute error.

    The error covers quadrature and the rounding of ``beta - alpha*gamma``,
    which the near-origin mass amplifies by ``1/(1 - beta + alpha*gamma)``
    before cancelling against the rest of the integral.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    if a == 1 and g == 1 and b == 1:
        return math.exp(-t), 0.0
    lt = math.log(t)

    def f(x: float) -> float:
        r = math.exp(x)
        v = r * t
        if v > 745 or r == 0:
            return 0.0
        sign, log_mag = _log_density(p, r)
        return sign * math.exp(min(log_mag + x - v, 709.0)) if sign else 0.0

    # below r0 both exp(-r t) and the density's r**alpha corrections are negligible
    d = b - a * g
    r0 = min(1e-16 / t, 1e-8 ** (1 / a))
    head = (math.sin(d * math.pi) * r0 ** (1 - d) / (1 - d)
            + g * math.sin((a - d) * math.pi) * r0 ** (1 + a - d) / (1 + a - d)) / math.pi
    cuts = sorted({math.log(r0), -5.0 - lt, -lt, math.log(40) - lt, 0.0})
    upper = math.log(800) - lt
    pieces = list(zip(cuts[:-1], cuts[1:])) + [(cuts[-1], upper)]
    total, err, mass = head, 0.0, abs(head)
    for lo, hi in pieces:
        if hi <= lo or hi <= cuts[0]:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
            m, _ = integrate.quad(lambda x: abs(f(x)), lo, hi, epsabs=0.0, epsrel=1e-3, limit=200)
        total += v
        err += e
        mass += m
    slack = max(1.0, abs(b), a * g)
    return total, err + 4 * MACHINE_EPS * mass * (1 + slack / (1 - d))


def eval_spectral(p: PrabhakarParams, t: float) -> EvalResult:
    """``E(-t**alpha)`` from the spectral integral, by quadrature in ``log r``.

    Needs the completely monotone range and ``beta - alpha*gamma < 1`` so that
    the density is integrable at the origin.  Near the origin the density is
    integrated from its two-term expansion.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    cm = is_cm_range(p)
    if cm is CMRange.OUTSIDE:
        raise OutOfCMRange(f"{p} is outside the completely monotone range")
    gap = 1 - (p.beta - p.alpha * p.gamma)
    slack = max(1.0, abs(p.beta), p.alpha * p.gamma)
    if gap <= 1e-6 * slack:
        # at gap -> 0 the mass collapses onto r = 0 and rounding in beta - alpha*gamma dominates
        raise OutOfCMRange("spectral integral needs beta - alpha*gamma < 1 (not within rounding of 1)")
    if p.alpha == 1 and p.gamma == 1 and p.beta != 1:
        raise OutOfCMRange("alpha = gamma = 1 needs beta = 1")
    integral, err = spectral_laplace(p, t)
    scale = t ** (1 - p.beta)
    value = integral * scale
    est = err / abs(integral) if integral != 0 else math.inf
    return EvalResult(complex(value), est, Method.SPECTRAL, work=0)


def mellin_of_E(p: PrabhakarParams, s: complex) -> complex:
    """Mellin transform of ``t -> E(-t)``: Gamma(s)Gamma(gamma-s)/(Gamma(gamma)Gamma(beta-alpha s))."""
    s = complex(s)
    if not (0 < s.real < p.gamma):
        raise DomainError(f"Re(s) must lie in (0, gamma) = (0, {p.gamma}), got {s}")
    logs = special.loggamma(s) + special.loggamma(p.gamma - s) - special.loggamma(complex(p.gamma))
    value = np.exp(logs) * special.rgamma(p.beta - p.alpha * s)
    if s.imag == 0:
        return complex(float(np.real(value)), 0.0)
    return complex(value)
