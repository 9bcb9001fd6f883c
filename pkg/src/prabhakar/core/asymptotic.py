"""Large-|z| expansions: the algebraic series A and the exponential series E."""

from __future__ import annotations

import cmath
import math

import numpy as np

from scipy import special

from prabhakar.core.gamma import rgamma
from prabhakar.errors import OutOfRegime, Unsupported
from prabhakar.types import DEFAULT_CONFIG, MACHINE_EPS, EvalConfig, EvalResult, Method, PrabhakarParams

_MAX_ALG_TERMS = 400
_LOG_MAX = 709.0


def asymptotic_coeff_c(p: PrabhakarParams, k: int) -> float:
    """Coefficient ``c_k`` of the exponential expansion, ``k <= 3``."""
    a, b, g = p.alpha, p.beta, p.gamma
    if k == 0:
        return 1.0
    if k == 1:
        return (g - 1) * (a * g + g - 2 * b) / 2
    if k == 2:
        return ((g - 1) * (g - 2) / 24
                * (3 * (a + 1) ** 2 * g ** 2 - (a + 1) * (a + 12 * b + 5) * g + 12 * b * (1 + b)))
    if k == 3:
        return ((g - 1) * (g - 2) * (g - 3) / 48
                * (g ** 3 * (1 + a) ** 3 - g ** 2 * (1 + a) ** 2 * (5 + a + 6 * b)
                   + 2 * g * (1 + a) * (3 + a * (1 + b) + 11 * b + 6 * b ** 2)
                   - 8 * b * (1 + b) * (2 + b)))
    raise Unsupported("only c_0 .. c_3 are available")


def _exponential_series_is_exact(p: PrabhakarParams) -> bool:
    """For integer 1 <= gamma <= 4 the inverse factorial expansion stops at c_{gamma-1}."""
    return p.gamma_is_natural and p.gamma <= 4


def algebraic_part(p: PrabhakarParams, modulus: float, arg: float) -> tuple[complex, float, int]:
    """Algebraic series at ``w = modulus * exp(1j*arg)``, optimally truncated.

    Returns ``(value, abs_error, terms_used)``.  The error is the modulus of
    the smallest term plus a rounding allowance; only the rounding allowance
    remains when the series terminates.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    if g <= 0 and p.gamma_is_integer:
        n_terms = int(-g) + 1
    else:
        # stay where 1/Gamma of a negative argument is representable
        n_terms = max(1, min(_MAX_ALG_TERMS, int((b + 170) / a - g)))
    k = np.arange(n_terms)
    x = (b - a * g) - a * k
    # Gamma poles, with slack for the rounding in b - a*g
    pole = (x <= 0) & (np.abs(x - np.round(x)) <= 64 * MACHINE_EPS * np.maximum(1.0, np.abs(x)))
    # signs and log-magnitudes: (gamma)_k/k! and 1/Gamma overflow separately for large k
    ratio = (g + k[1:] - 1) / k[1:]
    sign = np.ones(n_terms)
    sign[1:] = np.cumprod(np.sign(ratio))
    sign *= np.where(pole, 0.0, special.gammasgn(np.where(pole, 0.5, x)))
    with np.errstate(divide="ignore"):
        log_abs = np.zeros(n_terms)
        log_abs[1:] = np.cumsum(np.log(np.abs(ratio)))
        log_abs -= np.where(pole, 0.0, special.gammaln(np.where(pole, 0.5, x)))
    base = np.where(sign == 0, 0.0, sign)
    front = cmath.rect(modulus ** (-g), -g * arg)
    nz = np.flatnonzero(base)
    if nz.size == 0:
        return 0j, 0.0, n_terms
    # magnitudes in log form: |w|**-k underflows long before the terms matter
    log_mags = np.where(sign == 0, -np.inf, log_abs - k * math.log(modulus))
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.exp(log_mags) * np.exp(-1j * k * arg) * (-1.0) ** k * np.sign(base)
    if (g <= 0 and p.gamma_is_integer) or nz[-1] < n_terms - 3:
        # the series terminates: exact finite sum
        value = front * complex(np.sum(terms))
        return value, 8 * MACHINE_EPS * abs(front) * float(np.sum(np.abs(terms))), n_terms
    pair = np.maximum(log_mags[1:-1], log_mags[2:])
    cut = int(np.argmin(pair)) + 1
    if pair[cut - 1] > _LOG_MAX or not np.all(np.isfinite(terms[:cut])):
        return complex(math.nan, 0.0), math.inf, cut
    value = front * complex(np.sum(terms[:cut]))
    err = abs(front) * (math.exp(float(pair[cut - 1]))
                        + 8 * MACHINE_EPS * float(np.sum(np.abs(terms[:cut]))))
    return value, err, cut


def exponential_part(p: PrabhakarParams, modulus: float, arg: float) -> tuple[complex, float]:
    """Exponential series at ``z = modulus * exp(1j*arg)`` with c_0..c_3.

    Returns ``(value, abs_error)``; the error is the modulus of the c_3 term
    unless the expansion is known to terminate.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    rg = float(rgamma(g))
    if rg == 0:
        return 0j, 0.0
    root = cmath.rect(modulus ** (1 / a), arg / a)
    log_pref = root.real + (g - b) / a * math.log(modulus) - g * math.log(a) + math.log(abs(rg))
    if log_pref > _LOG_MAX:
        raise OutOfRegime("exponential part overflows double precision")
    phase = root.imag + (g - b) / a * arg
    pref = math.copysign(1.0, rg) * cmath.rect(math.exp(log_pref), phase)
    inv = cmath.rect(modulus ** (-1 / a), -arg / a)
    cs = [asymptotic_coeff_c(p, k) * inv ** k for k in range(4)]
    value = pref * sum(cs)
    err = 8 * MACHINE_EPS * abs(pref) * sum(abs(c) for c in cs)
    if not _exponential_series_is_exact(p):
        err += abs(pref * cs[3])
    return value, err


def exponential_branches(p: PrabhakarParams, z: complex) -> list[int]:
    """Integers r whose rotated argument ``arg z + 2 pi r`` lies within ``alpha*pi``.

    These are the branches of ``z**(1/alpha)`` that correspond to poles on
    the principal sheet.  For ``0 < alpha <= 1`` this keeps ``r = 0`` inside
    the Stokes lines only, for ``1 < alpha < 2`` it adds ``z exp(-+2 pi i)``
    next to the negative axis, and for larger alpha it gives the symmetric
    range ``-P..P`` with ``2P + 1 > alpha``.
    """
    theta = cmath.phase(complex(z))
    lim = p.alpha * math.pi * (1 + 1e-14)
    rmax = math.ceil(p.alpha / 2) + 1
    out: list[int] = []
    for r in range(-rmax, rmax + 1):
        if abs(theta + 2 * math.pi * r) > lim:
            continue
        # two rotations reach the same pole when (r - r')/alpha is an integer (alpha = 1 on the cut)
        if any(abs((r - q) / p.alpha - round((r - q) / p.alpha)) < 1e-12 for q in out):
            continue
        out.append(r)
    return out


def eval_asymptotic(p: PrabhakarParams, z: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """Combine the algebraic and exponential expansions for large ``|z|``.

    Raises :class:`OutOfRegime` when the estimated relative error exceeds
    ``cfg.accept_tol``.
    """
    z = complex(z)
    if z == 0:
        raise OutOfRegime("asymptotic expansions need z != 0")
    modulus, theta = abs(z), cmath.phase(z)
    # A is evaluated at z exp(-+ pi i): minus in the upper half-plane
    arg_w = theta - math.pi if theta >= 0 else theta + math.pi
    alg, alg_err, n_alg = algebraic_part(p, modulus, arg_w)
    value, err = alg, alg_err
    branches = exponential_branches(p, z)
    for r in branches:
        ev, ee = exponential_part(p, modulus, theta + 2 * math.pi * r)
        value += ev
        err += ee
    mag = abs(value)
    est = err / mag if mag > 0 else (0.0 if err == 0 else math.inf)
    if z.imag == 0:
        value = complex(value.real, 0.0)
    if not est <= cfg.accept_tol:
        raise OutOfRegime(f"asymptotic error estimate {est:.2e} exceeds {cfg.accept_tol:.1e} "
                          f"at |z| = {modulus:.4g}")
    return EvalResult(value, est, Method.ASYMPTOTIC, work=n_alg + 4 * len(branches),
                      notes=(f"exponential branches {branches}",))


def negative_axis_leading(p: PrabhakarParams, t: float) -> float:
    """Leading large-t term of ``E(-t**alpha)`` on the negative real axis."""
    if not t > 0:
        raise ValueError("t must be positive")
    a, b, g = p.alpha, p.beta, p.gamma
    if b != a * g:
        return float(t ** (-a * g) * rgamma(b - a * g))
    return float(-g * t ** (-a * g - a) * rgamma(-a))
