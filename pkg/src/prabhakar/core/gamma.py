"""Gamma-function helpers: Pochhammer symbols and an extended-precision 1/Gamma.

The series evaluator needs each term to carry a relative error well below
double precision so that sums with eight digits of cancellation still come
out right to about ten digits.  ``rgamma_ld`` provides 1/Gamma in numpy's
``longdouble`` (80-bit on x86) using Stirling's series after an upward shift.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

LD = np.longdouble
LD_EPS = float(np.finfo(LD).eps)

_PI_LD = LD("3.14159265358979323846264338327950288")
_HALF_LOG_2PI_LD = LD("0.918938533204672741780329736405617639")
_STIRLING_SHIFT = 20

# B_{2n} / (2n (2n-1)) for n = 1..9
_STIRLING = [LD(1) / LD(12), LD(-1) / LD(360), LD(1) / LD(1260), LD(-1) / LD(1680),
             LD(1) / LD(1188), LD(-691) / LD(360360), LD(1) / LD(156), LD(-3617) / LD(122400),
             LD(43867) / LD(244188)]


def pochhammer(gamma: float, k: int) -> float:
    """Rising factorial ``(gamma)_k = gamma (gamma+1) ... (gamma+k-1)``.

    Small ``k`` uses the direct product; larger ``k`` uses ``scipy.special.poch``
    and falls back to log-gamma with explicit sign tracking on overflow.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    if gamma <= 0 and float(gamma).is_integer() and k > -gamma:
        return 0.0
    if k <= 40:
        out = 1.0
        for j in range(k):
            out *= gamma + j
        return out
    value = float(special.poch(gamma, k))
    if math.isfinite(value):
        return value
    logabs, sign = log_pochhammer(gamma, k)
    return sign * math.exp(logabs) if logabs < 709.78 else sign * math.inf


def log_pochhammer(gamma: float, k: int) -> tuple[float, float]:
    """Return ``(log|(gamma)_k|, sign)``; the sign is 0 when the product vanishes."""
    if k == 0:
        return 0.0, 1.0
    if gamma <= 0 and float(gamma).is_integer() and k > -gamma:
        return -math.inf, 0.0
    hi = gamma + k
    logabs = float(special.gammaln(hi) - special.gammaln(gamma))
    sign = float(special.gammasgn(hi) * special.gammasgn(gamma))
    return logabs, sign


def rgamma(x):
    """Reciprocal gamma in double precision, zero at the poles of Gamma."""
    return special.rgamma(x)


def rgamma_ld(x) -> np.ndarray:
    """Reciprocal gamma evaluated in ``longdouble``.

    Accepts scalars or arrays; returns an array of ``longdouble``.  Exactly
    zero at nonpositive integers.  Relative accuracy is a few units of the
    extended-precision epsilon for ``|x|`` up to a few hundred.
    """
    x = np.atleast_1d(np.asarray(x, dtype=LD))
    out = np.empty_like(x)
    poles = (x <= 0) & (x == np.floor(x))
    out[poles] = 0
    refl = (x < 0.5) & ~poles
    direct = ~(refl | poles)
    if np.any(direct):
        out[direct] = 1 / _gamma_pos(x[direct])
    if np.any(refl):
        xr = x[refl]
        # 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi, with exact reduction of x mod 2
        red = xr - 2 * np.round(xr / 2)
        out[refl] = np.sin(_PI_LD * red) * _gamma_pos(1 - xr) / _PI_LD
    return out


def _gamma_pos(x: np.ndarray) -> np.ndarray:
    """Gamma(x) for x >= 0.5 in longdouble."""
    shift = np.maximum(0, np.ceil(_STIRLING_SHIFT - x)).astype(int)
    y = x + shift
    corr = np.zeros_like(y)
    inv_y = 1 / y
    inv_y2 = inv_y * inv_y
    p = inv_y.copy()
    for c in _STIRLING:
        corr += c * p
        p *= inv_y2
    # y^(y-1/2) split in two halves to keep the power well inside range
    half = np.power(y, (y - LD(0.5)) / 2)
    g = half * np.exp(-y + _HALF_LOG_2PI_LD + corr) * half
    if np.any(shift):
        denom = np.ones_like(x)
        xs = x.copy()
        for _ in range(int(shift.max())):
            active = shift > 0
            denom[active] *= xs[active]
            xs[active] += 1
            shift = shift - active
        g = g / denom
    return g
