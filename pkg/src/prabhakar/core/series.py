"""Truncated power series of the Prabhakar function."""

from __future__ import annotations

import math
import warnings

import numpy as np

from prabhakar.core.gamma import LD, LD_EPS, rgamma
from prabhakar.core.gamma import rgamma_ld
from prabhakar.errors import CancellationWarning, NoConvergence
from prabhakar.types import DEFAULT_CONFIG, MACHINE_EPS, EvalConfig, EvalResult, Method, PrabhakarParams

#: Largest argument for which Gamma is finite in double precision.
GAMMA_OVERFLOW = 171.624
#: Ratio max|term| / |sum| above which the result is flagged.
CANCELLATION_RATIO = 1e8

_CHUNK = 64


def overflow_bound(p: PrabhakarParams) -> int:
    """Number of admissible terms: all k with ``alpha*k + beta < 171.624``."""
    limit = (GAMMA_OVERFLOW - p.beta) / p.alpha
    if limit <= 0:
        return 0
    n = math.ceil(limit)
    return n


def exact_constant(p: PrabhakarParams) -> EvalResult:
    """``1/Gamma(beta)``: the value at z = 0 and for gamma = 0."""
    return EvalResult(complex(rgamma(p.beta)), MACHINE_EPS, Method.SERIES, work=1)


def eval_series(p: PrabhakarParams, z: complex, cfg: EvalConfig = DEFAULT_CONFIG,
                *, warn: bool = True) -> EvalResult:
    """Sum the defining power series until two consecutive terms fall below ``rel_tol``.

    Terms are formed in extended precision so that the reported cancellation
    ratio R = max|term|/|sum| costs about ``R * 1e-19`` rather than
    ``R * 1e-16`` in relative accuracy.  Raises :class:`NoConvergence` when
    the stopping rule has not fired within ``cfg.max_terms`` terms or before
    the Gamma overflow bound.
    """
    z = complex(z)
    if z == 0 or p.gamma == 0:
        return exact_constant(p)
    n_cap = min(cfg.max_terms, overflow_bound(p))
    if n_cap < 2:
        raise NoConvergence("Gamma overflow bound leaves fewer than two terms")

    tol = cfg.rel_tol
    zl = np.clongdouble(z)
    alpha, beta, gamma = LD(p.alpha), LD(p.beta), LD(p.gamma)
    # Stopping is only allowed past the poles of Gamma and the sign changes of (gamma)_k.
    k_safe = max(1, math.ceil(-p.gamma) + 1, math.ceil((1 - p.beta) / p.alpha))

    terms = np.empty(0, dtype=np.clongdouble)
    coeff = np.clongdouble(1)
    stop = None
    start = 0
    while start < n_cap:
        stop_k = min(n_cap, start + _CHUNK * (1 + start // _CHUNK))
        k = np.arange(start, stop_k)
        kl = k.astype(LD)
        ratio = np.where(k == 0, np.clongdouble(1),
                         (gamma + kl - 1) * zl / np.maximum(kl, 1))
        prods = coeff * np.cumprod(ratio)
        coeff = prods[-1]
        chunk = prods * rgamma_ld(alpha * kl + beta)
        if not np.all(np.isfinite(chunk)):
            raise NoConvergence(f"series terms overflow at |z| = {abs(z):.3g}")
        terms = np.concatenate([terms, chunk])
        partial = np.cumsum(terms)
        small = np.abs(terms) <= tol * np.abs(partial)
        ok = small[1:] & small[:-1]
        ok[: max(0, k_safe - 1)] = False
        hits = np.flatnonzero(ok)
        if hits.size:
            stop = int(hits[0]) + 1
            break
        start = stop_k
    if stop is None:
        why = "max_terms" if cfg.max_terms < overflow_bound(p) else "the Gamma overflow bound"
        raise NoConvergence(f"series did not converge within {n_cap} terms ({why})")

    used = terms[: stop + 1]
    total = np.sum(used)
    value = complex(total)
    mag = float(abs(total))
    peak = float(np.max(np.abs(used)))
    if mag == 0:
        ratio_r = math.inf if peak > 0 else 1.0
    else:
        ratio_r = peak / mag
    cancellation = ratio_r > CANCELLATION_RATIO
    # first omitted term, inflated by a geometric tail when terms decay slowly
    last = float(abs(terms[stop]))
    if stop + 1 < terms.size:
        omitted = float(abs(terms[stop + 1]))
    else:
        omitted = last * tol
    if 0 < omitted < last:
        omitted /= 1 - omitted / last
    if mag == 0:
        est = math.inf
    else:
        est = omitted / mag + MACHINE_EPS + 4 * (stop + 1) * LD_EPS * ratio_r
    if cancellation and warn:
        warnings.warn(f"series lost about {math.log10(ratio_r):.1f} digits to cancellation "
                      f"at z = {z}", CancellationWarning, stacklevel=2)
    return EvalResult(value, est, Method.SERIES, work=stop + 1, cancellation=cancellation,
                      notes=(f"R={ratio_r:.3g}",))
