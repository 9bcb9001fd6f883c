"""Method selection for the Prabhakar function."""

from __future__ import annotations

import cmath
import math
import warnings

from prabhakar.core.asymptotic import eval_asymptotic
from prabhakar.core.inversion import eval_inversion, inversion_applicable, is_rational_case
from prabhakar.core.series import eval_series, exact_constant
from prabhakar.core.spectral import CMRange, eval_spectral, is_cm_range
from prabhakar.errors import CancellationWarning, PrabhakarError, Unevaluable
from prabhakar.types import (DEFAULT_CONFIG, EvalConfig, EvalResult, KernelParams, Method,
                             PrabhakarParams)


def _spectral_at(p: PrabhakarParams, z: complex, cfg: EvalConfig) -> EvalResult:
    if z.imag != 0 or z.real >= 0:
        raise PrabhakarError("the spectral route needs z on the negative real axis")
    return eval_spectral(p, (-z.real) ** (1 / p.alpha))


def _run(method: Method, p: PrabhakarParams, z: complex, cfg: EvalConfig) -> EvalResult:
    if method is Method.SERIES:
        return eval_series(p, z, cfg, warn=False)
    if method is Method.ASYMPTOTIC:
        return eval_asymptotic(p, z, cfg)
    if method is Method.INVERSION:
        return eval_inversion(p, z, cfg)
    if method is Method.SPECTRAL:
        return _spectral_at(p, z, cfg)
    raise ValueError(f"not a concrete method: {method}")


def evaluate(p: PrabhakarParams, z: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """Evaluate ``E^gamma_{alpha,beta}(z)``, choosing a method unless ``cfg.method`` fixes one.

    Auto mode tries, in order: the series for ``|z| <= cfg.series_radius``,
    the series up to ``cfg.series_max_radius`` if it shows no cancellation,
    the asymptotic expansions, the contour inversion, the spectral integral
    on the negative real axis, and finally the series at any modulus.  A
    route is accepted when its estimated error is within ``cfg.accept_tol``;
    a series value that met the tolerance despite heavy cancellation is
    returned only when every other route fails.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise Unevaluable(f"z must be finite, got {z}")
    if z == 0 or p.gamma == 0:
        return exact_constant(p)
    if cfg.method is not Method.AUTO:
        res = _run(cfg.method, p, z, cfg)
        if res.cancellation:
            warnings.warn(f"series result at z = {z} is affected by cancellation",
                          CancellationWarning, stacklevel=2)
        return res

    attempts: dict[str, str] = {}
    r = abs(z)

    def accept(res: EvalResult) -> bool:
        return res.est_error <= cfg.accept_tol

    if is_rational_case(p) and r > cfg.series_radius:
        res = eval_inversion(p, z, cfg)
        if accept(res):
            return res
        attempts["inversion"] = f"error estimate {res.est_error:.2e}"

    fallback = None
    if r <= cfg.series_max_radius or (p.gamma <= 0 and p.gamma_is_integer):
        try:
            res = eval_series(p, z, cfg, warn=False)
            if accept(res) and (r <= cfg.series_radius or not res.cancellation):
                return res
            if accept(res):
                # certified despite cancellation; kept in case nothing better turns up
                fallback = res
            attempts["series"] = (f"cancellation ratio {res.notes[0]}" if res.cancellation
                                  else f"error estimate {res.est_error:.2e}")
        except PrabhakarError as exc:
            attempts["series"] = str(exc)

    try:
        return eval_asymptotic(p, z, cfg)
    except PrabhakarError as exc:
        attempts["asymptotic"] = str(exc)

    if inversion_applicable(p, z):
        try:
            res = eval_inversion(p, z, cfg)
            if not accept(res) and abs(res.value) > 0:
                # ask the contour for an absolute accuracy matched to the value's size
                target = max(1e-15, cfg.rel_tol * abs(res.value))
                res = eval_inversion(p, z, cfg, target_acc=target)
            if accept(res):
                return res
            attempts["inversion"] = f"error estimate {res.est_error:.2e}"
        except PrabhakarError as exc:
            attempts["inversion"] = str(exc)
    else:
        attempts["inversion"] = "preconditions not met"

    if z.imag == 0 and z.real < 0 and is_cm_range(p) is not CMRange.OUTSIDE:
        try:
            res = _spectral_at(p, z, cfg)
            if accept(res):
                return res
            attempts["spectral"] = f"error estimate {res.est_error:.2e}"
        except PrabhakarError as exc:
            attempts["spectral"] = str(exc)

    if r > cfg.series_max_radius:
        try:
            big = EvalConfig(rel_tol=cfg.rel_tol, max_terms=max(cfg.max_terms, 4000),
                             accept_factor=cfg.accept_factor)
            res = eval_series(p, z, big, warn=False)
            if accept(res):
                return res
            attempts["series (any radius)"] = f"error estimate {res.est_error:.2e}"
        except PrabhakarError as exc:
            attempts["series (any radius)"] = str(exc)

    if fallback is not None:
        return fallback
    raise Unevaluable(f"no method certified E at alpha={p.alpha}, beta={p.beta}, "
                      f"gamma={p.gamma}, z={z} (arg z = {cmath.phase(z):.4g})", attempts)


def evaluate_with_fallback(p: PrabhakarParams, z: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """Like :func:`evaluate`, but return an uncertified estimate instead of failing.

    Meant for terms of outer series where only the absolute error of each
    term matters and the caller accumulates ``|value| * est_error``.  Tries
    the certified route, then keeps whichever of the long series and the
    contour inversion reports the smaller error, then a loose tolerance;
    raises :class:`Unevaluable` only if all of these fail.
    """
    try:
        return evaluate(p, z, cfg)
    except Unevaluable:
        pass
    z = complex(z)
    candidates = []
    try:
        candidates.append(eval_series(p, z, EvalConfig(rel_tol=cfg.rel_tol, max_terms=4000), warn=False))
    except PrabhakarError:
        pass
    if inversion_applicable(p, z):
        try:
            candidates.append(eval_inversion(p, z, cfg))
        except PrabhakarError:
            pass
    if candidates:
        return min(candidates, key=lambda res: res.est_error)
    return evaluate(p, z, EvalConfig(rel_tol=1e-6, accept_factor=1e4))


def magnitude_bound(p: PrabhakarParams, z: complex) -> float:
    """Upper bound ``E^{|gamma|}_{alpha,beta}(|z|)`` on ``|E^gamma_{alpha,beta}(z)|``.

    Valid when ``Gamma(alpha k + beta) > 0`` for every k, i.e. ``beta > 0``;
    returns ``inf`` when the bound cannot be computed.
    """
    if p.beta <= 0:
        return math.inf
    try:
        res = eval_series(p.with_(gamma=abs(p.gamma)), abs(complex(z)),
                          EvalConfig(rel_tol=1e-6, max_terms=4000), warn=False)
    except PrabhakarError:
        return math.inf
    return abs(res.value.real) * (1 + res.est_error)


def kernel(kp: KernelParams, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """Prabhakar kernel ``t**(beta-1) E^gamma_{alpha,beta}(lambda t**alpha)`` for ``t > 0``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    res = evaluate(kp.base, complex(kp.lam) * t ** kp.alpha, cfg)
    scale = t ** (kp.beta - 1)
    return EvalResult(res.value * scale, res.est_error, res.method_used, res.work,
                      res.cancellation, res.notes)
