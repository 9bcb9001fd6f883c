"""Derivatives in z and the parameter-reduction and summation identities."""

from __future__ import annotations

import enum
import math

import numpy as np

from prabhakar.core.dispatch import evaluate
from prabhakar.core.gamma import pochhammer
from prabhakar.errors import DomainError
from prabhakar.types import DEFAULT_CONFIG, EvalConfig, EvalResult, PrabhakarParams


class ReductionVariant(str, enum.Enum):
    """Which gamma-reduction identity to apply."""

    SHIFT = "shift"
    SHIFT_WITH_Z = "shift_with_z"


def _combine(parts: list[tuple[complex, EvalResult]], scale: complex) -> EvalResult:
    """Linear combination of evaluations with a propagated relative error."""
    value = sum(c * r.value for c, r in parts) * scale
    abs_err = sum(abs(c * r.value) * r.est_error for c, r in parts) * abs(scale)
    mag = abs(value)
    est = abs_err / mag if mag > 0 else math.inf
    methods = {r.method_used for _, r in parts}
    method = parts[0][1].method_used if len(methods) == 1 else parts[-1][1].method_used
    return EvalResult(complex(value), est, method, work=sum(r.work for _, r in parts),
                      cancellation=any(r.cancellation for _, r in parts))


def derivative_z(p: PrabhakarParams, z: complex, m: int, cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """m-th derivative in z: ``(gamma)_m E^{gamma+m}_{alpha, m*alpha+beta}(z)``."""
    if m < 0:
        raise DomainError("derivative order must be nonnegative")
    if m == 0:
        return evaluate(p, z, cfg)
    factor = pochhammer(p.gamma, m)
    res = evaluate(p.with_(beta=m * p.alpha + p.beta, gamma=p.gamma + m), z, cfg)
    return EvalResult(res.value * factor, res.est_error, res.method_used, res.work,
                      res.cancellation, res.notes)


def dzhrbashyan_derivative(p: PrabhakarParams, z: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """First derivative from ``[E_{alpha,beta-1} + (1-beta) E_{alpha,beta}] / (alpha z)``."""
    z = complex(z)
    if z == 0:
        raise DomainError("this derivative formula needs z != 0")
    lower = evaluate(p.with_(beta=p.beta - 1), z, cfg)
    same = evaluate(p, z, cfg)
    return _combine([(1, lower), (1 - p.beta, same)], 1 / (p.alpha * z))


def reduce_gamma(p: PrabhakarParams, z: complex, variant: ReductionVariant = ReductionVariant.SHIFT,
                 cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """``E^{gamma+1}_{alpha,beta}(z)`` assembled from evaluations at level gamma."""
    z = complex(z)
    a, b, g = p.alpha, p.beta, p.gamma
    if g == 0:
        raise DomainError("the reduction identities divide by alpha*gamma; gamma must be nonzero")
    variant = ReductionVariant(variant)
    if variant is ReductionVariant.SHIFT:
        lower = evaluate(p.with_(beta=b - 1), z, cfg)
        same = evaluate(p, z, cfg)
        return _combine([(1, lower), (1 - b + a * g, same)], 1 / (a * g))
    if z == 0:
        raise DomainError("the z-weighted reduction needs z != 0")
    lower = evaluate(p.with_(beta=b - a - 1), z, cfg)
    same = evaluate(p.with_(beta=b - a), z, cfg)
    return _combine([(1, lower), (1 - b + a, same)], 1 / (a * g * z))


def coeff_d(k: int, alpha: float, beta: float) -> np.ndarray:
    """Row ``d_0^(k) .. d_k^(k)`` of the summation-formula coefficients.

    Built level by level with beta held at the target value; the factor at
    level ``i`` is ``1 - beta + alpha*i + j``.
    """
    if k < 0:
        raise DomainError("k must be nonnegative")
    row = np.array([1.0])
    for level in range(1, k + 1):
        new = np.zeros(level + 1)
        new[level] = 1.0
        for j in range(level):
            prev = row[j - 1] if j >= 1 else 0.0
            new[j] = prev + (1 - beta + alpha * level + j) * row[j]
        row = new
    return row


def integer_gamma_via_ml(alpha: float, beta: float, k: int, z: complex, *, z_weighted: bool = False,
                         cfg: EvalConfig = DEFAULT_CONFIG) -> EvalResult:
    """``E^{k+1}_{alpha,beta}(z)`` as a combination of two-parameter Mittag-Leffler functions."""
    z = complex(z)
    if k < 0:
        raise DomainError("k must be nonnegative")
    d = coeff_d(k, alpha, beta)
    base = PrabhakarParams(alpha, beta, 1.0)
    if z_weighted:
        if z == 0:
            raise DomainError("the z-weighted summation formula needs z != 0")
        parts = [(d[j], evaluate(base.with_(beta=beta - alpha * k - j), z, cfg)) for j in range(k + 1)]
        scale = 1 / (alpha ** k * z ** k * math.factorial(k))
    else:
        parts = [(d[j], evaluate(base.with_(beta=beta - j), z, cfg)) for j in range(k + 1)]
        scale = 1 / (alpha ** k * math.factorial(k))
    return _combine(parts, scale)
