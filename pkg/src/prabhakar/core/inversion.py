"""Laplace-transform inversion on a parabolic contour.

The Prabhakar function is the inverse Laplace transform at ``t = 1`` of
``H(s; z) = s**(alpha*gamma - beta) / (s**alpha - z)**gamma``.  The Bromwich
line is deformed into the parabola ``w(u) = mu*(1j*u + 1)**2`` and sampled by
the trapezoidal rule.  Poles of ``H`` lying to the right of the chosen
parabola are accounted for by residues, which is possible when ``gamma`` is a
positive integer.

Contour parameters follow the published optimal-parabola procedure: the
singularities are ordered by ``phi(s) = (Re s + |s|)/2``, each admissible
strip between two consecutive singularities yields candidate ``(mu, h, N)``,
and the candidate with the fewest nodes wins.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from prabhakar.core.gamma import rgamma
from prabhakar.errors import DomainError, NoAdmissibleContour, NonIntegerGamma, OutOfRegime
from prabhakar.types import (DEFAULT_CONFIG, MACHINE_EPS, ContourSpec, EvalConfig, EvalResult,
                             Method, PrabhakarParams)

_LOG_EPS = math.log(MACHINE_EPS)
_MAX_NODES = 200
_LOG_MAX = 709.0
_PHI_ZERO = 1e-15
# stop relaxing the target once it is worse than this
_LOG_GIVE_UP = math.log(1e-2)


@dataclass(frozen=True)
class Pole:
    """A pole ``s*`` of ``H`` with its argument in ``[-pi, pi]`` recorded exactly."""

    modulus: float
    arg: float

    @property
    def value(self) -> complex:
        return cmath.rect(self.modulus, self.arg)

    @property
    def phi(self) -> float:
        s = self.value
        return (s.real + abs(s)) / 2

    def power(self, x: float) -> complex:
        """``s***x`` on the branch fixed by ``arg``."""
        if self.modulus == 0:
            return complex(0.0)
        return cmath.rect(self.modulus ** x, x * self.arg)


@dataclass(frozen=True)
class ContourPlan:
    """Selected contour, the poles left to its right, and the accuracy actually targeted."""

    contour: ContourSpec
    right_poles: tuple[Pole, ...]
    log_epsilon: float


def poles(p: PrabhakarParams, z: complex) -> list[Pole]:
    """Solutions of ``s**alpha = z`` on the principal sheet, ``|arg s| <= pi``."""
    z = complex(z)
    if z == 0:
        return []
    alpha = p.alpha
    theta = cmath.phase(z)
    kmin = math.ceil(-alpha / 2 - theta / (2 * math.pi))
    kmax = math.floor(alpha / 2 - theta / (2 * math.pi))
    mod = abs(z) ** (1 / alpha)
    out = []
    for k in range(kmin, kmax + 1):
        arg = (theta + 2 * math.pi * k) / alpha
        if abs(arg) <= math.pi * (1 + 1e-15):
            arg = max(-math.pi, min(math.pi, arg))
            # arg -pi and +pi name the same point on the cut
            if arg == -math.pi and kmax > kmin and abs((theta + 2 * math.pi * kmax) / alpha - math.pi) < 1e-12:
                continue
            out.append(Pole(mod, arg))
    return out


# ---------------------------------------------------------------- Taylor arithmetic


def _tmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _tinv(a: np.ndarray) -> np.ndarray:
    n = len(a)
    b = np.zeros(n, dtype=complex)
    b[0] = 1 / a[0]
    for m in range(1, n):
        b[m] = -np.dot(a[1 : m + 1], b[m - 1 :: -1][:m]) / a[0]
    return b


def _tpow(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(len(a), dtype=complex)
    out[0] = 1
    for _ in range(n):
        out = _tmul(out, a)
    return out


def _residue_at(p: PrabhakarParams, pole: Pole) -> complex:
    """Residue of ``exp(s) H(s; z)`` at a pole of integer order ``gamma``.

    Writes ``s = s* + d`` and expands every factor of
    ``exp(s) s**(alpha*gamma-beta) (d / (s**alpha - z))**gamma`` to order
    ``gamma - 1`` in ``d``; the residue is the coefficient of ``d**(gamma-1)``.
    """
    if pole.value.real > _LOG_MAX:
        raise OutOfRegime(f"exp({pole.value.real:.4g}) from the pole overflows double precision")
    g = int(p.gamma)
    alpha, c = p.alpha, p.alpha * p.gamma - p.beta
    m = np.arange(g)
    # (s**alpha - z)/d = sum_{j>=0} binom(alpha, j+1) s***(alpha-j-1) d**j
    quot = np.array([special.binom(alpha, j + 1) * pole.power(alpha - j - 1) for j in m])
    front = _tpow(_tinv(quot), g)
    powc = np.array([special.binom(c, j) * pole.power(c - j) for j in m])
    expo = np.array([1 / math.factorial(j) for j in m], dtype=complex)
    series = _tmul(_tmul(front, powc), expo)
    return cmath.exp(pole.value) * series[g - 1]


def _origin_residue(order: int, gamma: int, z: complex) -> complex:
    """Residue at ``s = 0`` of ``exp(s) s**(-order) / (s - z)**gamma``."""
    base = np.zeros(order, dtype=complex)
    base[0] = -z
    if order > 1:
        base[1] = 1
    inv = _tpow(_tinv(base), gamma)
    expo = np.array([1 / math.factorial(j) for j in range(order)], dtype=complex)
    return _tmul(inv, expo)[order - 1]


def residues(p: PrabhakarParams, z: complex) -> list[tuple[complex, complex]]:
    """Poles of ``H(s; z)`` on the principal sheet with the residues of ``exp(s) H``."""
    if not p.gamma_is_natural:
        raise NonIntegerGamma(f"residues need a positive integer gamma, got {p.gamma}")
    return [(pl.value, _residue_at(p, pl)) for pl in poles(p, z)]


def is_rational_case(p: PrabhakarParams) -> bool:
    """True when ``H`` is rational: alpha = 1, gamma and gamma - beta integers."""
    return p.alpha == 1 and p.gamma_is_natural and float(p.gamma - p.beta).is_integer()


def _eval_rational(p: PrabhakarParams, z: complex) -> EvalResult:
    """Sum of all residues: exact because the contour can be pushed to -infinity."""
    g = int(p.gamma)
    order = int(round(p.beta - p.gamma))
    parts = [_residue_at(p, Pole(abs(z), cmath.phase(z)))]
    if order > 0:
        parts.append(_origin_residue(order, g, z))
    value = sum(parts)
    scale = sum(abs(x) for x in parts)
    mag = abs(value)
    est = (4 * g + order + 2) * MACHINE_EPS * scale / mag if mag > 0 else math.inf
    if complex(z).imag == 0:
        value = complex(value.real, 0.0)
    return EvalResult(complex(value), est, Method.INVERSION, work=len(parts),
                      notes=("exact residue sum",))


# ---------------------------------------------------------------- contour selection


def _param_rb(phi_j: float, phi_j1: float, pj: float, qj: float, log_eps: float):
    """Optimal parabola in a strip bounded by two singularities."""
    fac = 1.01
    f_max = math.exp(log_eps - _LOG_EPS)
    sq_j = math.sqrt(phi_j)
    threshold = 2 * math.sqrt(log_eps - _LOG_EPS)
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)
    f_bar = 1.0
    if pj < 1e-14 and qj < 1e-14:
        sqb_j, sqb_j1 = sq_j, sq_j1
    elif pj < 1e-14:
        sqb_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** qj if sq_j > 0 else fac
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fq = f_bar ** (-1 / qj)
        sqb_j1 = (2 * sq_j1 - fq * sq_j) / (2 + fq)
    elif qj < 1e-14:
        sqb_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** pj
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1 / pj)
        sqb_j = (2 * sq_j + fp * sq_j1) / (2 - fp)
    else:
        f_min = fac * ((sq_j + sq_j1) / (sq_j1 - sq_j)) ** max(pj, qj)
        if f_min >= f_max:
            return None
        f_min = max(f_min, 1.5)
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1 / pj)
        fq = f_bar ** (-1 / qj)
        w = -phi_j1 / log_eps
        den = 2 + w - (1 + w) * fp + fq
        sqb_j = ((2 + w + fq) * sq_j + fp * sq_j1) / den
        sqb_j1 = (-(1 + w) * fq * sq_j + (2 + w - (1 + w) * fp) * sq_j1) / den
    log_eps = log_eps - math.log(f_bar)
    w = -sqb_j1 ** 2 / log_eps
    mu = (((1 + w) * sqb_j + sqb_j1) / (2 + w)) ** 2
    h = -2 * math.pi / log_eps * (sqb_j1 - sqb_j) / ((1 + w) * sqb_j + sqb_j1)
    if not (mu > 0 and h > 0):
        return None
    n = math.ceil(math.sqrt(1 - log_eps / mu) / h)
    return mu, h, n


def _param_ru(phi_j: float, pj: float, log_eps: float):
    """Optimal parabola in the unbounded strip to the right of the last singularity."""
    sq_phi = math.sqrt(phi_j)
    phib = phi_j * 1.01 if phi_j > 0 else 0.01
    sqb = math.sqrt(phib)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(100):
        log_eps_phi = log_eps / phib
        n = math.ceil(phib / math.pi * (1 - 1.5 * log_eps_phi + math.sqrt(1 - 2 * log_eps_phi)))
        a = math.pi * n / phib
        sq_mu = sqb * abs(4 - a) / abs(7 - math.sqrt(1 + 12 * a))
        fbar = ((sqb - sq_phi) / sq_mu) ** (-pj) if pj >= 1e-14 else 1.0
        if pj < 1e-14 or f_min < fbar < f_max:
            break
        sqb = f_tar ** (-1 / pj) * sq_mu + sq_phi
        phib = sqb ** 2
    mu = sq_mu ** 2
    h = (-3 * a - 2 + 2 * math.sqrt(1 + 12 * a)) / (4 - a) / n
    threshold = log_eps - _LOG_EPS
    if mu > threshold:
        q = 0.0 if abs(pj) < 1e-14 else f_tar ** (-1 / pj) * math.sqrt(mu)
        phib = (q + sq_phi) ** 2
        if phib >= threshold:
            return None
        w = math.sqrt(_LOG_EPS / (_LOG_EPS - log_eps))
        u = math.sqrt(-phib / _LOG_EPS)
        mu = threshold
        n = math.ceil(w * log_eps / 2 / math.pi / (u * w - 1))
        h = w / n
    if not (mu > 0 and h > 0 and n >= 1):
        return None
    return mu, h, n


def plan_contour(p: PrabhakarParams, z: complex, target_acc: float) -> ContourPlan:
    """Choose ``(mu, h, N)`` and the set of poles to subtract for a given absolute target."""
    if not (0 < target_acc < 1):
        raise DomainError("target accuracy must lie in (0, 1)")
    sing = [pl for pl in poles(p, z) if pl.phi > _PHI_ZERO]
    if sing and not p.gamma_is_natural:
        raise NoAdmissibleContour("poles off the branch cut need an integer gamma for residues")
    sing.sort(key=lambda pl: pl.phi)
    phis = [0.0] + [pl.phi for pl in sing] + [math.inf]
    n_sing = len(sing) + 1
    strength_p = [max(0.0, -2 * (p.alpha * p.gamma - p.beta + 1))] + [p.gamma] * len(sing)
    strength_q = [p.gamma] * len(sing) + [math.inf]

    log_eps = math.log(target_acc)
    while log_eps <= _LOG_GIVE_UP:
        best = None
        for j in range(n_sing):
            if not (phis[j] < (log_eps - _LOG_EPS) and phis[j] < phis[j + 1]):
                continue
            if j < n_sing - 1:
                cand = _param_rb(phis[j], phis[j + 1], strength_p[j], strength_q[j], log_eps)
            else:
                cand = _param_ru(phis[j], strength_p[j], log_eps)
            if cand is not None and (best is None or cand[2] < best[1][2]):
                best = (j, cand)
        if best is not None and best[1][2] <= _MAX_NODES:
            j, (mu, h, n) = best
            return ContourPlan(ContourSpec(mu, h, n), tuple(sing[j:]), log_eps)
        log_eps += math.log(10)
    raise NoAdmissibleContour(f"no parabola reaches accuracy {target_acc:g} with at most "
                              f"{_MAX_NODES} nodes per side")


def select_contour(p: PrabhakarParams, z: complex, target_acc: float) -> ContourSpec:
    """Contour parameters ``(mu, h, N)`` for the requested absolute accuracy."""
    return plan_contour(p, z, target_acc).contour


def _trapezoid(p: PrabhakarParams, z: complex, c: ContourSpec) -> tuple[complex, float]:
    """Trapezoidal sum on the parabola; also returns the sum of absolute contributions."""
    u = c.h * np.arange(-c.n_half, c.n_half + 1)
    w = c.mu * (1j * u + 1) ** 2
    dw = 2 * c.mu * (1j - u)
    h_s = w ** (p.alpha * p.gamma - p.beta) / (w ** p.alpha - z) ** p.gamma
    terms = np.exp(w) * h_s * dw
    scale = c.h / (2 * math.pi)
    return complex(scale * np.sum(terms) / 1j), float(scale * np.sum(np.abs(terms)))


def inversion_applicable(p: PrabhakarParams, z: complex) -> bool:
    """Whether the contour method covers ``(p, z)``.

    Covered: positive integer gamma (poles become residues); ``0 < alpha < 1``
    with ``|arg z| > alpha*pi`` (no poles on the principal sheet); and
    ``alpha = 1`` with z on the negative real axis, where the only
    singularities sit on the branch cut.
    """
    z = complex(z)
    if p.gamma_is_natural or z == 0:
        return True
    theta = abs(cmath.phase(z))
    if p.alpha < 1 and theta > p.alpha * math.pi:
        return True
    return p.alpha == 1 and z.imag == 0 and z.real < 0


def eval_inversion(p: PrabhakarParams, z: complex, cfg: EvalConfig = DEFAULT_CONFIG,
                   *, target_acc: float | None = None, scale: float = 1.0) -> EvalResult:
    """Evaluate by numerical inversion of the Laplace transform.

    ``target_acc`` is the absolute accuracy requested from the contour; it
    defaults to ``cfg.rel_tol`` (not below 1e-15).  ``est_error`` is relative
    and combines the contour error model, the round-off of the trapezoidal
    sum and, when ``cfg.certify`` is set, the change under halving ``h`` while
    doubling the truncation range.

    ``scale`` is the size of the transform relative to an O(1) transform with
    the same singularities, e.g. ``|z|**-gamma`` when ``s**(alpha*gamma-beta)
    (s**alpha - z)**-gamma`` is ``|z|**-gamma`` times a bounded function.  The
    contour error model is linear in the transform, so it is scaled by it.
    """
    z = complex(z)
    if not scale > 0:
        raise DomainError("scale must be positive")
    if z == 0 or p.gamma == 0:
        return EvalResult(complex(rgamma(p.beta)), MACHINE_EPS, Method.INVERSION, work=0)
    if not inversion_applicable(p, z):
        raise DomainError(f"inversion needs integer gamma, or |arg z| > alpha*pi with alpha < 1; "
                          f"got alpha={p.alpha}, gamma={p.gamma}, arg z={cmath.phase(z):.6g}")
    if is_rational_case(p):
        return _eval_rational(p, z)
    target = max(target_acc if target_acc is not None else cfg.rel_tol, 1e-15)
    plan = plan_contour(p, z, target)
    integral, abs_sum = _trapezoid(p, z, plan.contour)
    res = [_residue_at(p, pl) for pl in plan.right_poles]
    value = integral + sum(res)
    err_abs = scale * math.exp(plan.log_epsilon) + 8 * MACHINE_EPS * (abs_sum + sum(abs(r) for r in res))
    work = plan.contour.n_nodes
    notes = [f"mu={plan.contour.mu:.4g} h={plan.contour.h:.4g} N={plan.contour.n_half}"]
    if cfg.certify:
        fine = ContourSpec(plan.contour.mu, plan.contour.h / 2, 4 * plan.contour.n_half)
        integral2, _ = _trapezoid(p, z, fine)
        diff = abs(integral2 - integral)
        err_abs = max(err_abs, diff)
        work += fine.n_nodes
        value = integral2 + sum(res)
        notes.append(f"certified diff={diff:.2e}")
    if z.imag == 0:
        value = complex(value.real, 0.0)
    mag = abs(value)
    est = err_abs / mag if mag > 0 else math.inf
    if plan.log_epsilon > math.log(target) + 1e-12:
        notes.append(f"target relaxed to {math.exp(plan.log_epsilon):.1e}")
    return EvalResult(complex(value), est, Method.INVERSION, work=work, notes=tuple(notes))
