"""Generalised fractional Poisson processes.

Two families are covered: the counting process whose state probabilities
obey a regularised Prabhakar relaxation system (parameters rho, mu, gamma,
phi, lambda), and the renewal process with Prabhakar-type waiting times
(parameters nu, delta, lambda).  A weighted Poisson distribution with
Prabhakar weights is also provided.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import interpolate, optimize, special

from prabhakar.core.dispatch import evaluate, evaluate_with_fallback, magnitude_bound
from prabhakar.core.inversion import eval_inversion
from prabhakar.errors import (CancellationFailure, CancellationWarning, DomainError, NoConvergence,
                              TabulationFailure, Unevaluable)
from prabhakar.types import DEFAULT_CONFIG, MACHINE_EPS, EvalConfig, PrabhakarParams

CERTIFIED_RATIO = 1e6
FAILURE_RATIO = 1e10
_TERM_CAP = 600
_CHUNK = 4096
_TRUNCATE_MASS = 1e-6
_LEVEL_ABS_TOL = 1e-9


def _E(alpha: float, beta: float, gamma: float, z: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    return evaluate(PrabhakarParams(alpha, beta, gamma), z, cfg).value.real


@dataclass(frozen=True)
class GfpParams:
    """Counting process driven by a regularised Prabhakar derivative.

    With ``check_constraint`` (the default) and ``gamma != 0`` the
    nonnegativity condition ``0 < mu*ceil(gamma)/gamma - r*rho < 1`` for
    ``r = 0..ceil(gamma)`` is enforced.
    """

    rho: float
    mu: float
    gamma: float
    phi: float
    lam: float
    check_constraint: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.rho <= 1:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho}")
        if not 0 < self.mu <= 1:
            raise DomainError(f"mu must lie in (0, 1], got {self.mu}")
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be nonnegative, got {self.gamma}")
        if not self.phi > 0:
            raise DomainError(f"phi must be positive, got {self.phi}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if self.check_constraint and self.gamma != 0:
            violated = self.constraint_violations()
            if violated:
                raise DomainError("nonnegativity constraint 0 < mu*ceil(gamma)/gamma - r*rho < 1 fails for "
                                  + ", ".join(f"r={r} (value {v:.6g})" for r, v in violated))

    def constraint_violations(self) -> list[tuple[int, float]]:
        """``(r, value)`` pairs for which the nonnegativity condition fails."""
        if self.gamma == 0:
            return []
        m = math.ceil(self.gamma)
        out = []
        for r in range(m + 1):
            v = self.mu * m / self.gamma - r * self.rho
            if not 0 < v < 1:
                out.append((r, v))
        return out


@dataclass(frozen=True)
class CpParams:
    """Renewal process with waiting density ``lam**delta t**(nu delta-1) E^delta_{nu,nu delta}(-lam t**nu)``.

    ``delta > 0`` is required; construction also scans the density for
    negative values on a logarithmic grid.
    """

    nu: float
    delta: float
    lam: float

    def __post_init__(self) -> None:
        if not 0 < self.nu <= 1:
            raise DomainError(f"nu must lie in (0, 1], got {self.nu}")
        if not self.delta > 0:
            raise DomainError(f"delta must be positive for a probability density, got {self.delta}")
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if self.nu == 1:
            return
        scale = self.lam ** (-1 / self.nu)
        nd = self.nu * self.delta
        for t in np.geomspace(1e-3, 1e3, 25) * scale:
            # a sign check needs no certified digits, only an error bar
            res = evaluate_with_fallback(PrabhakarParams(self.nu, nd, self.delta), -self.lam * t ** self.nu)
            f = self.lam ** self.delta * t ** (nd - 1) * res.value.real
            if f + abs(f) * res.est_error < -1e-12 * self.lam ** (1 / self.nu):
                raise DomainError(f"waiting density is negative ({f:.3g}) at t = {t:.3g}")


@dataclass(frozen=True)
class Pmf:
    """Probabilities ``p_0..p_K`` at time ``t`` plus the mass beyond ``K``.

    ``stderr`` holds standard errors for empirical distributions.
    """

    t: float
    probs: np.ndarray = field(repr=False)
    tail_mass: float = 0.0
    stderr: np.ndarray | None = field(default=None, repr=False)
    tol: float = 1e-8

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if np.any(probs < -1e-12):
            raise DomainError(f"negative probability {probs.min():.3g}")
        total = math.fsum(probs) + self.tail_mass
        if abs(total - 1) > self.tol:
            raise DomainError(f"probabilities sum to {total!r}, not 1 within {self.tol}")

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, k: int) -> float:
        return float(self.probs[k])


# --------------------------------------------------------------------------- GFP family


class _TermTable:
    """Lazily computed ``T_r = (lam t**mu)**r E^{gamma r}_{rho, mu r+1}(-phi t**rho)`` with absolute errors."""

    def __init__(self, g: GfpParams, t: float, cfg: EvalConfig) -> None:
        self.g, self.t, self.cfg = g, t, cfg
        self.log_x = math.log(g.lam * t ** g.mu)
        self.zl = -g.phi * t ** g.rho
        self.terms: list[float] = []
        self.errs: list[float] = []

    def __getitem__(self, r: int) -> tuple[float, float]:
        while len(self.terms) <= r:
            self._extend()
        return self.terms[r], self.errs[r]

    def _extend(self) -> None:
        g, r = self.g, len(self.terms)
        log_scale = r * self.log_x
        if log_scale > 700:
            raise NoConvergence(f"terms overflow at t = {self.t}; reduce t or lambda")
        scale = math.exp(log_scale)
        p = PrabhakarParams(g.rho, g.mu * r + 1, g.gamma * r)
        try:
            res = evaluate_with_fallback(p, self.zl, self.cfg)
        except Unevaluable as exc:
            bound = magnitude_bound(p, self.zl) * scale
            if not math.isfinite(bound):
                raise CancellationFailure(f"series term r={r} cannot be evaluated: {exc}") from exc
            # keep an honest error bar instead of a value
            self.terms.append(0.0)
            self.errs.append(bound)
            return
        term = scale * res.value.real
        self.terms.append(term)
        self.errs.append(abs(term) * res.est_error)


def _alternating(table: _TermTable, k: int, coeff, cap: int = _TERM_CAP) -> tuple[float, float, float]:
    """``sum_{r>=k} coeff(r) T_r`` with compensated summation.

    Stops after two consecutive summands (including their error bars) fall
    below ``1e-17`` of the largest one.  Returns ``(value, abs_error, largest summand)``.
    """
    parts: list[float] = []
    abs_err = 0.0
    biggest, small = 0.0, 0
    for r in range(k, k + cap + 1):
        T, e = table[r]
        c = coeff(r)
        part = c * T
        parts.append(part)
        abs_err += abs(c) * e
        size = abs(part) + abs(c) * e
        biggest = max(biggest, abs(part))
        if r > k and size <= 1e-17 * biggest:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise NoConvergence(f"series did not settle within {cap} terms at t = {table.t}")
    value = math.fsum(parts)
    return value, abs_err + MACHINE_EPS * abs(value), biggest


def _certify(value: float, biggest: float, abs_err: float, what: str, floor: float = 0.0) -> None:
    """Warn beyond ``CERTIFIED_RATIO`` digits lost, fail beyond ``FAILURE_RATIO``.

    ``floor`` is an absolute size below which only absolute accuracy is required.
    """
    ref = max(abs(value), floor)
    if ref == 0 or abs_err >= 0.1 * ref or biggest > FAILURE_RATIO * ref:
        lost = math.log10(biggest / ref) if ref else math.inf
        raise CancellationFailure(f"{what} lost {lost:.1f} digits to cancellation; reduce t or lambda")
    if biggest > CERTIFIED_RATIO * ref:
        warnings.warn(f"{what} lost about {math.log10(biggest / ref):.1f} digits to cancellation",
                      CancellationWarning, stacklevel=3)


def gfp_pgf(g: GfpParams, v: float, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Probability generating function ``sum_k (-lam t**mu)**k (1-v)**k E^{gamma k}_{rho,mu k+1}(-phi t**rho)``."""
    if not abs(v) <= 1:
        raise DomainError("the generating function needs |v| <= 1")
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0 or v == 1:
        return 1.0
    w = 1 - v
    value, err, biggest = _alternating(_TermTable(g, t, cfg), 0, lambda r: (-w) ** r)
    _certify(value, biggest, err, "pgf")
    return value


def gfp_pmf(g: GfpParams, t: float, K_max: int = 200, tail_tol: float = 1e-12,
            cfg: EvalConfig = DEFAULT_CONFIG) -> Pmf:
    """State probabilities ``p_k(t) = sum_{r>=k} (-1)**(r-k) C(r,k) T_r``.

    Probabilities are produced until the remaining mass is below
    ``tail_tol`` (or below ten times the accumulated error estimate of the
    computed ``p_k``) or ``K_max`` is reached.  A ``p_k`` whose largest summand
    exceeds ``max(p_k, tail_tol)`` by more than ``1e6`` triggers a
    :class:`CancellationWarning`; beyond ``1e10``, or when the propagated
    error reaches 10 percent, :class:`CancellationFailure` is raised.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return Pmf(0.0, np.array([1.0]), 0.0)
    table = _TermTable(g, t, cfg)
    probs: list[float] = []
    noise = 0.0
    for k in range(K_max + 1):
        value, abs_err, biggest = _alternating(table, k, lambda r, k=k: (-1) ** (r - k) * special.comb(r, k))
        try:
            _certify(value, biggest, abs_err, f"p_{k}({t})", floor=tail_tol)
        except CancellationFailure as exc:
            remaining = 1 - math.fsum(probs)
            if k == 0 or remaining > _TRUNCATE_MASS:
                raise
            # the uncertifiable far tail is reported as tail mass instead
            warnings.warn(f"{exc}; truncating at k = {k - 1} with tail mass {remaining:.2e}",
                          CancellationWarning, stacklevel=2)
            break
        if value < -max(10 * abs_err, 1e-12):
            raise CancellationFailure(f"p_{k}({t}) = {value:.3g} is negative; outside the validity window")
        probs.append(value)
        noise += abs_err
        # stop once the remaining mass is below tol or indistinguishable from accumulated rounding
        if k > 0 and 1 - math.fsum(probs) < max(tail_tol, 10 * noise):
            break
    arr = np.array(probs)
    tail = 1 - math.fsum(arr)
    if tail < -1e-8:
        raise CancellationFailure(f"probabilities at t = {t} sum to {1 - tail!r}")
    return Pmf(float(t), arr, max(tail, 0.0))


def gfp_mean(g: GfpParams, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Mean count ``lam t**mu E^gamma_{rho,1+mu}(-phi t**rho)``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return 0.0
    return g.lam * t ** g.mu * _E(g.rho, 1 + g.mu, g.gamma, -g.phi * t ** g.rho, cfg)


def gfp_waiting_density(g: GfpParams, t: float, cfg: EvalConfig = DEFAULT_CONFIG,
                        cap: int = _TERM_CAP) -> float:
    """Waiting-time density ``lam t**(mu-1) sum_r (-lam t**mu)**r E^{gamma r+gamma}_{rho,mu r+mu}(-phi t**rho)``."""
    if not t > 0:
        raise DomainError("the waiting density is evaluated at t > 0")
    x = g.lam * t ** g.mu
    zl = -g.phi * t ** g.rho
    parts: list[float] = []
    abs_err = 0.0
    small = 0
    for r in range(cap + 1):
        p = PrabhakarParams(g.rho, g.mu * (r + 1), g.gamma * (r + 1))
        scale = x ** r
        if r > 0 and magnitude_bound(p, zl) * scale <= 1e-17 * max(abs(q) for q in parts):
            small += 1
            if small >= 2:
                break
            continue
        try:
            res = evaluate_with_fallback(p, zl, cfg)
        except Unevaluable as exc:
            raise CancellationFailure(f"series term r={r} cannot be evaluated: {exc}") from exc
        term = (-1) ** r * scale * res.value.real
        parts.append(term)
        abs_err += abs(term) * res.est_error
        if r > 0 and abs(term) <= 1e-17 * max(abs(q) for q in parts):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise NoConvergence(f"waiting density series did not settle within {cap} terms at t = {t}")
    value = math.fsum(parts)
    _certify(value, max(abs(q) for q in parts), abs_err, f"waiting density at t = {t}")
    return g.lam * t ** (g.mu - 1) * value


# --------------------------------------------------------------------------- CP family


def cp_waiting_density(c: CpParams, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """``lam**delta t**(nu delta - 1) E^delta_{nu, nu delta}(-lam t**nu)``."""
    if not t > 0:
        raise DomainError("the waiting density is evaluated at t > 0")
    nd = c.nu * c.delta
    if c.nu == 1:
        # gamma density with shape delta and rate lam
        return math.exp(c.delta * math.log(c.lam) + (nd - 1) * math.log(t) - c.lam * t
                        - special.gammaln(c.delta))
    return c.lam ** c.delta * t ** (nd - 1) * _E(c.nu, nd, c.delta, -c.lam * t ** c.nu, cfg)


def _cp_level(c: CpParams, k: int, t: float, cfg: EvalConfig) -> float:
    """``P(N(t) >= k) = (lam t**nu)**(delta k) E^{delta k}_{nu, nu delta k + 1}(-lam t**nu)``."""
    if k == 0:
        return 1.0
    dk = c.delta * k
    if c.nu == 1:
        return float(special.gammainc(dk, c.lam * t))
    x = c.lam * t ** c.nu
    # a level is a probability: absolute accuracy is what counts, so uncertified values are allowed
    p = PrabhakarParams(c.nu, c.nu * dk + 1, dk)
    lift = math.exp(dk * math.log(x))
    res = evaluate_with_fallback(p, -x, cfg)
    value, err = lift * res.value.real, lift * abs(res.value) * res.est_error
    if err > _LEVEL_ABS_TOL:
        # the level's own transform s**-1 (1 + s**nu/x)**-(delta k) is O(1): contour error scales by x**-(delta k)
        inv = eval_inversion(p, -x, replace(cfg, certify=True), scale=1 / lift)
        inv_err = lift * abs(inv.value) * inv.est_error
        if inv_err < err:
            value, err = lift * inv.value.real, inv_err
    if err > _LEVEL_ABS_TOL:
        bound = _cp_level_bound(c, k, t)
        if bound <= _LEVEL_ABS_TOL:
            return min(max(value, 0.0), bound)
    if err > _LEVEL_ABS_TOL:
        raise CancellationFailure(f"P(N({t}) >= {k}) has absolute error {err:.1e}")
    return value


def _cp_level_bound(c: CpParams, k: int, t: float) -> float:
    """Chernoff bound ``min_s exp(s t) (1 + s**nu/lam)**(-delta k)`` on ``P(N(t) >= k)``."""
    def log_bound(u: float) -> float:
        s = math.exp(u)
        return s * t - c.delta * k * math.log1p(s ** c.nu / c.lam)

    best = optimize.minimize_scalar(log_bound, bounds=(-40.0, 40.0), method="bounded")
    return min(1.0, math.exp(min(best.fun, 0.0)))


def cp_cdf(c: CpParams, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Waiting-time distribution function ``lam**delta t**(nu delta) E^delta_{nu, nu delta+1}(-lam t**nu)``."""
    if t <= 0:
        return 0.0
    return _cp_level(c, 1, t, cfg)


def cp_pmf(c: CpParams, k: int, t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """State probability ``P(N(t) = k)`` as the difference of consecutive level probabilities."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return 1.0 if k == 0 else 0.0
    if c.nu == 1 and k > 0:
        # difference of regularised incomplete gamma functions, without cancellation
        lo = special.gammaincc(c.delta * k, c.lam * t)
        hi = special.gammaincc(c.delta * (k + 1), c.lam * t)
        return float(hi - lo)
    return _level_gap(_cp_level(c, k, t, cfg), _cp_level(c, k + 1, t, cfg), k, t)


def cp_pmf_table(c: CpParams, t: float, K: int | None = None, cfg: EvalConfig = DEFAULT_CONFIG,
                 tail_tol: float = 1e-14) -> Pmf:
    """``p_0..p_K`` at time t; the tail is the exact level probability ``P(N(t) > K)``.

    With ``K=None`` levels are added until ``P(N(t) > K) < tail_tol``.
    """
    if t <= 0:
        return Pmf(float(t), np.array([1.0]) if K is None else np.eye(1, K + 1)[0], 0.0)
    levels = [1.0]
    k = 0
    while True:
        k += 1
        levels.append(_cp_level(c, k, t, cfg))
        if K is None:
            if levels[-1] < tail_tol and k > 1:
                break
            if k > 10_000:
                raise NoConvergence(f"tail mass at t = {t} still {levels[-1]:.3g} after 10000 levels")
        elif k == K + 1:
            break
    probs = np.array([_level_gap(levels[j], levels[j + 1], j, t) for j in range(len(levels) - 1)])
    return Pmf(float(t), probs, levels[-1])


def _level_gap(upper: float, lower: float, k: int, t: float) -> float:
    """``P(N(t) = k)`` from consecutive levels, clamped at zero within their error budget."""
    gap = upper - lower
    if gap < -2 * _LEVEL_ABS_TOL:
        raise CancellationFailure(f"P(N({t}) = {k}) came out as {gap:.3g}")
    return max(gap, 0.0)


def weighted_poisson_pmf(p: PrabhakarParams, x: float, n: int, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Weighted Poisson probability with weights ``Gamma(n+gamma) / (Gamma(gamma) Gamma(alpha n+beta))``.

    The normaliser is ``E[w(N)] = exp(-x) E^gamma_{alpha,beta}(x)``, so the
    probability is ``w(n) x**n / (n! E^gamma_{alpha,beta}(x))``.
    """
    if not x > 0:
        raise DomainError("x must be positive")
    if n < 0:
        raise DomainError("n must be nonnegative")
    norm = evaluate(p, x, cfg).value.real
    if not (math.isfinite(norm) and norm > 0):
        raise DomainError(f"normaliser E(x) = {norm!r} is not a finite positive number")
    # w(n) x**n / n! in sign/log form; the Pochhammer symbol overflows early
    if p.gamma > 0:
        sign, log_w = 1.0, special.gammaln(n + p.gamma) - special.gammaln(p.gamma)
    else:
        pc = special.poch(p.gamma, n)
        if pc == 0:
            return 0.0
        sign, log_w = math.copysign(1.0, pc), math.log(abs(pc))
    arg = p.alpha * n + p.beta
    if arg <= 0 and arg == round(arg):
        return 0.0
    sign *= special.gammasgn(arg)
    log_w -= special.gammaln(arg)
    return float(sign * math.exp(log_w + n * math.log(x) - special.gammaln(n + 1) - math.log(norm)))


# --------------------------------------------------------------------------- sampling


@dataclass(frozen=True)
class WaitingSampler:
    """Inverse-CDF sampler for the CP waiting time.

    The distribution function is tabulated from its closed form on a
    logarithmic grid; ``log t`` is interpolated monotonically against
    ``logit F``.  Power-law asymptotes cover both tails.
    """

    params: CpParams
    logit_grid: np.ndarray = field(repr=False)
    log_t_grid: np.ndarray = field(repr=False)
    interp: interpolate.PchipInterpolator = field(repr=False)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        c = self.params
        u = np.asarray(u, dtype=float)
        if c.nu == 1:
            return special.gammaincinv(c.delta, u) / c.lam
        with np.errstate(divide="ignore"):
            y = np.log(u) - np.log1p(-u)
        out = np.empty_like(u)
        lo, hi = self.logit_grid[0], self.logit_grid[-1]
        mid = (y >= lo) & (y <= hi)
        out[mid] = np.exp(self.interp(y[mid]))
        nd = c.nu * c.delta
        small = y < lo
        # F(t) ~ (lam t**nu)**delta / Gamma(nu delta + 1)
        out[small] = (u[small] * math.gamma(nd + 1)) ** (1 / nd) * c.lam ** (-1 / c.nu)
        big = y > hi
        # 1 - F(t) ~ delta (lam t**nu)**-1 / Gamma(1 - nu)
        out[big] = (c.delta / (c.lam * (1 - u[big]) * math.gamma(1 - c.nu))) ** (1 / c.nu)
        return out

    def cdf(self, t: np.ndarray) -> np.ndarray:
        return np.array([cp_cdf(self.params, float(s)) for s in np.atleast_1d(t)])


def build_sampler(c: CpParams, n_grid: int = 400, cfg: EvalConfig = DEFAULT_CONFIG) -> WaitingSampler:
    """Tabulate the distribution function between ``F = 1e-9`` and ``1 - F = 1e-9``."""
    if c.nu == 1:
        empty = np.array([0.0, 1.0])
        return WaitingSampler(c, empty, empty, interpolate.PchipInterpolator(empty, empty))
    scale = c.lam ** (-1 / c.nu)
    nd = c.nu * c.delta
    # grid ends from the two asymptotes, widened by a safety factor
    t_lo = (1e-9 * math.gamma(nd + 1)) ** (1 / nd) * scale / 10
    t_hi = (c.delta / (1e-9 * math.gamma(1 - c.nu))) ** (1 / c.nu) * scale * 10
    t = np.geomspace(t_lo, t_hi, n_grid)
    F = np.empty(n_grid)
    S = np.empty(n_grid)
    try:
        for i, s in enumerate(t):
            x = c.lam * s ** c.nu
            F[i] = cp_cdf(c, float(s), cfg)
            # for delta = 1 the survival function is E_nu(-x), free of 1 - F cancellation
            S[i] = _E(c.nu, 1.0, 1.0, -x, cfg) if c.delta == 1 else 1 - F[i]
    except Exception as exc:
        raise TabulationFailure(f"waiting distribution could not be tabulated: {exc}") from exc
    keep = (F > 0) & (S > 0) & np.isfinite(F)
    if np.any(np.diff(F[keep]) <= 0):
        raise TabulationFailure("tabulated distribution function is not strictly increasing")
    if not (F[keep][0] < 1e-6 and S[keep][-1] < 1e-6):
        raise TabulationFailure("tabulation window does not cover the bulk of the distribution")
    y = np.log(F[keep]) - np.log(S[keep])
    lt = np.log(t[keep])
    return WaitingSampler(c, y, lt, interpolate.PchipInterpolator(y, lt))


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for one chunk of draws, independent of how chunks are scheduled."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def sample_waiting(c: CpParams, n: int, seed: int, sampler: WaitingSampler | None = None) -> np.ndarray:
    """``n`` independent waiting times; identical for identical ``seed``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    sampler = sampler or build_sampler(c)
    out = np.empty(n)
    for chunk, start in enumerate(range(0, n, _CHUNK)):
        stop = min(n, start + _CHUNK)
        out[start:stop] = sampler.ppf(_chunk_rng(seed, chunk).random(stop - start))
    return out


def simulate_counts(c: CpParams, t: float, n_paths: int, seed: int, k_max: int | None = None,
                    sampler: WaitingSampler | None = None) -> Pmf:
    """Empirical distribution of ``N(t)`` over ``n_paths`` renewal paths.

    Paths are processed in chunks, each with its own counter-based stream
    keyed by ``(seed, chunk)``, so results do not depend on execution order.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    if n_paths < 1:
        raise DomainError("n_paths must be positive")
    sampler = sampler or build_sampler(c)
    counts = np.empty(n_paths, dtype=np.int64)
    for chunk, start in enumerate(range(0, n_paths, _CHUNK)):
        stop = min(n_paths, start + _CHUNK)
        rng = _chunk_rng(seed, chunk)
        clock = np.zeros(stop - start)
        n_events = np.zeros(stop - start, dtype=np.int64)
        active = np.ones(stop - start, dtype=bool)
        while np.any(active):
            idx = np.flatnonzero(active)
            clock[idx] += sampler.ppf(rng.random(idx.size))
            arrived = clock[idx] <= t
            n_events[idx[arrived]] += 1
            active[idx[~arrived]] = False
        counts[start:stop] = n_events
    top = int(counts.max()) if k_max is None else k_max
    hist = np.bincount(np.minimum(counts, top + 1), minlength=top + 2).astype(float)
    probs = hist[: top + 1] / n_paths
    tail = hist[top + 1] / n_paths
    stderr = np.sqrt(probs * (1 - probs) / n_paths)
    return Pmf(float(t), probs, tail, stderr=stderr, tol=1e-12)


__all__ = [
    "CERTIFIED_RATIO", "CpParams", "FAILURE_RATIO", "GfpParams", "Pmf", "WaitingSampler", "build_sampler",
    "cp_cdf", "cp_pmf", "cp_pmf_table", "cp_waiting_density", "gfp_mean", "gfp_pgf", "gfp_pmf",
    "gfp_waiting_density", "sample_waiting", "simulate_counts", "weighted_poisson_pmf",
]
