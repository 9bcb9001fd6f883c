"""Prabhakar fractional integral and derivatives as discrete operators on uniform grids.

The operators are discretised by convolution quadrature: the Laplace symbol
``s**(alpha*gamma-beta) * (s**alpha - lam)**(-gamma)`` of the integral is
evaluated at the backward-difference symbol ``(1 - zeta)/h``, which yields
weights ``W_j`` generated by powers of a modified binomial series.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from prabhakar.core.dispatch import evaluate
from prabhakar.errors import (DomainError, EstimatedInitialDataWarning, GridMismatch, NoConvergence,
                              StabilityViolation)
from prabhakar.types import DEFAULT_CONFIG, EvalConfig, KernelParams, PrabhakarParams

_SERIES_CAP = 200


@dataclass(frozen=True)
class GridFn:
    """Samples ``values[j]`` of a function at ``t0 + j*h``, ``j = 0..n``."""

    t0: float
    h: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values)
        if not (self.h > 0 and math.isfinite(self.h)):
            raise DomainError(f"grid step must be positive, got {self.h}")
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("a grid function needs at least two samples")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid samples must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)

    @classmethod
    def sample(cls, f, t0: float, h: float, n: int) -> GridFn:
        """Sample a vectorised callable on ``t0 + j*h``, ``j = 0..n``."""
        t = t0 + h * np.arange(n + 1)
        return cls(t0, h, np.asarray(f(t)))


class OperatorKind(str, enum.Enum):
    INTEGRAL = "integral"
    DERIV_RL = "deriv_rl"
    DERIV_REGULARIZED = "deriv_regularized"


class Sign(str, enum.Enum):
    MINUS = "minus"
    PLUS = "plus"


@dataclass(frozen=True)
class OperatorSpec:
    """A Prabhakar operator with kernel parameters ``kp`` acting from ``t0``.

    For the derivatives ``m = ceil(beta)`` is implied.
    """

    kind: OperatorKind
    kp: KernelParams
    t0: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OperatorKind(self.kind))
        if not self.kp.beta > 0:
            raise DomainError(f"operators need beta > 0, got {self.kp.beta}")
        if complex(self.kp.lam).imag != 0:
            raise DomainError("grid operators use a real lambda")

    @property
    def m(self) -> int:
        return math.ceil(self.kp.beta)

    @property
    def lam(self) -> float:
        return complex(self.kp.lam).real


@dataclass(frozen=True)
class GLWeights:
    """Convolution weights ``W_0..W_n`` with their scalar prefactor."""

    sign: Sign
    params: tuple[float, float, float, float, float]
    w: np.ndarray = field(repr=False)
    prefactor: float

    @property
    def alpha(self) -> float:
        return self.params[0]

    @property
    def h(self) -> float:
        return self.params[4]


def binomial_weights(a: float, n: int) -> np.ndarray:
    """Coefficients of ``(1 - zeta)**a``: ``w_0 = 1``, ``w_j = (1 - (a+1)/j) w_{j-1}``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    j = np.arange(1, n + 1)
    out = np.empty(n + 1)
    out[0] = 1.0
    out[1:] = np.cumprod(1 - (a + 1) / j)
    return out


def _power_series(base: np.ndarray, power: float) -> np.ndarray:
    """Coefficients of ``B(zeta)**power`` for ``B(0) = 1`` by J.C.P. Miller's recurrence."""
    n = base.size - 1
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        j = np.arange(1, k + 1)
        out[k] = np.dot(((power + 1) * j / k - 1) * base[1 : k + 1], out[k - 1 :: -1][:k])
    return out


def _check_stability(alpha: float, lam: float, h: float) -> float:
    x = h ** alpha * lam
    if not abs(x) < 1:
        raise StabilityViolation(f"|h**alpha * lambda| = {abs(x):.4g} must be below 1")
    return x


def gl_weights(spec: OperatorSpec, h: float, n: int) -> GLWeights:
    """Weight table of the integral (sign minus) or of both derivatives (sign plus)."""
    a, b, g, lam = spec.kp.alpha, spec.kp.beta, spec.kp.gamma, spec.lam
    x = _check_stability(a, lam, h)
    sign = Sign.MINUS if spec.kind is OperatorKind.INTEGRAL else Sign.PLUS
    params = (a, b, g, lam, h)
    if g == 0:
        w = binomial_weights(-b if sign is Sign.MINUS else b, n)
        pref = h ** b if sign is Sign.MINUS else h ** (-b)
        return GLWeights(sign, params, w, pref)
    # bar**(-+g) = (1-zeta)**(-+b) * c**(-+g) with c = (1 - x (1-zeta)**(-a)) / (1-x);
    # the factored form avoids the huge binomial coefficients of exponent b/g at small g
    c = -x * binomial_weights(-a, n) / (1 - x)
    c[0] = 1.0
    if sign is Sign.MINUS:
        w = np.convolve(binomial_weights(-b, n), _power_series(c, -g))[: n + 1]
        pref = h ** b * (1 - x) ** (-g)
    else:
        w = np.convolve(binomial_weights(b, n), _power_series(c, g))[: n + 1]
        pref = h ** (-b) * (1 - x) ** g
    return GLWeights(sign, params, w, pref)


def _convolve(weights: GLWeights, values: np.ndarray) -> np.ndarray:
    n = values.size
    return weights.prefactor * np.convolve(weights.w[:n], values)[:n]


def estimate_initial_data(f: GridFn, m: int) -> np.ndarray:
    """``f(t0), f'(t0), ..., f^(m-1)(t0)`` from the interpolating polynomial of degree m+1."""
    npts = min(m + 2, f.values.size)
    x = np.arange(npts, dtype=float)
    coeffs = np.polynomial.polynomial.polyfit(x, f.values[:npts], npts - 1)
    return np.array([coeffs[k] * math.factorial(k) / f.h ** k if k < coeffs.size else 0.0
                     for k in range(m)])


def apply_gl(spec: OperatorSpec, f: GridFn, initial=None) -> GridFn:
    """Apply the operator to sampled data: ``out_n = prefactor * sum_j W_j f_{n-j}``.

    The regularised derivative first subtracts the Taylor polynomial of
    degree ``m-1`` built from ``initial = [f(t0), ..., f^(m-1)(t0)]``; when
    ``initial`` is omitted it is estimated from the first samples and an
    :class:`EstimatedInitialDataWarning` is emitted.
    """
    if not math.isclose(f.t0, spec.t0, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(spec.t0))):
        raise GridMismatch(f"operator starts at t0={spec.t0} but the data start at {f.t0}")
    weights = gl_weights(spec, f.h, f.n)
    values = f.values
    if spec.kind is OperatorKind.DERIV_REGULARIZED:
        m = spec.m
        if initial is None:
            warnings.warn("initial derivatives estimated by one-sided differences; "
                          "expect reduced accuracy", EstimatedInitialDataWarning, stacklevel=2)
            initial = estimate_initial_data(f, m)
        initial = np.asarray(initial, dtype=float)
        if initial.size != m:
            raise DomainError(f"expected {m} initial values, got {initial.size}")
        tau = f.t - f.t0
        taylor = sum(initial[k] * tau ** k / math.factorial(k) for k in range(m))
        values = values - taylor
    return GridFn(f.t0, f.h, _convolve(weights, values))


def _grid_from_times(t_grid) -> tuple[np.ndarray, float]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise DomainError("t_grid needs at least two points")
    h = (t[-1] - t[0]) / (t.size - 1)
    if not (h > 0 and np.allclose(np.diff(t), h, rtol=1e-9, atol=0)):
        raise GridMismatch("t_grid must be uniform and increasing")
    return t, h


def _kernel_values(alpha: float, beta: float, gamma: float, lam: float, tau: np.ndarray,
                   cfg: EvalConfig) -> np.ndarray:
    """``tau**(beta-1) E^gamma_{alpha,beta}(lam tau**alpha)`` with the limit at tau = 0."""
    p = PrabhakarParams(alpha, beta, gamma)
    out = np.empty(tau.size)
    for i, s in enumerate(tau):
        if s == 0:
            if beta > 1:
                out[i] = 0.0
            elif beta == 1:
                out[i] = 1.0
            else:
                raise DomainError("kernel is unbounded at the grid origin for beta < 1")
            continue
        out[i] = evaluate(p, lam * s ** alpha, cfg).value.real * s ** (beta - 1)
    return out


def kernel_action_analytic(inner: tuple[float, float], spec: OperatorSpec, t_grid,
                           cfg: EvalConfig = DEFAULT_CONFIG) -> GridFn:
    """Closed form of the Prabhakar integral applied to the kernel with parameters ``(sigma, mu)``.

    The inner kernel shares ``alpha`` and ``lambda`` with the operator; the
    result is ``(t-t0)**(beta+mu-1) E^{gamma+sigma}_{alpha,beta+mu}(lambda (t-t0)**alpha)``.
    """
    if spec.kind is not OperatorKind.INTEGRAL:
        raise DomainError("the closed form covers the integral operator")
    sigma, mu = inner
    t, h = _grid_from_times(t_grid)
    tau = t - spec.t0
    if np.any(tau < 0):
        raise GridMismatch("t_grid starts before the operator origin")
    vals = _kernel_values(spec.kp.alpha, spec.kp.beta + mu, spec.kp.gamma + sigma, spec.lam, tau, cfg)
    return GridFn(t[0], h, vals)


def _rl_integral_rect(values: np.ndarray, h: float, nu: float) -> np.ndarray:
    """Product-rectangle rule for the Riemann-Liouville integral of order ``nu`` (left samples)."""
    n = values.size
    i = np.arange(1, n)
    b = h ** nu * (i ** nu - (i - 1) ** nu) * special.rgamma(nu + 1)
    out = np.zeros(n)
    out[1:] = np.convolve(b, values[:-1])[: n - 1]
    return out


def integral_series_oracle(spec: OperatorSpec, f: GridFn, K: int | None = None,
                           tol: float = 1e-13) -> GridFn:
    """Prabhakar integral as ``sum_k (gamma)_k lam**k / k! * J^{alpha k + beta} f``.

    Each Riemann-Liouville integral uses the product-rectangle rule.  With
    ``K`` given exactly ``K+1`` terms are summed; otherwise terms are added
    until they fall below ``tol`` relative to the running sum.
    """
    if spec.kind is not OperatorKind.INTEGRAL:
        raise DomainError("the series representation covers the integral operator")
    a, b, g, lam = spec.kp.alpha, spec.kp.beta, spec.kp.gamma, spec.lam
    cap = K if K is not None else _SERIES_CAP
    total = np.zeros(f.values.size)
    coeff = 1.0
    for k in range(cap + 1):
        if k > 0:
            coeff *= (g + k - 1) * lam / k
        if coeff == 0:
            break
        term = coeff * _rl_integral_rect(f.values, f.h, a * k + b)
        total += term
        if K is None and k > 0 and np.max(np.abs(term)) <= tol * max(np.max(np.abs(total)), 1e-300):
            break
    else:
        if K is None:
            raise NoConvergence(f"series for the integral did not settle within {cap} terms")
    return GridFn(f.t0, f.h, total)


def laplace_symbol(spec: OperatorSpec, s: complex) -> complex:
    """Laplace-domain symbol of the operator (zero initial data for the derivatives)."""
    s = complex(s)
    a, b, g, lam = spec.kp.alpha, spec.kp.beta, spec.kp.gamma, complex(spec.kp.lam)
    if not (s.real > 0 and abs(s) > abs(lam) ** (1 / a)):
        raise DomainError("the symbol needs Re(s) > 0 and |s| > |lambda|**(1/alpha)")
    base = s ** a - lam
    if spec.kind is OperatorKind.INTEGRAL:
        return s ** (a * g - b) * base ** (-g)
    return s ** (b - a * g) * base ** g


def discrete_symbol(weights: GLWeights, s: complex) -> complex:
    """Transfer function ``prefactor * sum_j W_j exp(-s h j)`` of a weight table."""
    zeta = cmath.exp(-complex(s) * weights.h)
    powers = zeta ** np.arange(weights.w.size)
    return complex(weights.prefactor * np.sum(weights.w * powers))


def _outer_series(term_fn, n_points: int, K: int, tol: float) -> np.ndarray:
    total = np.zeros(n_points)
    small = 0
    for k in range(K + 1):
        term = term_fn(k)
        total += term
        scale = max(np.max(np.abs(total)), 1e-300)
        if np.max(np.abs(term)) <= tol * scale:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise NoConvergence(f"eigenfunction series did not settle within {K} terms")


def eigenfunction_regularized(p: PrabhakarParams, lam: float, A: float, xi, t_grid,
                              K: int = _SERIES_CAP, tol: float = 1e-13,
                              cfg: EvalConfig = DEFAULT_CONFIG) -> GridFn:
    """Solution of ``D_reg y = A y`` with ``y^(j)(0) = xi_j``, sampled on ``t_grid`` (t >= 0).

    ``y(t) = sum_j sum_k A**k t**(beta k + j) E^{gamma k}_{alpha, beta k + j + 1}(lam t**alpha) xi_j``.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    m = math.ceil(b)
    if xi.size != m:
        raise DomainError(f"expected {m} initial values, got {xi.size}")
    t, h = _grid_from_times(t_grid)
    if np.any(t < 0):
        raise DomainError("eigenfunctions are sampled on t >= 0")

    def term(k: int) -> np.ndarray:
        out = np.zeros(t.size)
        if A == 0 and k > 0:
            return out
        for j in range(m):
            if xi[j] == 0:
                continue
            out += A ** k * xi[j] * _kernel_values(a, b * k + j + 1, g * k, lam, t, cfg)
        return out

    return GridFn(t[0], h, _outer_series(term, t.size, K, tol))


def eigenfunction_rl(p: PrabhakarParams, lam: float, A: float, xi, t_grid,
                     K: int = _SERIES_CAP, tol: float = 1e-13,
                     cfg: EvalConfig = DEFAULT_CONFIG) -> GridFn:
    """Solution of ``D_RL y = A y`` for the Riemann-Liouville-type derivative.

    ``y(t) = sum_j sum_k A**k t**(beta k + beta - j - 1) E^{gamma(k+1)}_{alpha, beta k + beta - j}(lam t**alpha) xi_j``.
    The terms with ``j = m-1`` behave like ``t**(beta - m)``, so ``t_grid``
    must lie in ``t > 0``.
    """
    a, b, g = p.alpha, p.beta, p.gamma
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    m = math.ceil(b)
    if xi.size != m:
        raise DomainError(f"expected {m} initial values, got {xi.size}")
    t, h = _grid_from_times(t_grid)
    if np.any(t <= 0):
        raise DomainError("the Riemann-Liouville eigenfunction is only defined for t > 0")

    def term(k: int) -> np.ndarray:
        out = np.zeros(t.size)
        if A == 0 and k > 0:
            return out
        for j in range(m):
            if xi[j] == 0:
                continue
            out += A ** k * xi[j] * _kernel_values(a, b * k + b - j, g * (k + 1), lam, t, cfg)
        return out

    return GridFn(t[0], h, _outer_series(term, t.size, K, tol))


__all__ = [
    "GLWeights", "GridFn", "OperatorKind", "OperatorSpec", "Sign", "apply_gl", "binomial_weights",
    "discrete_symbol", "eigenfunction_regularized", "eigenfunction_rl", "estimate_initial_data",
    "gl_weights", "integral_series_oracle", "kernel_action_analytic", "laplace_symbol",
]
