import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import special

from oracles import kernel_mp, prabhakar_integral_quad, prabhakar_mp
from prabhakar.calculus import (GridFn, OperatorKind, OperatorSpec, Sign, apply_gl, binomial_weights,
                                discrete_symbol, eigenfunction_regularized, eigenfunction_rl,
                                estimate_initial_data, gl_weights, integral_series_oracle,
                                kernel_action_analytic, laplace_symbol)
from prabhakar.errors import (DomainError, EstimatedInitialDataWarning, GridMismatch, NoConvergence,
                              StabilityViolation)
from prabhakar.types import KernelParams, PrabhakarParams

INT, RL, REG = OperatorKind.INTEGRAL, OperatorKind.DERIV_RL, OperatorKind.DERIV_REGULARIZED


def spec(kind, a, b, g, lam, t0=0.0):
    return OperatorSpec(kind, KernelParams.of(a, b, g, lam), t0)


def grid(e, t_end=1.0):
    h = t_end * 2.0 ** -e
    return h, h * np.arange(2 ** e + 1)


def order(hs, errs):
    return np.polyfit(np.log2(hs), np.log2(errs), 1)[0]


def printed_recursion(a, b, g, lam, h, n, sign):
    """The weight recursion in its original form: Miller's rule on the coefficients of bar(zeta)**(-+g)."""
    x = h ** a * lam
    bar = (binomial_weights(b / g, n) - x * binomial_weights(b / g - a, n)) / (1 - x)
    p = -g if sign is Sign.MINUS else g
    w = np.zeros(n + 1)
    w[0] = 1.0
    for k in range(1, n + 1):
        j = np.arange(1, k + 1)
        w[k] = np.sum(((p + 1) * j / k - 1) * bar[j] * w[k - j])
    return w


# --------------------------------------------------------------------------- binomial weights
def test_binomial_weights_examples():
    assert np.array_equal(binomial_weights(1.0, 4), [1, -1, 0, 0, 0])
    assert binomial_weights(0.5, 1)[1] == -0.5
    w = binomial_weights(-0.5, 4)
    ref = [special.gamma(j + 0.5) / (special.gamma(0.5) * special.gamma(j + 1)) for j in range(5)]
    np.testing.assert_allclose(w, ref, rtol=1e-14)
    with pytest.raises(DomainError):
        binomial_weights(0.5, -1)


@given(st.floats(-3, 3), st.integers(1, 40))
def test_binomial_weights_match_binom(a, n):
    w = binomial_weights(a, n)
    ref = np.array([float((-1) ** j * mp.binomial(a, j)) for j in range(n + 1)])
    np.testing.assert_allclose(w, ref, rtol=1e-11, atol=1e-14)


# --------------------------------------------------------------------------- weight tables
def test_weights_lambda_zero_are_binomial():
    w = gl_weights(spec(INT, 0.6, 0.7, 1.3, 0.0), 0.01, 30)
    np.testing.assert_allclose(w.w, binomial_weights(-0.7, 30), rtol=1e-13, atol=1e-16)
    assert w.prefactor == pytest.approx(0.01 ** 0.7, rel=1e-14)
    d = gl_weights(spec(RL, 0.6, 0.7, 1.3, 0.0), 0.01, 30)
    np.testing.assert_allclose(d.w, binomial_weights(0.7, 30), rtol=1e-13, atol=1e-16)


def test_weights_rectangle_rule():
    w = gl_weights(spec(INT, 0.5, 1.0, 1.0, 0.0), 0.1, 20)
    np.testing.assert_allclose(w.w, np.ones(21), rtol=1e-14)
    assert w.sign is Sign.MINUS and w.w[0] == 1.0


def test_weights_against_generating_function():
    a, b, g, lam, h, n = 0.5, 0.4, 0.8, -1.0, 0.01, 5
    w = gl_weights(spec(INT, a, b, g, lam), h, n)
    with mp.workdps(40):
        def symbol(zeta):
            u = (1 - zeta) / h
            return u ** (a * g - b) * (u ** a - lam) ** (-g)
        ref = [float(c) for c in mp.taylor(symbol, 0, n)]
    np.testing.assert_allclose(w.prefactor * w.w, ref, rtol=1e-12)


@pytest.mark.parametrize("kind", [INT, RL])
@pytest.mark.parametrize("a, b, g, lam", [(0.5, 0.4, 0.8, -1.0), (0.9, 1.6, 1.7, 2.0), (1.4, 0.3, 0.4, -3.0)])
def test_weights_match_printed_recursion(kind, a, b, g, lam):
    h, n = 2.0 ** -6, 200
    w = gl_weights(spec(kind, a, b, g, lam), h, n)
    sign = Sign.MINUS if kind is INT else Sign.PLUS
    np.testing.assert_allclose(w.w, printed_recursion(a, b, g, lam, h, n, sign), rtol=1e-9, atol=1e-13)
    assert w.params == (a, b, g, lam, h)


def test_weights_continuous_in_gamma():
    h, n = 2.0 ** -6, 60
    w0 = gl_weights(spec(INT, 0.6, 0.7, 0.0, -1.0), h, n)
    diffs = []
    for g in (1e-2, 1e-3, 1e-4):
        w = gl_weights(spec(INT, 0.6, 0.7, g, -1.0), h, n)
        diffs.append(np.max(np.abs(w.prefactor * w.w - w0.prefactor * w0.w)))
    assert diffs[-1] < 1e-5
    assert diffs[0] > diffs[1] > diffs[2]


def test_weights_derivative_inverts_integral():
    s_int = gl_weights(spec(INT, 0.7, 0.9, 1.2, -2.0), 0.01, 100)
    s_der = gl_weights(spec(RL, 0.7, 0.9, 1.2, -2.0), 0.01, 100)
    prod = np.convolve(s_int.w, s_der.w)[:101] * s_int.prefactor * s_der.prefactor
    np.testing.assert_allclose(prod, np.eye(1, 101)[0], atol=1e-12)


def test_stability_guard():
    with pytest.raises(StabilityViolation):
        gl_weights(spec(INT, 0.5, 1.0, 1.0, -4.0), 0.25, 10)
    with pytest.raises(StabilityViolation):
        apply_gl(spec(RL, 0.5, 1.0, 1.0, 2.0), GridFn(0.0, 0.25, np.ones(5)))


# --------------------------------------------------------------------------- grid functions
def test_gridfn_validation():
    with pytest.raises(DomainError):
        GridFn(0.0, 0.0, np.ones(3))
    with pytest.raises(DomainError):
        GridFn(0.0, 0.1, np.ones(1))
    with pytest.raises(DomainError):
        GridFn(0.0, 0.1, np.array([1.0, np.nan]))
    f = GridFn.sample(np.sin, 1.0, 0.5, 4)
    np.testing.assert_allclose(f.t, [1.0, 1.5, 2.0, 2.5, 3.0])
    assert f.n == 4


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        apply_gl(spec(INT, 0.5, 1.0, 1.0, -1.0, t0=0.0), GridFn(0.5, 0.1, np.ones(5)))
    with pytest.raises(GridMismatch):
        kernel_action_analytic((1.0, 1.0), spec(INT, 0.5, 1.0, 1.0, -1.0), [0.0, 0.1, 0.3])


def test_operator_spec_validation():
    with pytest.raises(DomainError):
        spec(INT, 0.5, 0.0, 1.0, -1.0)
    assert spec(REG, 0.5, 1.5, 1.0, -1.0).m == 2
    assert spec(REG, 0.5, 2.0, 1.0, -1.0).m == 2


# --------------------------------------------------------------------------- apply_gl
@pytest.mark.parametrize("g, lam", [(0.0, -1.0), (0.7, 0.0)])
def test_first_integral_of_one(g, lam):
    h, t = grid(8)
    out = apply_gl(spec(INT, 0.5, 1.0, g, lam), GridFn(0.0, h, np.ones_like(t)))
    err = np.max(np.abs(out.values - t))
    assert err <= 1.01 * h


@pytest.mark.parametrize("beta", [0.5, 0.8])
def test_classical_reduction_t_squared(beta):
    errs, hs = [], []
    for e in (6, 8, 10):
        h, t = grid(e)
        f = GridFn(0.0, h, t ** 2)
        j = apply_gl(spec(INT, 0.7, beta, 0.0, -1.0), f).values
        d = apply_gl(spec(RL, 0.7, beta, 0.0, -1.0), f).values
        ref_j = 2 / special.gamma(3 + beta) * t ** (2 + beta)
        ref_d = 2 / special.gamma(3 - beta) * t ** (2 - beta)
        errs.append(max(abs(j[-1] - ref_j[-1]) / ref_j[-1], abs(d[-1] - ref_d[-1]) / ref_d[-1]))
        hs.append(h)
    assert errs[-1] < 1e-2
    assert order(hs, errs) >= 0.8


def test_left_inverse():
    f = lambda t: np.sin(2 * t) + np.exp(-t)
    for a, b, g, lam in ((0.7, 0.6, 0.8, -1.0), (0.5, 1.4, 1.3, 0.5)):
        for e in (6, 8, 10):
            h, t = grid(e)
            F = GridFn(0.0, h, f(t))
            back = apply_gl(spec(RL, a, b, g, lam), apply_gl(spec(INT, a, b, g, lam), F))
            assert np.max(np.abs(back.values - F.values)) < 1e-10


@pytest.mark.parametrize("b", [0.6, 1.5, 2.3])
def test_regularized_annihilates_low_powers(b):
    m = math.ceil(b)
    for k in range(m):
        h, t = grid(8)
        init = [float(math.factorial(k)) if j == k else 0.0 for j in range(m)]
        out = apply_gl(spec(REG, 0.7, b, 0.8, -1.0), GridFn(0.0, h, t ** k), initial=init)
        assert np.max(np.abs(out.values)) <= h


def test_regularized_estimates_initial_data():
    h, t = grid(7)
    f = GridFn(0.0, h, 1 + 2 * t + np.sin(t) ** 2)
    with pytest.warns(EstimatedInitialDataWarning):
        est = apply_gl(spec(REG, 0.6, 1.5, 0.9, -1.0), f)
    exact = apply_gl(spec(REG, 0.6, 1.5, 0.9, -1.0), f, initial=[1.0, 2.0])
    assert np.max(np.abs(est.values - exact.values)) < 1e-3
    np.testing.assert_allclose(estimate_initial_data(f, 2), [1.0, 2.0], atol=1e-4)
    with pytest.raises(DomainError):
        apply_gl(spec(REG, 0.6, 1.5, 0.9, -1.0), f, initial=[1.0])


def test_regularized_equals_rl_of_shifted_data():
    h, t = grid(7)
    f = 3.0 + np.cos(t)
    reg = apply_gl(spec(REG, 0.6, 0.7, 0.9, -1.0), GridFn(0.0, h, f), initial=[4.0]).values
    rl = apply_gl(spec(RL, 0.6, 0.7, 0.9, -1.0), GridFn(0.0, h, f - 4.0)).values
    np.testing.assert_allclose(reg, rl, rtol=0, atol=1e-14)


def test_apply_gl_order_on_kernel():
    a, b, g, lam, sig, mu = 0.6, 0.5, 0.9, -1.0, 0.7, 1.3
    s = spec(INT, a, b, g, lam)
    inner = PrabhakarParams(a, mu, sig)
    errs, hs = [], []
    for e in (6, 7, 8, 9, 10):
        h, t = grid(e)
        fv = np.array([0.0] + [kernel_mp(a, mu, sig, lam, x, dps=20) for x in t[1:]])
        out = apply_gl(s, GridFn(0.0, h, fv)).values
        exact = kernel_action_analytic((sig, mu), s, t).values
        errs.append(abs(out[-1] - exact[-1]) / abs(exact[-1]))
        hs.append(h)
    assert errs[-1] < 1e-2
    assert 0.8 <= order(hs, errs) <= 1.2
    assert inner.alpha == a


# --------------------------------------------------------------------------- kernel action
def test_kernel_action_against_quadrature():
    a, b, g, lam, sig, mu = 0.5, 0.3, 1.0, -1.0, 1.0, 0.7
    s = spec(INT, a, b, g, lam)
    t = np.array([0.0, 2.0])
    got = kernel_action_analytic((sig, mu), s, t).values
    assert got[0] == 1.0  # beta + mu = 1: the kernel starts at E(0) = 1
    for x, v in zip(t[1:], got[1:]):
        inner = lambda u: u ** (mu - 1) * mp.mpc(prabhakar_mp(a, mu, sig, complex(lam * u ** a), 30)).real
        ref = prabhakar_integral_quad(a, b, g, lam, inner, x, dps=30)
        assert v == pytest.approx(ref, rel=1e-8)
        assert v == pytest.approx(kernel_mp(a, b + mu, g + sig, lam, x), rel=1e-12)


def test_kernel_action_sigma_zero_is_single_kernel():
    s = spec(INT, 0.7, 0.4, 1.2, -0.5)
    t = np.linspace(0.0, 1.5, 7)
    got = kernel_action_analytic((0.0, 1.0), s, t).values
    ref = [0.0] + [kernel_mp(0.7, 1.4, 1.2, -0.5, x) for x in t[1:]]
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=0)


def test_kernel_action_needs_integral():
    with pytest.raises(DomainError):
        kernel_action_analytic((1.0, 1.0), spec(RL, 0.5, 1.0, 1.0, -1.0), [0.0, 0.5])


# --------------------------------------------------------------------------- series oracle
def test_series_oracle_gamma_zero_is_rl_integral():
    h, t = grid(8)
    f = GridFn(0.0, h, np.ones_like(t))
    out = integral_series_oracle(spec(INT, 0.6, 0.5, 0.0, -1.0), f)
    np.testing.assert_allclose(out.values, t ** 0.5 / special.gamma(1.5), rtol=1e-12, atol=0)


def test_series_oracle_fixed_terms_and_cap():
    h, t = grid(6)
    f = GridFn(0.0, h, np.ones_like(t))
    one = integral_series_oracle(spec(INT, 0.6, 0.5, 1.0, -1.0), f, K=0)
    np.testing.assert_allclose(one.values, t ** 0.5 / special.gamma(1.5), rtol=1e-12)
    with pytest.raises(NoConvergence):
        integral_series_oracle(spec(INT, 0.05, 0.5, 1.0, -30.0), GridFn(0.0, 1.0, np.ones(40)))
    with pytest.raises(DomainError):
        integral_series_oracle(spec(RL, 0.6, 0.5, 1.0, -1.0), f)


def test_series_oracle_matches_analytic_and_gl():
    a, b, g, lam, sig, mu = 0.6, 0.5, 0.9, -1.0, 0.0, 1.0
    s = spec(INT, a, b, g, lam)
    errs_series, errs_gl, hs = [], [], []
    for e in (6, 8, 10):
        h, t = grid(e)
        f = GridFn(0.0, h, np.ones_like(t))
        exact = kernel_action_analytic((sig, mu), s, t).values
        ser = integral_series_oracle(s, f).values
        gl = apply_gl(s, f).values
        errs_series.append(abs(ser[-1] - exact[-1]) / exact[-1])
        errs_gl.append(abs(gl[-1] - exact[-1]) / exact[-1])
        hs.append(h)
    assert errs_series[-1] < 1e-10
    assert errs_gl[-1] < 1e-2
    assert order(hs, errs_gl) >= 0.8


def test_series_oracle_matches_gl_on_smooth_data():
    h, t = grid(10)
    f = GridFn(0.0, h, np.cos(3 * t) + t)
    s = spec(INT, 0.8, 0.7, 1.1, -1.5)
    ser = integral_series_oracle(s, f).values
    gl = apply_gl(s, f).values
    # both rules are O(h) away from the origin; at t0 they differ by the O(h**beta) end weight
    w = t >= 0.5
    assert np.max(np.abs(ser[w] - gl[w])) < 5 * h


def test_composition_with_rl_integral():
    a, b, g, lam, sig = 0.6, 0.5, 0.9, -1.0, 0.4
    h, t = grid(10)
    f = GridFn(0.0, h, np.exp(-t) * np.cos(2 * t))
    inner = integral_series_oracle(spec(INT, a, b, g, lam), f)
    lhs = integral_series_oracle(spec(INT, a, sig, 0.0, lam), inner).values
    rhs = integral_series_oracle(spec(INT, a, b + sig, g, lam), f).values
    assert np.max(np.abs(lhs - rhs)) < 5 * h


# --------------------------------------------------------------------------- symbols
def test_symbol_lambda_zero():
    s = 1.5 + 0.5j
    assert laplace_symbol(spec(INT, 0.6, 0.7, 1.3, 0.0), s) == pytest.approx(s ** -0.7, rel=1e-14)
    assert laplace_symbol(spec(RL, 0.6, 0.7, 1.3, 0.0), s) == pytest.approx(s ** 0.7, rel=1e-14)
    assert laplace_symbol(spec(REG, 0.6, 0.7, 1.3, 0.0), s) == pytest.approx(s ** 0.7, rel=1e-14)


@given(st.floats(0.2, 1.5), st.floats(0.1, 2.5), st.floats(0.1, 2.0), st.floats(-2, 2),
       st.floats(3.0, 20.0), st.floats(-1.0, 1.0))
def test_symbols_are_inverse(a, b, g, lam, r, phi):
    assume(r > 1.01 * abs(lam) ** (1 / a))
    s = r * complex(math.cos(phi), math.sin(phi))
    prod = laplace_symbol(spec(INT, a, b, g, lam), s) * laplace_symbol(spec(RL, a, b, g, lam), s)
    assert abs(prod - 1) < 1e-12


def test_symbol_value():
    a, g = 0.8, 0.9
    b = a * g
    got = laplace_symbol(spec(INT, a, b, g, -1.0), 2.0)
    with mp.workdps(30):
        ref = mp.power(2, a * g - b) * mp.power(mp.power(2, a) + 1, -g)
    assert got == pytest.approx(complex(ref), rel=1e-14)
    with pytest.raises(DomainError):
        laplace_symbol(spec(INT, a, b, g, -1.0), -1.0)
    with pytest.raises(DomainError):
        laplace_symbol(spec(INT, a, b, g, -9.0), 1.0)


@pytest.mark.parametrize("kind", [INT, RL])
@pytest.mark.parametrize("s", [2.0, 2.0 + 3.0j, 4.0 - 1.0j])
def test_symbol_duality(kind, s):
    sp = spec(kind, 0.7, 0.8, 1.3, -1.0)
    ref = laplace_symbol(sp, s)
    errs = []
    for e in (6, 8, 10):
        h = 2.0 ** -e
        n = int(20 / (s.real * h)) if isinstance(s, complex) else int(20 / (s * h))
        errs.append(abs(discrete_symbol(gl_weights(sp, h, n), s) - ref) / abs(ref))
    assert errs[-1] < 0.05
    assert errs[0] > errs[1] > errs[2]


# --------------------------------------------------------------------------- eigenfunctions
def test_regularized_eigenfunction_reduces_to_ml():
    b, A = 0.6, -0.8
    t = np.linspace(0.0, 2.0, 9)
    y = eigenfunction_regularized(PrabhakarParams(0.7, b, 0.0), -1.0, A, [1.0], t).values
    ref = [mp.mpc(prabhakar_mp(b, 1.0, 1.0, A * x ** b)).real for x in t]
    np.testing.assert_allclose(y, np.array(ref, dtype=float), rtol=1e-12)


def test_rl_eigenfunction_reduces_to_ml():
    b, A = 0.6, -0.8
    t = np.linspace(0.25, 2.0, 8)
    y = eigenfunction_rl(PrabhakarParams(0.7, b, 0.0), 0.5, A, [1.0], t).values
    ref = [x ** (b - 1) * float(mp.mpc(prabhakar_mp(b, b, 1.0, A * x ** b)).real) for x in t]
    np.testing.assert_allclose(y, ref, rtol=1e-12)


def test_eigenfunctions_with_zero_eigenvalue():
    t = np.linspace(0.0, 1.0, 6)
    xi = [2.0, -1.0, 0.5]
    y = eigenfunction_regularized(PrabhakarParams(0.6, 2.4, 0.8), -1.0, 0.0, xi, t).values
    np.testing.assert_allclose(y, 2.0 - t + 0.25 * t ** 2, rtol=1e-13)
    t = t[1:]
    y = eigenfunction_rl(PrabhakarParams(0.6, 0.7, 0.8), -1.0, 0.0, [1.0], t).values
    np.testing.assert_allclose(y, [kernel_mp(0.6, 0.7, 0.8, -1.0, x) for x in t], rtol=1e-12)


def test_eigenfunction_errors():
    p = PrabhakarParams(0.6, 0.7, 0.8)
    with pytest.raises(DomainError):
        eigenfunction_rl(p, -1.0, 1.0, [1.0], [0.0, 0.5, 1.0])
    with pytest.raises(DomainError):
        eigenfunction_regularized(p, -1.0, 1.0, [1.0, 2.0], [0.0, 0.5])
    with pytest.raises(GridMismatch):
        eigenfunction_regularized(p, -1.0, 1.0, [1.0], [0.0, 0.5, 0.6])
    with pytest.raises(NoConvergence):
        eigenfunction_regularized(p, -1.0, 50.0, [1.0], [0.0, 1.0, 2.0], K=3)


def _window(t, res, ref):
    w = t >= 0.5
    return np.max(np.abs(res[w])) / np.max(np.abs(ref[w]))


@pytest.mark.parametrize("b, xi", [(0.6, [1.0]), (1.5, [1.0, 0.5])])
def test_regularized_eigenfunction_residual(b, xi):
    a, g, lam, A = 0.7, 0.8, -1.0, -0.8
    p = PrabhakarParams(a, b, g)
    out = []
    for e in (6, 8, 10):
        h, t = grid(e)
        y = eigenfunction_regularized(p, lam, A, xi, t)
        d = apply_gl(spec(REG, a, b, g, lam), y, initial=xi)
        out.append(_window(t, d.values - A * y.values, A * y.values))
    assert out[-1] < 1e-2
    assert out[0] > out[1] > out[2]


def test_rl_eigenfunction_residual():
    a, b, g, lam, A, xi = 0.7, 1.5, 0.8, -1.0, -0.8, [1.0, 0.0]
    p = PrabhakarParams(a, b, g)
    out = []
    for e in (6, 8, 10):
        h, t = grid(e)
        y = eigenfunction_rl(p, lam, A, xi, t[1:])
        vals = np.concatenate([[0.0], y.values])
        d = apply_gl(spec(RL, a, b, g, lam), GridFn(0.0, h, vals)).values
        out.append(_window(t, d - A * vals, A * vals))
    assert out[-1] < 1e-2
    assert out[0] > out[1] > out[2]


# --------------------------------------------------------------------------- purity
@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=40))
def test_apply_gl_is_linear_and_pure(vals):
    f = GridFn(0.0, 0.05, np.array(vals))
    s = spec(INT, 0.6, 0.8, 1.1, -1.0)
    before = f.values.copy()
    one = apply_gl(s, f).values
    two = apply_gl(s, GridFn(0.0, 0.05, 2 * f.values)).values
    np.testing.assert_allclose(two, 2 * one, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(f.values, before)
    np.testing.assert_array_equal(apply_gl(s, f).values, one)
