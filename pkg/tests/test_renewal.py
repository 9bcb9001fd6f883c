import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from oracles import poisson_pmf, prabhakar_mp
from prabhakar.calculus import GridFn, OperatorKind, OperatorSpec, apply_gl
from prabhakar.errors import CancellationFailure, CancellationWarning, DomainError
from prabhakar.renewal import (CpParams, GfpParams, Pmf, build_sampler, cp_cdf, cp_pmf, cp_pmf_table,
                               cp_waiting_density, gfp_mean, gfp_pgf, gfp_pmf, gfp_waiting_density,
                               sample_waiting, simulate_counts, weighted_poisson_pmf)
from prabhakar.types import KernelParams, PrabhakarParams

POISSON = GfpParams(1.0, 1.0, 0.0, 1.0, 1.5)
VALID = GfpParams(0.5, 0.4, 0.5, 1.0, 1.0)


def E_mp(a, b, g, z):
    return float(mp.mpc(prabhakar_mp(a, b, g, z)).real)


# --------------------------------------------------------------------------- parameters
def test_gfp_constraint():
    with pytest.raises(DomainError, match="r=0"):
        GfpParams(0.9, 0.8, 0.5, 1.0, 1.0)
    g = GfpParams(0.9, 0.8, 0.5, 1.0, 1.0, check_constraint=False)
    assert [r for r, _ in g.constraint_violations()] == [0]
    assert VALID.constraint_violations() == []
    assert GfpParams(0.3, 0.2, 0.0, 1.0, 1.0).constraint_violations() == []
    for bad in ((0.0, 1.0, 1.0, 1.0, 1.0), (1.0, 1.5, 1.0, 1.0, 1.0), (1.0, 1.0, -1.0, 1.0, 1.0),
                (1.0, 1.0, 1.0, 0.0, 1.0), (1.0, 1.0, 1.0, 1.0, 0.0)):
        with pytest.raises(DomainError):
            GfpParams(*bad)


def test_cp_validation():
    with pytest.raises(DomainError):
        CpParams(1.2, 1.0, 1.0)
    with pytest.raises(DomainError):
        CpParams(0.9, 0.0, 1.0)
    with pytest.raises(DomainError):
        CpParams(0.9, 1.0, -1.0)


def test_pmf_invariants():
    with pytest.raises(DomainError):
        Pmf(1.0, np.array([0.5, 0.4]))
    with pytest.raises(DomainError):
        Pmf(1.0, np.array([1.1, -0.1]))
    p = Pmf(1.0, np.array([0.5, 0.4]), tail_mass=0.1)
    assert len(p) == 2 and p[1] == 0.4 and p.mean == pytest.approx(0.4)


# --------------------------------------------------------------------------- GFP family
def test_pgf_examples():
    assert gfp_pgf(VALID, 1.0, 0.7) == 1.0
    assert gfp_pgf(VALID, 0.3, 0.0) == 1.0
    g = GfpParams(0.6, 0.7, 0.0, 2.0, 1.3)
    for v, t in ((0.3, 0.5), (-0.5, 1.0), (0.9, 2.0)):
        ref = E_mp(0.7, 1.0, 1.0, -1.3 * (1 - v) * t ** 0.7)
        assert gfp_pgf(g, v, t) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(DomainError):
        gfp_pgf(VALID, 1.5, 1.0)


def test_pgf_matches_pmf():
    pm = gfp_pmf(VALID, 0.8)
    for v in (0.0, 0.4, -0.7):
        assert gfp_pgf(VALID, v, 0.8) == pytest.approx(np.polyval(pm.probs[::-1], v), abs=1e-10)


def test_pmf_at_zero():
    pm = gfp_pmf(VALID, 0.0)
    assert pm.probs.tolist() == [1.0] and pm.tail_mass == 0.0


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0])
def test_gfp_poisson_reduction(t):
    pm = gfp_pmf(POISSON, t)
    x = 1.5 * t
    for k in range(len(pm)):
        ref = poisson_pmf(k, x)
        assert pm[k] == pytest.approx(ref, rel=1e-10, abs=1e-300) or abs(pm[k] - ref) < 1e-15
    assert gfp_mean(POISSON, t) == pytest.approx(x, rel=1e-12)
    assert math.fsum(pm.probs) + pm.tail_mass == pytest.approx(1, abs=1e-10)


def test_gfp_example_normalization():
    g = GfpParams(0.9, 0.8, 0.5, 1.0, 1.0, check_constraint=False)
    pm = gfp_pmf(g, 0.5)
    assert math.fsum(pm.probs) == pytest.approx(1, abs=1e-8)
    assert pm.mean == pytest.approx(gfp_mean(g, 0.5), rel=1e-8)


@pytest.mark.parametrize("t", [0.2, 0.5, 1.0, 2.0])
def test_gfp_valid_family(t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CancellationWarning)
        pm = gfp_pmf(VALID, t)
    assert np.all(pm.probs >= -1e-10)
    assert math.fsum(pm.probs) == pytest.approx(1, abs=1e-8)
    assert pm.mean == pytest.approx(gfp_mean(VALID, t), abs=1e-6)


def test_gfp_mean_reductions():
    g = GfpParams(0.6, 0.7, 0.0, 2.0, 1.3)
    assert gfp_mean(g, 2.0) == pytest.approx(1.3 * 2.0 ** 0.7 / math.gamma(1.7), rel=1e-13)
    assert gfp_mean(g, 0.0) == 0.0
    assert gfp_mean(VALID, 1.5) == pytest.approx(1.5 ** 0.4 * E_mp(0.5, 1.4, 0.5, -(1.5 ** 0.5)), rel=1e-12)


def test_gfp_certification_window():
    with pytest.warns(CancellationWarning):
        gfp_pmf(POISSON, 6.0)
    with pytest.raises(CancellationFailure):
        gfp_pmf(POISSON, 9.0)
    with pytest.raises(CancellationFailure):
        gfp_pmf(VALID, 5.0)


def test_gfp_waiting_density():
    g = GfpParams(1.0, 1.0, 0.0, 3.0, 1.5)
    for t in (0.1, 1.0, 3.0):
        assert gfp_waiting_density(g, t) == pytest.approx(1.5 * math.exp(-1.5 * t), rel=1e-10)
    with pytest.raises(DomainError):
        gfp_waiting_density(g, 0.0)


def test_gfp_waiting_density_integrates_to_first_event():
    T = 2.0
    val, _ = integrate.quad(lambda t: gfp_waiting_density(VALID, t), 0, T, limit=200)
    assert val == pytest.approx(1 - gfp_pmf(VALID, T)[0], abs=1e-6)
    grid = np.linspace(0.01, 2.5, 60)
    assert min(gfp_waiting_density(VALID, t) for t in grid) >= -1e-10


# --------------------------------------------------------------------------- CP family
def test_cp_waiting_density_examples():
    c = CpParams(1.0, 1.0, 2.0)
    for t in (0.1, 1.0, 4.0):
        assert cp_waiting_density(c, t) == pytest.approx(2 * math.exp(-2 * t), rel=1e-14)
    c = CpParams(0.7, 1.0, 1.5)
    for t in (0.1, 1.0, 4.0):
        ref = 1.5 * t ** -0.3 * E_mp(0.7, 0.7, 1.0, -1.5 * t ** 0.7)
        assert cp_waiting_density(c, t) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(DomainError):
        cp_waiting_density(c, 0.0)


@pytest.mark.parametrize("nu, delta, lam", [(0.9, 1.0, 1.0), (0.7, 1.3, 2.0), (0.8, 0.6, 0.5)])
def test_cp_waiting_density_normalized(nu, delta, lam):
    c = CpParams(nu, delta, lam)
    scale = lam ** (-1 / nu)
    lo, hi = 1e-12 * scale, 1e10 * scale
    f = lambda u: math.exp(u) * cp_waiting_density(c, math.exp(u))
    val, _ = integrate.quad(f, math.log(lo), math.log(hi), limit=400, epsabs=0, epsrel=1e-10)
    head = (lam * lo ** nu) ** delta / math.gamma(nu * delta + 1)
    tail = delta / (lam * hi ** nu * math.gamma(1 - nu))
    assert val + head + tail == pytest.approx(1, abs=1e-6)
    assert cp_cdf(c, 1.7 * scale) == pytest.approx(
        integrate.quad(f, math.log(lo), math.log(1.7 * scale), limit=200, epsrel=1e-11)[0] + head, abs=1e-9)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.0])
def test_cp_poisson_reduction(t):
    c = CpParams(1.0, 1.0, 1.5)
    for k in range(12):
        assert cp_pmf(c, k, t) == pytest.approx(poisson_pmf(k, 1.5 * t), rel=1e-10)
    tab = cp_pmf_table(c, t)
    assert tab.mean == pytest.approx(1.5 * t, rel=1e-10)


def test_cp_pmf_matches_closed_form():
    c = CpParams(0.8, 1.4, 1.2)
    t = 1.3
    x = 1.2 * t ** 0.8

    def level(k):
        if k == 0:
            return 1.0
        dk = 1.4 * k
        return x ** dk * E_mp(0.8, 0.8 * dk + 1, dk, -x)

    for k in range(6):
        assert cp_pmf(c, k, t) == pytest.approx(level(k) - level(k + 1), rel=1e-10)
    assert cp_pmf(c, 0, 0.0) == 1.0 and cp_pmf(c, 3, 0.0) == 0.0


def test_cp_table_telescopes():
    c = CpParams(0.8, 1.4, 1.2)
    tab = cp_pmf_table(c, 2.0, K=5)
    assert len(tab) == 6
    assert math.fsum(tab.probs) + tab.tail_mass == pytest.approx(1, abs=1e-14)
    full = cp_pmf_table(c, 2.0)
    assert full.tail_mass < 1e-14
    assert math.fsum(full.probs) == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(full.probs[:6], tab.probs, rtol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 1.0), st.floats(0.3, 2.5), st.floats(0.2, 3.0), st.floats(0.05, 3.0))
def test_cp_pmf_nonnegative(nu, delta, lam, t):
    tab = cp_pmf_table(CpParams(nu, delta, lam), t)
    assert np.all(tab.probs >= -1e-10)


def test_cp_volterra_equation():
    nu, delta, lam = 0.8, 1.3, 1.0
    c = CpParams(nu, delta, lam)
    spec = OperatorSpec(OperatorKind.INTEGRAL, KernelParams.of(nu, nu * delta, delta, -lam))
    errs = []
    for e in (6, 8, 10):
        h = 2.0 ** -e
        t = h * np.arange(2 ** e + 1)
        for k in (1, 2):
            prev = np.array([cp_pmf(c, k - 1, s) for s in t])
            out = lam ** delta * apply_gl(spec, GridFn(0.0, h, prev)).values
            ref = np.array([cp_pmf(c, k, s) for s in t])
            w = t >= 0.5
            if k == 1:
                errs.append(np.max(np.abs(out[w] - ref[w])))
    assert errs[-1] < 1e-2
    assert errs[0] > errs[1] > errs[2]


# --------------------------------------------------------------------------- weighted Poisson
def test_weighted_poisson_reduces_to_poisson():
    p = PrabhakarParams(1.0, 1.0, 1.0)
    for n in range(10):
        assert weighted_poisson_pmf(p, 2.5, n) == pytest.approx(poisson_pmf(n, 2.5), rel=1e-13)


def test_weighted_poisson_example():
    p = PrabhakarParams(0.5, 1.0, 2.0)
    assert weighted_poisson_pmf(p, 1.0, 0) == pytest.approx(1 / E_mp(0.5, 1.0, 2.0, 1.0), rel=1e-13)


@pytest.mark.parametrize("a, b, g, x", [(0.5, 1.0, 2.0, 1.0), (1.5, 0.7, 0.4, 3.0), (0.8, 2.0, 1.0, 6.0)])
def test_weighted_poisson_normalized(a, b, g, x):
    p = PrabhakarParams(a, b, g)
    probs = [weighted_poisson_pmf(p, x, n) for n in range(201)]
    assert math.fsum(probs) == pytest.approx(1, abs=1e-10)
    assert min(probs) >= 0


def test_weighted_poisson_errors():
    with pytest.raises(DomainError):
        weighted_poisson_pmf(PrabhakarParams(0.5, 1.0, 1.0), 0.0, 1)
    with pytest.raises(DomainError):
        weighted_poisson_pmf(PrabhakarParams(0.5, 1.0, 1.0), 1.0, -1)


# --------------------------------------------------------------------------- sampling
@pytest.fixture(scope="module")
def sampler():
    return build_sampler(CpParams(0.9, 1.0, 1.0))


def test_seed_reproducibility(sampler):
    c = sampler.params
    a = sample_waiting(c, 5000, 42, sampler=sampler)
    b = sample_waiting(c, 5000, 42, sampler=sampler)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_waiting(c, 5000, 43, sampler=sampler))
    # chunked streams: a prefix of whole chunks does not depend on the total size
    long = sample_waiting(c, 3 * 4096, 42, sampler=sampler)
    assert np.array_equal(long[:4096], sample_waiting(c, 4096, 42, sampler=sampler))


def test_ks_against_tabulated_cdf(sampler):
    x = sample_waiting(sampler.params, 10_000, 7, sampler=sampler)
    res = stats.kstest(x, lambda q: sampler.cdf(q))
    assert res.statistic < 1.63 / math.sqrt(10_000)


def test_exponential_waiting_mean():
    c = CpParams(1.0, 1.0, 2.0)
    x = sample_waiting(c, 20_000, 3)
    se = 0.5 / math.sqrt(x.size)
    assert abs(x.mean() - 0.5) < 4 * se


def test_sampler_ppf_inverts_cdf(sampler):
    u = np.array([1e-12, 1e-6, 0.1, 0.5, 0.9, 1 - 1e-6])
    t = sampler.ppf(u)
    assert np.all(np.diff(t) > 0)
    np.testing.assert_allclose(sampler.cdf(t[1:-1]), u[1:-1], rtol=1e-5)


def test_simulation_matches_pmf(sampler):
    c = sampler.params
    n = 100_000
    emp = simulate_counts(c, 1.0, n, seed=11, sampler=sampler)
    ref = cp_pmf_table(c, 1.0, len(emp) - 1)
    checked = 0
    for k in range(len(emp)):
        if ref[k] * n >= 5:
            se = math.sqrt(ref[k] * (1 - ref[k]) / n)
            assert abs(emp[k] - ref[k]) < 4 * se
            checked += 1
    assert checked >= 4
    assert emp.stderr is not None and emp.stderr.shape == emp.probs.shape
    again = simulate_counts(c, 1.0, n, seed=11, sampler=sampler)
    assert np.array_equal(emp.probs, again.probs)


def test_simulation_k_max_tail(sampler):
    emp = simulate_counts(sampler.params, 2.0, 5000, seed=5, k_max=1, sampler=sampler)
    assert len(emp) == 2 and emp.tail_mass > 0
    with pytest.raises(DomainError):
        simulate_counts(sampler.params, 0.0, 10, seed=1, sampler=sampler)


@pytest.mark.parametrize("nu, delta, lam, t", [(0.5, 1.0, 2.0, 2.0), (0.521, 0.702, 2.66, 2.45),
                                               (0.374, 1.693, 1.265, 2.19), (0.312, 0.968, 3.0, 0.823)])
def test_cp_deep_levels_against_bigfloat(nu, delta, lam, t):
    c = CpParams(nu, delta, lam)
    x = lam * t ** nu

    def level(k):
        dk = delta * k
        return mp.re(mp.power(x, dk) * prabhakar_mp(nu, nu * dk + 1, dk, -x))

    for k in (5, 12, 25, 50):
        assert cp_pmf(c, k, t) == pytest.approx(float(level(k) - level(k + 1)), abs=1e-11)


def test_cp_nu_near_one_table():
    # strict certification fails in the validity scan here; the scan only needs an error bar
    tab = cp_pmf_table(CpParams(0.99999, 1.0, 1.0), 1.0)
    assert np.all(tab.probs >= 0)
    np.testing.assert_allclose(tab.probs[:6], [poisson_pmf(k, 1.0) for k in range(6)], atol=1e-4)
