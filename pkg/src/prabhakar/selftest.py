"""Built-in invariant checks run by ``prabhakar selftest``.

Each check returns ``(ok, detail)``; the runner times them and assembles a
machine-readable report.  ``quick`` uses reduced sample sizes, ``full`` the
sizes of the test-suite.
"""

from __future__ import annotations

import math
import time
import warnings

import numpy as np
from scipy import special

from prabhakar.calculus import GridFn, OperatorKind, OperatorSpec, apply_gl, kernel_action_analytic
from prabhakar.core.dispatch import evaluate
from prabhakar.core.identities import integer_gamma_via_ml, reduce_gamma
from prabhakar.core.inversion import eval_inversion
from prabhakar.core.series import eval_series
from prabhakar.errors import NoConvergence
from prabhakar.models import MsdKind, MsdModel, RelaxModel, msd, relaxation
from prabhakar.renewal import CpParams, GfpParams, cp_pmf_table, gfp_pmf, simulate_counts
from prabhakar.types import EvalConfig, KernelParams, Method, PrabhakarParams

_LONG_SERIES = EvalConfig(max_terms=4000)
_SIZES = {"quick": {"draws": 25, "gl_sets": 2, "gl_levels": (6, 7, 8), "paths": 20_000},
          "full": {"draws": 200, "gl_sets": 10, "gl_levels": (6, 7, 8, 9, 10), "paths": 100_000}}


def check_exponential(size: dict) -> tuple[bool, str]:
    p = PrabhakarParams(1.0, 1.0, 1.0)
    x = np.linspace(-5, 5, 101)
    err_s = max(abs(evaluate(p, v).value.real / math.exp(v) - 1) for v in x)
    cfg = EvalConfig(method=Method.INVERSION)
    y = np.linspace(-50, -5, 46)
    err_i = max(abs(evaluate(p, v, cfg).value.real / math.exp(v) - 1) for v in y)
    return err_s < 1e-12 and err_i < 1e-10, f"series {err_s:.2e}, inversion {err_i:.2e}"


def check_erfc(size: dict) -> tuple[bool, str]:
    p = PrabhakarParams(0.5, 1.0, 1.0)
    err = max(abs(evaluate(p, -x).value.real / special.erfcx(x) - 1) for x in (0.5, 1.0, 2.0))
    return err < 1e-8, f"max rel err {err:.2e}"


def check_cross_method(size: dict) -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst, used, skipped = 0.0, 0, 0
    while used < size["draws"]:
        a = rng.uniform(0.1, 0.95)
        b = rng.uniform(0.2, 2.0)
        g = rng.uniform(0.2, 2.0)
        r = rng.uniform(0.1, 5.0)
        theta = rng.uniform(a * math.pi, math.pi) * rng.choice((-1, 1))
        z = r * complex(math.cos(theta), math.sin(theta))
        p = PrabhakarParams(a, b, g)
        try:
            s = eval_series(p, z, _LONG_SERIES, warn=False)
        except NoConvergence:
            skipped += 1
            continue
        if s.cancellation:
            skipped += 1
            continue
        i = eval_inversion(p, z)
        worst = max(worst, abs(s.value - i.value) / max(abs(s.value), 1e-300))
        used += 1
    return worst < 1e-9, f"{used} draws ({skipped} skipped), max rel diff {worst:.2e}"


def check_reduction(size: dict) -> tuple[bool, str]:
    worst_red, worst_sum = 0.0, 0.0
    for a, b, g, z in ((0.6, 1.3, 0.7, -1.2 + 0.4j), (0.9, 2.1, 1.4, 0.8), (0.4, 1.7, 0.5, -2.0)):
        p = PrabhakarParams(a, b, g)
        direct = evaluate(p.with_(gamma=g + 1), z).value
        for variant in ("shift", "shift_with_z"):
            val = reduce_gamma(p, z, variant).value
            worst_red = max(worst_red, abs(val - direct) / abs(direct))
    for k in range(6):
        a, b, z = 0.7, 1.4, -0.9
        val = integer_gamma_via_ml(a, b, k, z).value
        ref = eval_series(PrabhakarParams(a, b, k + 1), z, warn=False).value
        worst_sum = max(worst_sum, abs(val - ref) / abs(ref))
    return worst_red < 1e-11 and worst_sum < 1e-9, f"reduction {worst_red:.2e}, summation {worst_sum:.2e}"


def check_gl(size: dict) -> tuple[bool, str]:
    rng = np.random.default_rng(3)
    orders, finals = [], []
    for _ in range(size["gl_sets"]):
        a, b, g = rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5)
        lam, sig, mu = -rng.uniform(0.2, 2.0), rng.uniform(0, 1), rng.uniform(1, 2)
        spec = OperatorSpec(OperatorKind.INTEGRAL, KernelParams.of(a, b, g, lam))
        inner = KernelParams.of(a, mu, sig, lam)
        errs = []
        for e in size["gl_levels"]:
            h = 2.0 ** -e
            t = h * np.arange(2 ** e + 1)
            fv = np.array([0.0 if s == 0 and mu > 1 else
                           s ** (mu - 1) * evaluate(inner.base, lam * s ** a).value.real for s in t])
            out = apply_gl(spec, GridFn(0.0, h, fv)).values
            exact = kernel_action_analytic((sig, mu), spec, t).values
            errs.append(abs(out[-1] - exact[-1]) / abs(exact[-1]))
        # least-squares slope of log2(error) against log2(1/h)
        orders.append(-np.polyfit(size["gl_levels"], np.log2(errs), 1)[0])
        finals.append(errs[-1])
    ok = all(0.8 <= o <= 1.2 for o in orders)
    return ok, f"orders {', '.join(f'{o:.2f}' for o in orders)}; endpoint errors {max(finals):.1e}"


def check_relaxation(size: dict) -> tuple[bool, str]:
    models = [RelaxModel.debye(), RelaxModel.cole_cole(0.6), RelaxModel.davidson_cole(0.5),
              RelaxModel.havriliak_negami(0.7, 0.8)]
    t = np.geomspace(1e-3, 1e2, 40)
    for m in models:
        psi = np.array([relaxation(m, s) for s in t])
        if abs(relaxation(m, 0.0) - 1) > 1e-14 or np.any(np.diff(psi) > 1e-14):
            return False, f"{m.kind.value}: not monotone or Psi(0) != 1"
    return True, f"{len(models)} models monotone with Psi(0) = 1"


def check_poisson(size: dict) -> tuple[bool, str]:
    g = GfpParams(1.0, 1.0, 0.0, 1.0, 1.3)
    worst = 0.0
    for t in (0.5, 2.0):
        pmf = gfp_pmf(g, t)
        x = 1.3 * t
        for k in range(len(pmf)):
            ref = math.exp(-x + k * math.log(x) - math.lgamma(k + 1))
            worst = max(worst, abs(pmf[k] - ref))
    return worst < 1e-10, f"max abs diff {worst:.2e}"


def check_monte_carlo(size: dict) -> tuple[bool, str]:
    c = CpParams(0.9, 1.0, 1.0)
    emp = simulate_counts(c, 1.0, size["paths"], seed=11)
    ref = cp_pmf_table(c, 1.0, len(emp) - 1)
    worst = 0.0
    for k in range(len(emp)):
        if ref[k] * size["paths"] >= 5:
            se = math.sqrt(ref[k] * (1 - ref[k]) / size["paths"])
            worst = max(worst, abs(emp[k] - ref[k]) / se)
    return worst < 4, f"max deviation {worst:.2f} standard errors"


def check_msd(size: dict) -> tuple[bool, str]:
    t = np.array([1e2, 1e4])
    out = []
    for kind, target in ((MsdKind.SUB_TO_NORMAL, 1.0), (MsdKind.SUB_TO_PLATEAU, 0.0)):
        m = MsdModel(kind, 0.5, 1.0)
        v = [msd(m, s) for s in t]
        out.append((math.log(v[1] / v[0]) / math.log(t[1] / t[0]), target))
    ok = all(abs(s - target) <= 0.05 for s, target in out)
    return ok, ", ".join(f"slope {s:.3f} (target {target:g})" for s, target in out)


CHECKS = [
    ("exponential", check_exponential),
    ("erfc", check_erfc),
    ("cross_method", check_cross_method),
    ("reduction", check_reduction),
    ("gl_convergence", check_gl),
    ("relaxation_cm", check_relaxation),
    ("poisson_reduction", check_poisson),
    ("monte_carlo", check_monte_carlo),
    ("msd_slopes", check_msd),
]


def run_selftest(level: str = "quick") -> dict:
    """Run every check at ``level`` and return the report as a dict."""
    size = _SIZES[level]
    checks = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ok, detail = fn(size)
        except Exception as exc:  # a crash is a failed check, not a crashed runner
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append({"name": name, "ok": bool(ok), "detail": detail,
                       "seconds": time.perf_counter() - start})
    return {"level": level, "passed": all(c["ok"] for c in checks), "checks": checks}
