"""Command-line front end: tables of function values, model time series and renewal pmfs.

Every subcommand writes a CSV (default) or JSON table to stdout or ``--output``.
Exit codes: 0 on success, 1 on invalid input, 2 when some grid points could
not be evaluated (those rows carry a message in the ``error`` column).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from prabhakar.core.dispatch import evaluate, kernel
from prabhakar.errors import DomainError, PrabhakarError
from prabhakar.models import (MsdKind, MsdModel, RelaxKind, RelaxModel, ViscoParams, creep_compliance,
                              msd, relaxation, relaxation_modulus, response)
from prabhakar.renewal import (CpParams, GfpParams, cp_pmf_table, gfp_mean, gfp_pmf, simulate_counts)
from prabhakar.types import EvalConfig, KernelParams, Method, PrabhakarParams

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2

_METHODS = {"auto": Method.AUTO, "series": Method.SERIES, "asym": Method.ASYMPTOTIC,
            "inversion": Method.INVERSION, "spectral": Method.SPECTRAL}
_RELAX_KINDS = {"debye": RelaxKind.DEBYE, "cc": RelaxKind.COLE_COLE, "dc": RelaxKind.DAVIDSON_COLE,
                "hn": RelaxKind.HAVRILIAK_NEGAMI}
_MSD_KINDS = {"normal": MsdKind.SUB_TO_NORMAL, "plateau": MsdKind.SUB_TO_PLATEAU}
_CONFIG_KEYS = {"rel_tol": float, "max_terms": int, "accept_factor": float, "method": str,
                "precision": int, "format": str}


class UsageError(Exception):
    """Invalid flags or configuration; reported on stderr with exit code 1."""


# --------------------------------------------------------------------------- output
@dataclass(frozen=True)
class OutputSpec:
    """Table format, destination (``"-"`` for stdout) and significant digits."""

    format: str = "csv"
    path: str = "-"
    precision: int = 17

    def __post_init__(self) -> None:
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if not 6 <= self.precision <= 17:
            raise UsageError(f"precision must lie in [6, 17], got {self.precision}")


def format_cell(value, precision: int) -> str:
    """Text of a table cell; floats use ``%.{precision}g`` with no locale."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.*g" % (precision, float(value) + 0.0)  # + 0.0 maps -0 to 0
    return str(value)


def render_csv(columns: list[str], rows: list[dict], precision: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c), precision) for c in columns])
    return buf.getvalue()


def _json_cell(value, precision: int):
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(format_cell(value, precision))
        return x if math.isfinite(x) else None
    return str(value)


def render_json(columns: list[str], rows: list[dict], precision: int) -> str:
    table = [{c: _json_cell(row.get(c), precision) for c in columns} for row in rows]
    return json.dumps(table, indent=1) + "\n"


def parse_csv(text: str) -> tuple[list[str], list[dict]]:
    """Inverse of :func:`render_csv`: numeric cells become int or float, empty cells None."""
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = []
    for record in reader:
        row = {}
        for c, cell in zip(columns, record):
            row[c] = _parse_cell(cell)
        rows.append(row)
    return columns, rows


def _parse_cell(cell: str):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def emit(columns: list[str], rows: list[dict], out: OutputSpec) -> None:
    text = (render_csv if out.format == "csv" else render_json)(columns, rows, out.precision)
    if out.path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --------------------------------------------------------------------------- configuration
def read_config(path: str) -> dict:
    """Plain ``key=value`` file; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}; known: {', '.join(sorted(_CONFIG_KEYS))}")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _settings(args) -> tuple[EvalConfig, OutputSpec]:
    """Merge defaults, config file and flags (flags win)."""
    merged = {"rel_tol": 1e-14, "max_terms": 250, "accept_factor": 1e4, "method": "auto",
              "precision": 17, "format": "csv"}
    if args.config:
        merged.update(read_config(args.config))
    for key, attr in (("rel_tol", "tol"), ("precision", "precision"), ("format", "format"),
                      ("method", "method")):
        value = getattr(args, attr, None)
        if value is not None:
            merged[key] = value
    if merged["method"] not in _METHODS:
        raise UsageError(f"method must be one of {', '.join(_METHODS)}, got {merged['method']!r}")
    try:
        cfg = EvalConfig(rel_tol=merged["rel_tol"], max_terms=merged["max_terms"],
                         accept_factor=merged["accept_factor"], method=_METHODS[merged["method"]])
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    return cfg, OutputSpec(merged["format"], args.output, merged["precision"])


# --------------------------------------------------------------------------- grids
def _grid(start: float, stop: float, steps: int, log: bool) -> np.ndarray:
    if steps < 1:
        raise UsageError("the number of grid steps must be at least 1")
    if steps == 1:
        return np.array([float(start)])
    if log:
        if not (start > 0 and stop > 0):
            raise UsageError("a logarithmic grid needs positive endpoints")
        return np.geomspace(start, stop, steps)
    return np.linspace(start, stop, steps)


def _time_grid(args) -> np.ndarray:
    t = _grid(args.t_from, args.t_to, args.t_steps, args.log)
    if np.any(t <= 0):
        raise UsageError("time grids must be strictly positive")
    return t


def _map(fn, items, jobs: int) -> list:
    """Apply ``fn`` to ``items``, in parallel if ``jobs > 1``; results keep input order."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _guard(fn, *a) -> tuple[object, str | None]:
    """``(value, None)`` or ``(None, message)`` for numerical failures at one point."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return fn(*a), None
    except PrabhakarError as exc:
        return None, f"{type(exc).__name__}: {exc}".replace("\n", " ")


def _finish(columns: list[str], rows: list[dict], out: OutputSpec) -> int:
    emit(columns, rows, out)
    failed = sum(1 for r in rows if r.get("error"))
    if failed:
        print(f"{failed} of {len(rows)} points could not be evaluated", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


# --------------------------------------------------------------------------- subcommands
def _eval_point(p: PrabhakarParams, cfg: EvalConfig, z: complex) -> dict:
    row = {"z_re": z.real, "z_im": z.imag}
    res, err = _guard(evaluate, p, z, cfg)
    if err:
        row.update(value_re=math.nan, value_im=math.nan, est_error=math.inf, method="", error=err)
    else:
        row.update(value_re=res.value.real, value_im=res.value.imag, est_error=res.est_error,
                   method=res.method_used.value, error="")
    return row


def cmd_eval(args) -> int:
    cfg, out = _settings(args)
    p = _params(PrabhakarParams, args.alpha, args.beta, args.gamma)
    if args.z_steps is not None:
        if args.z_from is None or args.z_to is None:
            raise UsageError("a z grid needs --z-from, --z-to and --z-steps")
        r = _grid(args.z_from, args.z_to, args.z_steps, False)
        points = [complex(x * math.cos(args.z_arg), x * math.sin(args.z_arg)) for x in r]
    else:
        points = [complex(args.z_re, args.z_im)]
    rows = _map(partial(_eval_point, p, cfg), points, args.jobs)
    return _finish(["z_re", "z_im", "value_re", "value_im", "est_error", "method", "error"], rows, out)


def _kernel_point(kp: KernelParams, cfg: EvalConfig, t: float) -> dict:
    res, err = _guard(kernel, kp, t, cfg)
    if err:
        return {"t": t, "value_re": math.nan, "value_im": math.nan, "est_error": math.inf,
                "method": "", "error": err}
    return {"t": t, "value_re": res.value.real, "value_im": res.value.imag, "est_error": res.est_error,
            "method": res.method_used.value, "error": ""}


def cmd_kernel(args) -> int:
    cfg, out = _settings(args)
    kp = _params(KernelParams.of, args.alpha, args.beta, args.gamma, args.lam)
    rows = _map(partial(_kernel_point, kp, cfg), list(_time_grid(args)), args.jobs)
    return _finish(["t", "value_re", "value_im", "est_error", "method", "error"], rows, out)


def _relax_point(m: RelaxModel, cfg: EvalConfig, t: float) -> dict:
    psi, e1 = _guard(relaxation, m, t, cfg)
    phi, e2 = _guard(response, m, t, cfg)
    return {"t": t, "relaxation": math.nan if e1 else psi, "response": math.nan if e2 else phi,
            "error": e1 or e2 or ""}


def cmd_relax(args) -> int:
    cfg, out = _settings(args)
    kind = _RELAX_KINDS[args.model]
    alpha = 1.0 if kind in (RelaxKind.DEBYE, RelaxKind.DAVIDSON_COLE) else args.alpha
    gamma = 1.0 if kind in (RelaxKind.DEBYE, RelaxKind.COLE_COLE) else args.gamma
    m = _params(RelaxModel, kind, alpha, gamma, args.tau)
    rows = _map(partial(_relax_point, m, cfg), list(_time_grid(args)), args.jobs)
    return _finish(["t", "relaxation", "response", "error"], rows, out)


def _visco_point(v: ViscoParams, cfg: EvalConfig, t: float) -> dict:
    j, e1 = _guard(creep_compliance, v, t, cfg)
    g, e2 = _guard(partial(relaxation_modulus, cfg=cfg), v, t)
    return {"t": t, "creep": math.nan if e1 else j, "modulus": math.nan if e2 else g,
            "error": e1 or e2 or ""}


def cmd_visco(args) -> int:
    cfg, out = _settings(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = _params(ViscoParams, args.a, args.b, args.alpha, args.beta, args.gamma, args.lam)
    rows = _map(partial(_visco_point, v, cfg), list(_time_grid(args)), args.jobs)
    return _finish(["t", "creep", "modulus", "error"], rows, out)


def cmd_msd(args) -> int:
    cfg, out = _settings(args)
    m = _params(MsdModel, _MSD_KINDS[args.kind], args.alpha, args.b)
    t = _time_grid(args)
    values = []
    rows = []
    for ti in t:
        v, err = _guard(msd, m, float(ti), cfg)
        values.append(math.nan if err else v)
        rows.append({"t": float(ti), "msd": values[-1], "error": err or ""})
    # local log-log slope; needs at least two points
    if t.size > 1:
        slope = np.gradient(np.log(values), np.log(t))
        for row, s in zip(rows, slope):
            row["slope"] = float(s)
    return _finish(["t", "msd", "slope", "error"], rows, out)


def _renewal_params(args):
    if args.family == "gfp":
        return _params(GfpParams, args.rho, args.mu, args.gamma, args.phi, args.lam,
                       check_constraint=not args.no_constraint_check)
    return _params(CpParams, args.nu, args.delta, args.lam)


def _analytic_pmf(params, args, cfg: EvalConfig):
    if isinstance(params, GfpParams):
        return gfp_pmf(params, args.t, K_max=200 if args.k_max is None else args.k_max, cfg=cfg)
    return cp_pmf_table(params, args.t, args.k_max, cfg)  # None: until the tail is negligible


def cmd_renewal(args) -> int:
    cfg, out = _settings(args)
    if not args.t > 0:
        raise UsageError("--t must be positive")
    params = _renewal_params(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if args.action == "mean":
                if isinstance(params, GfpParams):
                    value = gfp_mean(params, args.t, cfg)
                else:
                    value = _cp_mean(params, args.t, cfg)
                code = _finish(["t", "mean"], [{"t": args.t, "mean": value}], out)
            elif args.action == "pmf":
                pmf = _analytic_pmf(params, args, cfg)
                rows = [{"k": k, "p": pmf[k]} for k in range(len(pmf))]
                columns = ["k", "p"]
                if args.paths:
                    _add_empirical(params, args, rows, columns)
                code = _finish(columns, rows, out)
            else:
                if not args.paths:
                    raise UsageError("simulate needs --paths")
                rows = []
                columns = ["k"]
                _add_empirical(params, args, rows, columns, analytic=cfg)
                code = _finish(columns, rows, out)
        except PrabhakarError as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_PARTIAL
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return code


def _cp_mean(c: CpParams, t: float, cfg: EvalConfig) -> float:
    return cp_pmf_table(c, t, None, cfg).mean


def _add_empirical(params, args, rows: list[dict], columns: list[str], analytic: EvalConfig | None = None) -> None:
    if not isinstance(params, CpParams):
        raise UsageError("simulation is available for the cp family only")
    emp = simulate_counts(params, args.t, args.paths, args.seed, k_max=len(rows) - 1 if rows else None)
    n = max(len(rows), len(emp))
    while len(rows) < n:
        rows.append({"k": len(rows)})
    for k, row in enumerate(rows):
        row["empirical"] = emp[k] if k < len(emp) else 0.0
        row["stderr"] = float(emp.stderr[k]) if k < len(emp) else 0.0
    columns += ["empirical", "stderr"]
    if analytic is not None:
        table = cp_pmf_table(params, args.t, n - 1, analytic)
        for k, row in enumerate(rows):
            row["p"] = table[k]
        columns.append("p")


def cmd_selftest(args) -> int:
    from prabhakar.selftest import run_selftest

    report = run_selftest(args.level)
    text = json.dumps(report, indent=1) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    for check in report["checks"]:
        status = "PASS" if check["ok"] else "FAIL"
        print(f"{status} {check['name']} ({check['seconds']:.1f} s): {check['detail']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_USAGE


def _params(factory, *a, **kw):
    try:
        return factory(*a, **kw)
    except (DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# --------------------------------------------------------------------------- argument parsing
class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, grid: bool = False) -> None:
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--output", default="-", help="output file, '-' for stdout")
    p.add_argument("--precision", type=int, default=None, help="significant digits, 6..17")
    p.add_argument("--tol", type=float, default=None, help="relative tolerance")
    p.add_argument("--config", default=None, help="key=value file with defaults")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    if grid:
        p.add_argument("--t-from", type=float, default=1e-2)
        p.add_argument("--t-to", type=float, default=1e2)
        p.add_argument("--t-steps", type=int, default=41)
        p.add_argument("--log", action="store_true", help="logarithmic time grid")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prabhakar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="E^gamma_{alpha,beta}(z) at a point or along a ray")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--z-re", type=float, default=0.0)
    p.add_argument("--z-im", type=float, default=0.0)
    p.add_argument("--z-from", type=float, default=None, help="signed modulus at the grid start")
    p.add_argument("--z-to", type=float, default=None)
    p.add_argument("--z-steps", type=int, default=None)
    p.add_argument("--z-arg", type=float, default=0.0, help="argument of the ray in radians")
    p.add_argument("--method", choices=tuple(_METHODS), default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("kernel", help="t**(beta-1) E^gamma_{alpha,beta}(lambda t**alpha) on a time grid")
    _common(p, grid=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--method", choices=tuple(_METHODS), default=None)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("relax", help="dielectric relaxation and response functions")
    _common(p, grid=True)
    p.add_argument("--model", choices=tuple(_RELAX_KINDS), default="hn")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("visco", help="creep compliance and relaxation modulus")
    _common(p, grid=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_visco)

    p = sub.add_parser("msd", help="mean squared displacement and its log-log slope")
    _common(p, grid=True)
    p.add_argument("--kind", choices=tuple(_MSD_KINDS), default="normal")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--b", type=float, default=1.0)
    p.set_defaults(func=cmd_msd)

    p = sub.add_parser("renewal", help="counting-process pmf, mean or simulation")
    _common(p)
    p.add_argument("action", choices=("pmf", "mean", "simulate"))
    p.add_argument("--family", choices=("gfp", "cp"), required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--no-constraint-check", action="store_true")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k-max", type=int, default=None,
                   help="largest k tabulated (default: until the remaining mass is negligible)")
    p.add_argument("--paths", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_renewal)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--output", default="-", help="file for the JSON report, '-' for stdout")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
