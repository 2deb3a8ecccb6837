"""Command line front-end: analyze | window | solve | study | calibrate.

Exit codes for analyze: 0 Fredholm, 1 not Fredholm, 2 inconclusive, 3+
error.  All reports echo the configuration and the tool version; tables can
be written as JSON or CSV.
"""

from __future__ import annotations

import csv
import json
import math
import re
import sys

import click
import numpy as np

from . import __version__, layerpot, mellin
from .geometry import DomainError, parse_domain
from .mellin import MellinError, WeightLine


# -- boundary data mini-expressions ---------------------------------------

_TOKEN = re.compile(r"\s*(\d+\.\d*|\.\d+|\d+|[A-Za-z_]+|\*\*|[-+*/^()])")


class ExprError(ValueError):
    """Malformed boundary-data expression."""


def parse_boundary_data(text: str):
    """Compile a small closed expression grammar into a function g(x, y).

    Supported: numbers, x, y, z (= x + i y), pi, + - * / ^, parentheses,
    and the harmonic tags re(...) / im(...).  The result must be real.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ExprError(f"bad character near {text[pos:]!r}")
            break
        tok = m.group(1)
        tokens.append("^" if tok == "**" else tok)
        pos = m.end()
    tokens.append(None)                 # sentinel

    state = {"i": 0}

    def peek():
        return tokens[state["i"]]

    def take(expected=None):
        tok = tokens[state["i"]]
        if expected is not None and tok != expected:
            raise ExprError(f"expected {expected!r}, got {tok!r}")
        state["i"] += 1
        return tok

    def expr():
        node = term()
        while peek() in ("+", "-"):
            if take() == "+":
                node = (lambda l, r: lambda x, y, z: l(x, y, z) + r(x, y, z))(node, term())
            else:
                node = (lambda l, r: lambda x, y, z: l(x, y, z) - r(x, y, z))(node, term())
        return node

    def term():
        node = unary()
        while peek() in ("*", "/"):
            if take() == "*":
                node = (lambda l, r: lambda x, y, z: l(x, y, z) * r(x, y, z))(node, unary())
            else:
                node = (lambda l, r: lambda x, y, z: l(x, y, z) / r(x, y, z))(node, unary())
        return node

    def unary():
        if peek() in ("+", "-"):
            if take() == "-":
                inner = unary()
                return lambda x, y, z: -inner(x, y, z)
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == "^":
            take()
            exp = unary()
            return lambda x, y, z: base(x, y, z) ** exp(x, y, z)
        return base

    def atom():
        tok = peek()
        if tok is None:
            raise ExprError("unexpected end of expression")
        if tok == "(":
            take()
            node = expr()
            take(")")
            return node
        take()
        if re.fullmatch(r"\d+\.\d*|\.\d+|\d+", tok):
            val = float(tok)
            return lambda x, y, z: val
        if tok == "x":
            return lambda x, y, z: x
        if tok == "y":
            return lambda x, y, z: y
        if tok == "z":
            return lambda x, y, z: z
        if tok == "pi":
            return lambda x, y, z: math.pi
        if tok in ("re", "im"):
            take("(")
            node = expr()
            take(")")
            if tok == "re":
                return lambda x, y, z: complex(node(x, y, z)).real
            return lambda x, y, z: complex(node(x, y, z)).imag
        raise ExprError(f"unknown token {tok!r}")

    root = expr()
    if peek() is not None:
        raise ExprError(f"trailing input at {peek()!r}")

    def g(x, y):
        val = root(x, y, complex(x, y))
        val = complex(val)
        if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
            raise ExprError("boundary data evaluates to a complex value")
        return val.real

    return g


# -- shared helpers --------------------------------------------------------

def _load_line(calibration: str | None) -> WeightLine:
    if calibration is None:
        return WeightLine(0.0)
    cal = mellin.load_line_calibration(calibration)
    return WeightLine(0.0, slope=cal["slope"], intercept=cal["intercept"])


def _emit(report: dict, out: str | None, fmt: str, table_key: str | None = None):
    if fmt == "csv" and table_key is not None:
        rows = report[table_key]
        target = open(out, "w", newline="") if out else sys.stdout
        try:
            writer = csv.writer(target)
            for row in rows:
                writer.writerow(row)
        finally:
            if out:
                target.close()
        return
    text = json.dumps(report, indent=2, default=_jsonable)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def _config_echo(**kwargs) -> dict:
    cfg = {k: v for k, v in kwargs.items() if v is not None}
    cfg["version"] = __version__
    return cfg


def _fail(message: str, code: int = 3):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(__version__)
def main():
    """Fredholm analysis of layer potential operators c*I + K."""


_common = [
    click.option("--c", "c", type=float, default=1.0, show_default=True,
                 help="scalar part of c*I + K"),
    click.option("--tol", type=float, default=mellin.SCAN_TOL,
                 show_default=True, help="invertibility tolerance"),
    click.option("--xi-max", type=float, default=mellin.XI_MAX_DEFAULT,
                 show_default=True, help="initial scan range on the line"),
    click.option("--calibration", type=click.Path(exists=True), default=None,
                 help="weight-line calibration file"),
    click.option("--out", type=click.Path(), default=None,
                 help="write the report here instead of stdout"),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                 default="json", show_default=True),
    click.option("--jobs", type=int, default=1, show_default=True,
                 help="worker bound for parallel sections"),
]


def _with_common(cmd):
    for opt in reversed(_common):
        cmd = opt(cmd)
    return cmd


@main.command()
@click.argument("domain_file", type=click.Path(exists=True))
@click.option("--a", type=float, default=0.0, show_default=True,
              help="Sobolev weight index")
@_with_common
def analyze(domain_file, a, c, tol, xi_max, calibration, out, fmt, jobs):
    """Fredholm verdict for c*I + K on the weight-a scale."""
    try:
        d = parse_domain(domain_file)
        line = _load_line(calibration)
        v = layerpot.fredholm_verdict(d, c, a, line=line, tol=tol,
                                      xi_max=xi_max)
    except (DomainError, MellinError, ValueError, OSError) as exc:
        _fail(str(exc))
    report = {
        "config": _config_echo(domain=domain_file, c=c, a=a, tol=tol,
                               xi_max=xi_max, calibration=calibration),
        "verdict": v.overall,
        "elliptic": v.elliptic,
        "witnesses": list(v.witnesses),
        "reference_window": list(v.reference_window),
        "per_vertex": {
            vid: {"invertible": r.invertible, "margin": r.margin,
                  "witness_xi": (None if math.isinf(r.witness_xi)
                                 else r.witness_xi),
                  "xi_max_used": r.xi_max_used}
            for vid, r in v.per_vertex.items()},
        "line_offset": v.line.gamma,
        "tolerances": {"scan": tol,
                       "inconclusive_margin": layerpot.INCONCLUSIVE_MARGIN},
    }
    _emit(report, out, "json")
    sys.exit({"Fredholm": 0, "not Fredholm": 1, "inconclusive": 2}[v.overall])


@main.command()
@click.argument("domain_file", type=click.Path(exists=True))
@click.option("--a-min", type=float, default=-1.2, show_default=True)
@click.option("--a-max", type=float, default=1.2, show_default=True)
@_with_common
def window(domain_file, a_min, a_max, c, tol, xi_max, calibration, out, fmt,
           jobs):
    """Admissible weight window per vertex and globally, with margin curve."""
    try:
        d = parse_domain(domain_file)
        line = _load_line(calibration)
        rep = layerpot.domain_windows(d, c, line=line, search=(a_min, a_max),
                                      tol=tol)
    except (DomainError, MellinError, ValueError, OSError) as exc:
        _fail(str(exc))
    margin_rows = [("a", "margin", "witness_xi")]
    verdict_margins = []
    for a in np.linspace(max(a_min, rep.global_window[0] + 1e-3),
                         min(a_max, rep.global_window[1] - 1e-3), 21) \
            if rep.global_window else []:
        v = layerpot.fredholm_verdict(d, c, float(a), line=line, tol=tol)
        worst = min(v.per_vertex.values(), key=lambda r: r.margin)
        margin_rows.append((float(a), worst.margin, worst.witness_xi))
        verdict_margins.append((float(a), worst.margin))
    report = {
        "config": _config_echo(domain=domain_file, c=c, a_min=a_min,
                               a_max=a_max, tol=tol,
                               calibration=calibration),
        "per_vertex": {k: list(w) for k, w in rep.per_vertex.items()},
        "global_window": (list(rep.global_window)
                          if rep.global_window else None),
        "reference_window": (list(rep.reference_window)
                             if rep.reference_window else None),
        "margin_curve": margin_rows,
    }
    _emit(report, out, fmt, table_key="margin_curve")
    sys.exit(0)


@main.command()
@click.argument("domain_file", type=click.Path(exists=True))
@click.option("--g", "g_expr", required=True,
              help="boundary data, e.g. 'x^2-y^2' or 're(z^3)'")
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--mesh-n", type=int, default=32, show_default=True)
@click.option("--mesh-q", type=float, default=0.5, show_default=True)
@click.option("--mesh-nc", type=int, default=12, show_default=True)
@_with_common
def solve(domain_file, g_expr, a, mesh_n, mesh_q, mesh_nc, c, tol, xi_max,
          calibration, out, fmt, jobs):
    """Dirichlet solve (c*I + K) phi = 2 g with interior error report."""
    try:
        d = parse_domain(domain_file)
        g = parse_boundary_data(g_expr)
        line = _load_line(calibration)
        mesh = layerpot.graded_mesh(
            layerpot.desingularize_boundary(layerpot.unfold(d)),
            n=mesh_n, q=mesh_q, n_c=mesh_nc)
        sol = layerpot.solve_dirichlet(d, g, c=c, a=a, mesh=mesh, line=line)
    except (DomainError, MellinError, ExprError, ValueError, OSError) as exc:
        _fail(str(exc))
    pts, errs = _interior_probe(d, sol, g)
    report = {
        "config": _config_echo(domain=domain_file, g=g_expr, c=c, a=a,
                               mesh_n=mesh_n, mesh_q=mesh_q, mesh_nc=mesh_nc,
                               calibration=calibration),
        "rhs_factor": sol.rhs_factor,
        "solve_residual": sol.residual,
        "interior_points_tested": len(pts),
        "max_interior_relative_error": (max(errs) if errs else None),
    }
    if errs:
        click.echo(f"max interior relative error: {max(errs):.3e}", err=True)
    _emit(report, out, "json")
    sys.exit(0)


def _interior_probe(d, sol, g, margin=0.2):
    """Evaluate the solution on a grid of interior points at distance
    >= margin from the boundary and compare against the boundary data
    extended harmonically (valid when g is the trace of the expression)."""
    lo = sol.mesh.points.min(axis=0)
    hi = sol.mesh.points.max(axis=0)
    xs = np.linspace(lo[0], hi[0], 17)
    ys = np.linspace(lo[1], hi[1], 17)
    pts, errs = [], []
    scale = max(1.0, float(np.max(np.abs(
        [g(p[0], p[1]) for p in sol.mesh.points]))))
    for x in xs:
        for y in ys:
            p = np.array([x, y])
            dmin = float(np.min(np.linalg.norm(sol.mesh.points - p, axis=1)))
            if dmin < margin:
                continue
            if not _inside(d, p, sol.mesh):
                continue
            val = sol(p)
            ref = g(x, y)
            pts.append((x, y))
            errs.append(abs(val - ref) / scale)
    return pts, errs


def _inside(d, p, mesh) -> bool:
    # winding number: the double layer of the constant density is exactly
    # 2 inside the loop and 0 outside
    val = float(layerpot.panel_potentials(p, mesh).sum())
    return val > 1.0


@main.command()
@click.argument("domain_file", type=click.Path(exists=True))
@click.option("--a", type=float, default=0.0, show_default=True)
@click.option("--mesh-n", "mesh_ns", type=int, multiple=True,
              default=(8, 16, 32, 64), show_default=True,
              help="mesh sizes of the refinement sequence")
@click.option("--mesh-q", type=float, default=0.5, show_default=True)
@click.option("--deflate", type=int, default=None,
              help="skip this many smallest singular values "
                   "(default: 1 for c=-1, else 0)")
@_with_common
def study(domain_file, a, mesh_ns, mesh_q, deflate, c, tol, xi_max,
          calibration, out, fmt, jobs):
    """Smallest singular value of the weighted operator under refinement."""
    try:
        d = parse_domain(domain_file)
        if deflate is None:
            deflate = 1 if c == -1.0 else 0
        res = layerpot.min_singular_value_study(
            d, c, a, mesh_sizes=tuple(mesh_ns), q=mesh_q, deflate=deflate,
            jobs=jobs)
    except (DomainError, MellinError, ValueError, OSError) as exc:
        _fail(str(exc))
    table = [("n", "nodes", "sigma")] + [list(r) for r in res.rows]
    report = {
        "config": _config_echo(domain=domain_file, c=c, a=a,
                               mesh_n=list(mesh_ns), mesh_q=mesh_q,
                               deflate=deflate),
        "trend": res.trend,
        "slope": res.slope,
        "table": table,
    }
    _emit(report, out, fmt, table_key="table")
    sys.exit(0)


@main.command()
@click.option("--domain-file", type=click.Path(exists=True), default=None,
              help="model domain (default: built-in unit square)")
@click.option("--c", "c", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(), required=True,
              help="calibration file consumed by the other subcommands")
def calibrate(domain_file, c, out):
    """Fit and persist the weight-to-line map gamma(a)."""
    try:
        d = parse_domain(domain_file) if domain_file else None
        result = layerpot.calibrate_weight_line(d, c=c, out=out)
    except (DomainError, MellinError, ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(json.dumps(result, indent=2))
    if result["ambiguous"]:
        click.echo("note: candidate line conventions are indistinguishable "
                   "on this domain; defaulting to slope -1", err=True)
    sys.exit(0)


if __name__ == "__main__":
    main()
