"""Matrix Mellin symbols of limit operators and weight-line invertibility.

The transform convention is K(lam) = int_0^inf kappa(t) t^(-i*lam) dt/t,
holomorphic on a horizontal strip of Im(lam) determined by the kernel decay.
A Sobolev weight a selects the line Im(lam) = gamma(a) with gamma affine in
a; the affine map is fixed by a numerical calibration (see the companion
assembly module) and defaults to gamma(a) = -a.  Fredholmness of c*I + K at
a vertex reduces to invertibility of c*I + delta + K(xi + i*gamma) for all
real xi, which is decided by a scan with an explicit tail majorant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .groupoid import MellinOperator, zero_mellin_operator

QUAD_ABS_TOL = 1e-10
SCAN_TOL = 1e-8
XI_MAX_DEFAULT = 50.0
XI_MAX_CAP = 800.0
ENDPOINT_TOL = 1e-6
STRIP_UNBOUNDED = 50.0
_LOG_TAIL = 35.0       # e^(-35) ~ 6e-16: truncation level for log-scale tails


class MellinError(ValueError):
    """Transform or scan outside its domain of validity."""


# -- wedge kernels ---------------------------------------------------------

def ray_pair_kernel(phi_target: float, phi_source: float, side_source: int):
    """Frozen double layer kernel between two rays from a common vertex.

    Target x = r*e(phi_target), source y = s*e(phi_source); the source ray
    carries the outer normal e(phi_source - side*pi/2) where side is +1 when
    the domain lies counterclockwise of the source ray and -1 otherwise.
    Returns a two-variable kernel k(r, s), homogeneous of degree -1:

        k(r, s) = side * (sin d / pi) * r / (r^2 + s^2 - 2 r s cos d),

    d = phi_target - phi_source.  Identically zero for collinear rays.
    """
    d = phi_target - phi_source
    sd, cd = math.sin(d), math.cos(d)
    amp = side_source * sd / math.pi

    def kernel(r, s):
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = amp * r / (r * r + s * s - 2.0 * r * s * cd)
        return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)

    def log_eval(u):
        # kernel(e^u, 1) evaluated stably for large |u|
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            den = 2.0 * np.cosh(u) - 2.0 * cd
            out = np.where(np.isfinite(den), amp / den, 0.0)
        return out

    kernel.log_eval = log_eval
    kernel.decay_exponents = (1.0, 1.0) if sd != 0.0 else None
    return kernel


def _one_variable_wedge(theta: float):
    two = ray_pair_kernel(0.0, theta, -1)

    def kappa(t):
        t = np.asarray(t, dtype=float)
        return two(t, np.ones_like(t))

    kappa.log_eval = two.log_eval
    kappa.decay_exponents = two.decay_exponents
    return kappa


def wedge_np_kernel(theta: float) -> MellinOperator:
    """Limit double layer operator at an infinite wedge of opening theta.

    2x2 with zero diagonal (straight edges) and equal off-diagonal kernels
    kappa(t) = (sin theta / pi) t / (t^2 - 2 t cos theta + 1).  theta = pi
    gives the zero operator (removable flat vertex, flagged).
    """
    if not 0.0 < theta < 2.0 * math.pi:
        raise MellinError(f"wedge opening {theta} outside (0, 2*pi)")
    if abs(theta - math.pi) < 1e-14:
        op = zero_mellin_operator("wedge", 2)
        return MellinOperator(op.vertex_id, 2, op.entries, op.delta,
                              removable_flat=True)
    kappa = _one_variable_wedge(theta)
    entries = ((None, kappa), (kappa, None))
    return MellinOperator("wedge", 2, entries, np.zeros((2, 2)))


# -- decay / validity strip ------------------------------------------------

def _decay_exponents(kappa) -> tuple[float, float]:
    """(p0, pinf) with kappa(t) ~ t^p0 at 0 and t^(-pinf) at infinity."""
    hint = getattr(kappa, "decay_exponents", None)
    if hint is not None:
        return hint
    t_small = np.array([1e-7, 1e-5])
    t_large = np.array([1e5, 1e7])
    v_small = np.abs(np.asarray(kappa(t_small), dtype=float))
    v_large = np.abs(np.asarray(kappa(t_large), dtype=float))
    if np.all(v_small > 0):
        p0 = float(np.log(v_small[1] / v_small[0]) / np.log(t_small[1] / t_small[0]))
    else:
        p0 = STRIP_UNBOUNDED
    if np.all(v_large > 0):
        pinf = float(-np.log(v_large[1] / v_large[0])
                     / np.log(t_large[1] / t_large[0]))
    else:
        pinf = STRIP_UNBOUNDED
    return p0, pinf


def validity_strip(op: MellinOperator) -> tuple[float, float]:
    """Open interval of Im(lam) where every entry transform converges."""
    lo, hi = -STRIP_UNBOUNDED, STRIP_UNBOUNDED
    for row in op.entries:
        for ker in row:
            if ker is None:
                continue
            p0, pinf = _decay_exponents(ker)
            lo = max(lo, -p0)
            hi = min(hi, pinf)
    if lo >= hi:
        raise MellinError("kernel decay leaves no common validity strip")
    return lo, hi


def _log_eval(kappa):
    f = getattr(kappa, "log_eval", None)
    if f is not None:
        return f

    def g(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.asarray(kappa(np.exp(np.clip(u, -700.0, 700.0))),
                              dtype=float)
        return np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    return g


def _truncation(kappa, gamma: float) -> tuple[float, float]:
    p0, pinf = _decay_exponents(kappa)
    d0 = p0 + gamma
    d1 = pinf - gamma
    if d0 <= 0 or d1 <= 0:
        raise MellinError(
            f"line Im(lam) = {gamma} outside validity strip ({-p0}, {pinf})")
    cap = 5000.0
    return min(cap, max(30.0, _LOG_TAIL / d0)), min(cap, max(30.0, _LOG_TAIL / d1))


# -- transform -------------------------------------------------------------

_transform_cache: dict = {}


def mellin_transform(op: MellinOperator, lam: complex) -> np.ndarray:
    """Matrix symbol at lam, entrywise adaptive quadrature on log scale.

    The constant jump part is lam-independent and added as-is.  Results are
    cached per (operator, lam).  Entries with identical kernel objects are
    integrated once.
    """
    lam = complex(lam)
    key = (op, lam)
    hit = _transform_cache.get(key)
    if hit is not None:
        return hit.copy()
    gamma = lam.imag
    out = np.array(op.delta, dtype=complex)
    done: dict[int, complex] = {}
    for i in range(op.size):
        for j in range(op.size):
            ker = op.entries[i][j]
            if ker is None:
                continue
            if id(ker) in done:
                out[i, j] += done[id(ker)]
                continue
            val = _entry_transform(ker, lam)
            done[id(ker)] = val
            out[i, j] += val
    if len(_transform_cache) > 65536:
        _transform_cache.clear()
    _transform_cache[key] = out.copy()
    return out


def _entry_transform(kappa, lam: complex) -> complex:
    # substitute t = e^u: int g(u) e^(gamma*u) e^(-i*xi*u) du, split at u = 0
    gamma, xi = lam.imag, lam.real
    u0, u1 = _truncation(kappa, gamma)
    g = _log_eval(kappa)

    def f(u):
        return _damped(g(u), gamma, u) * np.exp(-1j * xi * u)

    val = 0.0 + 0.0j
    for a, b in ((-u0, 0.0), (0.0, u1)):
        part, err = integrate.quad(f, a, b, complex_func=True,
                                   epsabs=QUAD_ABS_TOL * 0.5, epsrel=1e-11,
                                   limit=400)
        if abs(err) > 10 * QUAD_ABS_TOL:
            raise MellinError(
                f"quadrature error estimate {abs(err):.2e} above tolerance")
        val += part
    return val


def _damped(g, gamma: float, u):
    """g * e^(gamma*u) evaluated in log magnitude: the two factors can
    individually overflow where the product is tiny."""
    g = np.asarray(g, dtype=float)
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        mag = np.exp(np.log(np.abs(g)) + gamma * u)
    return np.sign(g) * mag


class MellinSymbol:
    """Cached matrix symbol evaluator with its validity strip."""

    def __init__(self, op: MellinOperator):
        self.op = op
        self.size = op.size
        self.strip = validity_strip(op)

    def __call__(self, lam: complex) -> np.ndarray:
        lam = complex(lam)
        lo, hi = self.strip
        if not lo < lam.imag < hi:
            raise MellinError(
                f"Im(lam) = {lam.imag} outside validity strip ({lo}, {hi})")
        return mellin_transform(self.op, lam)


# -- weight lines ----------------------------------------------------------

@dataclass(frozen=True)
class WeightLine:
    """Mellin line Im(lam) = gamma(a) attached to the Sobolev weight a.

    gamma(a) = slope * a + intercept.  The affine coefficients are fixed by
    calibration against the weighted discrete operator and are immutable
    afterwards; the default is the analytically derived slope -1, offset 0.
    """
    a: float
    slope: float = -1.0
    intercept: float = 0.0

    @property
    def gamma(self) -> float:
        return self.slope * self.a + self.intercept

    def with_weight(self, a: float) -> "WeightLine":
        return WeightLine(a, self.slope, self.intercept)


def load_line_calibration(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    return {"slope": float(doc["slope"]), "intercept": float(doc["intercept"])}


def save_line_calibration(path, slope: float, intercept: float,
                          extra: dict | None = None) -> None:
    doc = {"slope": slope, "intercept": intercept}
    doc.update(extra or {})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# -- fast vectorized line sampling ----------------------------------------

_DU = 0.01


def _line_samples(op: MellinOperator, gamma: float, xi: np.ndarray
                  ) -> np.ndarray:
    """Symbol matrices K(xi + i*gamma) for an array of xi, trapezoid on a
    uniform log grid.  Spectrally accurate for the analytic kernels here;
    cross-checked against the adaptive quadrature in the test suite."""
    xi = np.asarray(xi, dtype=float)
    k = op.size
    out = np.broadcast_to(op.delta.astype(complex), (len(xi), k, k)).copy()
    done: dict[int, np.ndarray] = {}
    for i in range(k):
        for j in range(k):
            ker = op.entries[i][j]
            if ker is None:
                continue
            if id(ker) not in done:
                done[id(ker)] = _entry_line(ker, gamma, xi)
            out[:, i, j] += done[id(ker)]
    return out


def _entry_line(kappa, gamma: float, xi: np.ndarray) -> np.ndarray:
    u0, u1 = _truncation(kappa, gamma)
    n = int(math.ceil((u0 + u1) / _DU)) + 1
    u = np.linspace(-u0, u1, n)
    du = u[1] - u[0]
    w = _damped(_log_eval(kappa)(u), gamma, u) * du
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.exp(-1j * np.outer(xi, u)) @ w


def _entry_tail_constant(kappa, gamma: float) -> float:
    # total variation of u -> kappa(e^u) e^(gamma u) bounds |entry(xi)| by TV/|xi|
    u0, u1 = _truncation(kappa, gamma)
    u = np.arange(-u0, u1 + _DU, _DU)
    g = _damped(_log_eval(kappa)(u), gamma, u)
    return float(np.sum(np.abs(np.diff(g))))


def tail_majorant(op: MellinOperator, gamma: float):
    """C such that the Frobenius norm of the kernel part of the symbol is
    bounded by 2*C/(1 + |xi|) for large |xi| (conservative factor 2)."""
    total = 0.0
    for row in op.entries:
        for ker in row:
            if ker is None:
                continue
            total += _entry_tail_constant(ker, gamma) ** 2
    return math.sqrt(total)


# -- scans -----------------------------------------------------------------

@dataclass(frozen=True)
class LineSamples:
    xi: np.ndarray
    matrices: np.ndarray             # (len(xi), k, k)
    sigma_min: np.ndarray


def _base_grid(xi_max: float) -> np.ndarray:
    lo = np.linspace(0.0, min(2.0, xi_max), 81)
    if xi_max <= 2.0:
        return lo
    hi = np.geomspace(2.0, xi_max, 80)
    return np.unique(np.concatenate([lo, hi]))


def _sigma_min(mats: np.ndarray) -> np.ndarray:
    return np.linalg.svd(mats, compute_uv=False)[..., -1]


def symbol_on_line(op: MellinOperator, c: float, line: WeightLine,
                   xi_grid=None) -> LineSamples:
    """Sampled matrices c*I + K(xi + i*gamma(a)) with refinement near the
    minima of the smallest singular value.

    Kernels here are real, so the symbol at -xi is the conjugate of the
    symbol at +xi and the scan covers xi >= 0 without loss.
    """
    gamma = line.gamma
    lo, hi = validity_strip(op)
    if not lo < gamma < hi:
        raise MellinError(f"gamma = {gamma} outside validity strip ({lo}, {hi})")
    xi = np.asarray(xi_grid, dtype=float) if xi_grid is not None \
        else _base_grid(XI_MAX_DEFAULT)
    mats = c * np.eye(op.size)[None] + _line_samples(op, gamma, xi)
    sig = _sigma_min(mats)
    # three rounds of local refinement around the current minimum
    for _ in range(3):
        i = int(np.argmin(sig))
        a = xi[max(0, i - 1)]
        b = xi[min(len(xi) - 1, i + 1)]
        if b - a < 1e-12:
            break
        fine = np.linspace(a, b, 21)
        fmats = c * np.eye(op.size)[None] + _line_samples(op, gamma, fine)
        fsig = _sigma_min(fmats)
        xi = np.concatenate([xi, fine])
        mats = np.concatenate([mats, fmats])
        sig = np.concatenate([sig, fsig])
        order = np.argsort(xi)
        xi, mats, sig = xi[order], mats[order], sig[order]
    return LineSamples(xi, mats, sig)


@dataclass(frozen=True)
class ScanResult:
    invertible: bool
    margin: float
    witness_xi: float                # math.inf when the tail degenerates
    xi_max_used: float


def invertibility_scan(op: MellinOperator, c: float, line: WeightLine,
                       xi_max: float = XI_MAX_DEFAULT,
                       tol: float = SCAN_TOL) -> ScanResult:
    """Decide invertibility of c*I + symbol along the weight line.

    The verdict combines the sampled minimum over [-xi_max, xi_max] with an
    explicit tail bound: beyond xi_max the kernel part is majorized by
    2*C/(1+|xi|), so invertibility there follows from the constant part
    alone.  A failing tail bound doubles xi_max up to a cap.
    """
    gamma = line.gamma
    samples = symbol_on_line(op, c, line, _base_grid(xi_max))
    i = int(np.argmin(samples.sigma_min))
    margin = float(samples.sigma_min[i])
    witness = float(samples.xi[i])
    if margin <= tol:
        return ScanResult(False, margin, witness, xi_max)

    # asymptotic matrix: the kernel part vanishes, the jump part does not
    asym = c * np.eye(op.size) + op.delta
    sig_inf = float(np.linalg.svd(asym, compute_uv=False)[-1])
    if sig_inf <= tol:
        return ScanResult(False, min(margin, sig_inf), math.inf, xi_max)

    C = tail_majorant(op, gamma)
    cur = xi_max
    while 2.0 * C / (1.0 + cur) >= sig_inf - tol:
        if cur >= XI_MAX_CAP:
            raise MellinError(
                f"tail bound fails at xi_max = {cur} (cap {XI_MAX_CAP})")
        nxt = min(2.0 * cur, XI_MAX_CAP)
        extra = symbol_on_line(op, c, line, np.linspace(cur, nxt, 160))
        j = int(np.argmin(extra.sigma_min))
        if extra.sigma_min[j] < margin:
            margin = float(extra.sigma_min[j])
            witness = float(extra.xi[j])
            if margin <= tol:
                return ScanResult(False, margin, witness, nxt)
        cur = nxt
    tail_floor = sig_inf - 2.0 * C / (1.0 + cur)
    return ScanResult(True, min(margin, max(tail_floor, margin)), witness, cur)


# -- admissible weight windows --------------------------------------------

@dataclass(frozen=True)
class WindowReport:
    c: float
    per_vertex: dict
    global_window: tuple[float, float] | None
    margins: tuple = ()              # (a values, margin values)
    reference_window: tuple[float, float] | None = None

    def contains(self, lo: float, hi: float) -> bool:
        if self.global_window is None:
            return False
        return self.global_window[0] <= lo and hi <= self.global_window[1]


def line_determinant(op: MellinOperator, c: float, gamma: float) -> float:
    """det(c*I + symbol) on the imaginary axis lam = i*gamma.

    Real kernels give a real matrix there, so the determinant is real and
    changes sign at the isolated symbol zeros that bound weight windows.
    """
    mat = c * np.eye(op.size) + _line_samples(op, gamma, np.zeros(1))[0]
    return float(np.linalg.det(mat).real)


def _dense_line_determinants(op: MellinOperator, c: float,
                             gammas: np.ndarray) -> np.ndarray:
    """line_determinant over a gamma grid with one shared log grid."""
    g_lo, g_hi = float(gammas[0]), float(gammas[-1])
    u0 = u1 = 30.0
    sgn = {}
    lg = {}
    u = None
    for row in op.entries:
        for ker in row:
            if ker is None or id(ker) in lg:
                continue
            a0, _ = _truncation(ker, g_lo)
            _, a1 = _truncation(ker, g_hi)
            u0, u1 = max(u0, a0), max(u1, a1)
    u = np.arange(-u0, u1 + _DU, _DU)
    for row in op.entries:
        for ker in row:
            if ker is None or id(ker) in lg:
                continue
            g = _log_eval(ker)(u)
            sgn[id(ker)] = np.sign(g)
            with np.errstate(divide="ignore"):
                lg[id(ker)] = np.log(np.abs(g))
    out = np.empty(len(gammas))
    eye = np.eye(op.size)
    for m, gam in enumerate(gammas):
        mat = c * eye + op.delta
        vals = {k: float(np.sum(sgn[k] * np.exp(lg[k] + gam * u)) * _DU)
                for k in lg}
        for i, row in enumerate(op.entries):
            for j, ker in enumerate(row):
                if ker is not None:
                    mat[i, j] += vals[id(ker)]
        out[m] = np.linalg.det(mat)
    return out


def admissible_weight_window(op: MellinOperator, c: float,
                             search: tuple[float, float] = (-1.5, 1.5),
                             line: WeightLine = WeightLine(0.0),
                             tol: float = SCAN_TOL,
                             vertex_id: str | None = None) -> WindowReport:
    """Maximal interval of weights a around the reference on which the line
    symbol is invertible.

    The symbol degenerates only where the line crosses a symbol zero; for
    the real kernels here those zeros sit on the imaginary axis, where the
    determinant of c*I + symbol is real and changes sign.  Endpoints are the
    nearest determinant roots around gamma(0), refined to 1e-6, and the
    interior is cross-checked by invertibility scans (which also catch any
    degeneracy away from the imaginary axis).
    """
    lo_s, hi_s = validity_strip(op)
    pad = max(2e-2, 0.0 if hi_s - lo_s > 1.0 else 0.1 * (hi_s - lo_s))
    gs = sorted(min(max(line.with_weight(a).gamma, lo_s + pad), hi_s - pad)
                for a in search)
    g_lo, g_hi = gs
    if g_hi - g_lo <= 0:
        raise MellinError("empty weight search interval after strip clipping")

    grid = np.linspace(g_lo, g_hi, 241)
    dets = _dense_line_determinants(op, c, grid)
    if np.max(np.abs(dets)) <= tol:
        raise MellinError("no invertible weight found in the search interval")

    roots = []
    for i in range(len(grid) - 1):
        if dets[i] == 0.0:
            roots.append(float(grid[i]))
        elif dets[i] * dets[i + 1] < 0:
            roots.append(float(optimize.brentq(
                lambda g: line_determinant(op, c, g), grid[i], grid[i + 1],
                xtol=ENDPOINT_TOL * abs(line.slope))))

    g_ref = line.intercept
    if not g_lo <= g_ref <= g_hi:
        g_ref = 0.5 * (g_lo + g_hi)
    below = [r for r in roots if r < g_ref]
    above = [r for r in roots if r > g_ref]
    w_lo = max(below) if below else g_lo
    w_hi = min(above) if above else g_hi

    # scan verification on interior samples; shrink if a zero off the
    # imaginary axis shows up (not observed for the kernels here)
    margins_a, margins = [], []
    interior = np.linspace(w_lo, w_hi, 9)[1:-1]
    for gam in interior:
        a = (gam - line.intercept) / line.slope
        res = invertibility_scan(op, c, line.with_weight(a), tol=tol)
        margins_a.append(a)
        margins.append(res.margin)
        if not res.invertible:
            if gam < g_ref:
                w_lo = max(w_lo, gam)
            else:
                w_hi = min(w_hi, gam)

    a_ends = sorted(((w_lo - line.intercept) / line.slope,
                     (w_hi - line.intercept) / line.slope))
    window = (float(a_ends[0]), float(a_ends[1]))
    vid = vertex_id or op.vertex_id
    order = np.argsort(margins_a)
    return WindowReport(c, {vid: window}, window,
                        (np.array(margins_a)[order], np.array(margins)[order]))


def merge_windows(reports) -> WindowReport:
    """Intersect per-vertex windows into a global admissible window."""
    reports = list(reports)
    if not reports:
        raise ValueError("no window reports to merge")
    c = reports[0].c
    per_vertex = {}
    lo, hi = -math.inf, math.inf
    for r in reports:
        per_vertex.update(r.per_vertex)
        for w in r.per_vertex.values():
            lo = max(lo, w[0])
            hi = min(hi, w[1])
    window = (lo, hi) if lo < hi else None
    return WindowReport(c, per_vertex, window)
