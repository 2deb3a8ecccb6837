"""Nystrom assembly, graded meshes, Dirichlet harness, and sigma_min studies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import polyfred as pf
import polyfred.layerpot as lp
from polyfred.layerpot import (
    WeightedNormSpec,
    _graded_breaks,
    _mesh_for,
    assemble_np,
    double_layer_potential,
    fredholm_verdict,
    graded_mesh,
    min_singular_value_study,
    np_kernel,
    np_kernel_point,
    solve_dirichlet,
    weighted_discrete_operator,
    weighted_norm,
)
from polyfred.mellin import WeightLine

from conftest import domain_path

INV_2PI = 1.0 / (2.0 * math.pi)


# -- pointwise kernel ------------------------------------------------------

def test_kernel_point_value():
    # -(1/pi) ((x-y).nu)/|x-y|^2 at x=(1,0), y=(0,1), nu=(0,1)
    assert math.isclose(np_kernel_point([1.0, 0.0], [0.0, 1.0], [0.0, 1.0]),
                        INV_2PI, rel_tol=1e-15)
    assert np_kernel_point([1.0, 0.0], [0.0, 0.0], [1.0, 0.0]) == -1.0 / math.pi


def test_kernel_point_diagonal_raises():
    with pytest.raises(ValueError):
        np_kernel_point([1.0, 2.0], [1.0, 2.0], [0.0, 1.0])


def test_kernel_constant_on_circle(circle):
    # the circle kernel is identically 1/(2 pi)
    for ta, tb in ((0.0, 1.0), (2.0, 4.5), (0.3, 3.3)):
        x = np.array([math.cos(ta), math.sin(ta)])
        y = np.array([math.cos(tb), math.sin(tb)])
        assert math.isclose(np_kernel(circle, x, y), INV_2PI, rel_tol=1e-12)


def test_kernel_same_straight_edge_vanishes(square):
    assert np_kernel(square, [0.5, -1.0], [-0.3, -1.0]) == 0.0


def test_kernel_guards(square):
    with pytest.raises(ValueError):
        np_kernel(square, [0.0, 0.0], [0.5, 0.5])   # not a boundary point
    with pytest.raises(ValueError):
        np_kernel(square, [0.0, 0.0], [1.0, 1.0])   # vertex: no normal


def test_kernel_crack_faces_opposite(slit_square):
    x = np.array([0.9, 0.9])
    y = np.array([0.0, 0.0])
    k0 = np_kernel(slit_square, x, y, face=0)
    k1 = np_kernel(slit_square, x, y, face=1)
    assert math.isclose(k0, -k1, rel_tol=1e-14)


# -- graded meshes ---------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=4, max_value=40),
       st.floats(min_value=0.2, max_value=0.8),
       st.integers(min_value=2, max_value=20))
def test_graded_breaks_properties(n, q, n_c):
    b = _graded_breaks(n, q, n_c)
    w = np.diff(b)
    assert len(b) == n + 2 * n_c + 1
    assert b[0] == 0.0 and b[-1] == 1.0
    assert np.all(w > 0)
    # symmetric about 1/2
    assert np.allclose(b + b[::-1], 1.0, atol=1e-12)
    # geometric contraction toward both ends with ratio q
    ratios = w[1:n_c] / w[:n_c - 1]
    assert np.allclose(ratios, 1.0 / q, rtol=1e-9)


def test_graded_mesh_counts(square):
    mesh = _mesh_for(square, 16, 0.5, 8)
    assert mesh.size == 4 * (16 + 2 * 8)
    # quadrature weights reproduce the perimeter
    assert math.isclose(float(mesh.weights.sum()), 8.0, rel_tol=1e-12)
    assert np.all(mesh.r > 0)
    assert np.allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-12)


def test_graded_mesh_rejects_bad_params(square):
    M = pf.desingularize_boundary(pf.unfold(square))
    with pytest.raises(ValueError):
        graded_mesh(M, n=2)
    with pytest.raises(ValueError):
        graded_mesh(M, q=1.0)
    with pytest.raises(ValueError):
        graded_mesh(M, n_c=1)


def test_circle_mesh_is_uniform(circle):
    mesh = _mesh_for(circle, 64, 0.5, 8)
    assert mesh.size == 64
    assert np.allclose(mesh.weights, 2.0 * math.pi / 64, rtol=1e-12)
    assert np.allclose(mesh.curvatures, 1.0, rtol=1e-12)


def test_crack_mesh_twins(slit_square):
    mesh = _mesh_for(slit_square, 16, 0.5, 8)
    has = mesh.twin >= 0
    assert has.sum() == 2 * (16 + 2 * 8)
    i = np.where(has)[0]
    j = mesh.twin[i]
    # twin nodes coincide, carry equal weights and opposite normals
    assert np.allclose(mesh.points[i], mesh.points[j], atol=1e-14)
    assert np.allclose(mesh.weights[i], mesh.weights[j], rtol=1e-14)
    assert np.allclose(mesh.normals[i], -mesh.normals[j], atol=1e-14)
    assert np.array_equal(mesh.twin[j], i)


# -- assembly --------------------------------------------------------------

@pytest.mark.parametrize("n", (64, 128, 256))
def test_circle_row_identity(circle, n):
    mesh = _mesh_for(circle, n, 0.5, 8)
    A = assemble_np(circle, mesh)
    assert np.max(np.abs(A @ np.ones(mesh.size) - 1.0)) <= 1e-10
    assert np.allclose(A, INV_2PI * mesh.weights[None, :], atol=1e-12)


def test_square_row_identity_away_from_corners(square):
    mesh = _mesh_for(square, 32, 0.5, 16)
    A = assemble_np(square, mesh)
    err = np.abs(A @ np.ones(mesh.size) - 1.0)
    # midpoint quadrature: the identity holds well away from the corners
    assert err[mesh.r >= 0.4].max() <= 1e-3


def test_same_edge_blocks_vanish(square):
    mesh = _mesh_for(square, 8, 0.5, 4)
    A = assemble_np(square, mesh)
    same = mesh.base_index[:, None] == mesh.base_index[None, :]
    assert np.all(A[same & ~np.eye(mesh.size, dtype=bool)] == 0.0)


def test_crack_twin_jump(slit_square):
    mesh = _mesh_for(slit_square, 8, 0.5, 4)
    A = assemble_np(slit_square, mesh)
    i = np.where(mesh.twin >= 0)[0]
    # collinear faces: the cross-face kernel vanishes, so the whole coupling
    # is the unit jump
    assert np.allclose(A[i, mesh.twin[i]], -1.0, atol=1e-14)


def test_constant_density_potential_is_winding(circle, square):
    for d, pts in ((circle, [[0.0, 0.0], [0.3, -0.4]]),
                   (square, [[0.0, 0.0], [-0.5, 0.6]])):
        mesh = _mesh_for(d, 64, 0.5, 12)
        vals = double_layer_potential(np.array(pts), mesh,
                                      np.ones(mesh.size))
        assert np.allclose(vals, 2.0, atol=1e-3)


# -- weighted norms --------------------------------------------------------

def test_weighted_norm_order_zero(circle):
    mesh = _mesh_for(circle, 32, 0.5, 8)
    u = np.ones(mesh.size)
    spec = WeightedNormSpec(0, 0.0)
    want = math.sqrt(float(np.sum(mesh.weights)))
    assert math.isclose(weighted_norm(u, mesh, spec), want, rel_tol=1e-12)


def test_weighted_norm_monotone_in_order(square):
    mesh = _mesh_for(square, 16, 0.5, 8)
    rng = np.random.default_rng(7)
    u = rng.standard_normal(mesh.size)
    n0 = weighted_norm(u, mesh, WeightedNormSpec(0, 0.25))
    n1 = weighted_norm(u, mesh, WeightedNormSpec(1, 0.25))
    assert n1 >= n0


def test_weighted_norm_homogeneous(square):
    mesh = _mesh_for(square, 8, 0.5, 4)
    u = np.linspace(-1.0, 1.0, mesh.size)
    for spec in (WeightedNormSpec(0, -0.3), WeightedNormSpec(1, 0.4)):
        assert math.isclose(weighted_norm(3.0 * u, mesh, spec),
                            3.0 * weighted_norm(u, mesh, spec), rel_tol=1e-12)


def test_weighted_norm_order_guard(square):
    mesh = _mesh_for(square, 8, 0.5, 4)
    with pytest.raises(ValueError):
        weighted_norm(np.ones(mesh.size), mesh, WeightedNormSpec(2, 0.0))


def test_weighted_operator_is_similarity(circle):
    mesh = _mesh_for(circle, 32, 0.5, 8)
    A = assemble_np(circle, mesh)
    B = weighted_discrete_operator(circle, 1.0, 0.3, mesh)
    ev_a = np.sort(np.linalg.eigvals(np.eye(mesh.size) + A).real)
    ev_b = np.sort(np.linalg.eigvals(B).real)
    assert np.allclose(ev_a, ev_b, atol=1e-9)


# -- verdicts --------------------------------------------------------------

def test_verdict_square_inside_window(square):
    v = fredholm_verdict(square, 1.0, 0.0)
    assert v.is_fredholm and v.elliptic
    assert v.witnesses == ()
    assert set(v.per_vertex) == set(square.vertices)
    assert math.isclose(v.reference_window[0], -2.0 / 3.0, abs_tol=1e-12)
    assert v.reference_window[1] == 0.5


def test_verdict_square_at_endpoint(square):
    v = fredholm_verdict(square, 1.0, 2.0 / 3.0)
    assert v.overall == "not Fredholm"
    assert len(v.witnesses) == 4


def test_verdict_not_elliptic(square):
    v = fredholm_verdict(square, 0.0, 0.0)
    assert v.overall == "not Fredholm"
    assert not v.elliptic


def test_verdict_slit_square(slit_square):
    for c in (1.0, -1.0):
        v = fredholm_verdict(slit_square, c, 0.0)
        assert v.overall == "not Fredholm"
        assert set(v.witnesses) == {"p#c0", "t#c0"}


def test_verdict_corner_margins_coincide(square):
    # four congruent corners must give identical scan results
    v = fredholm_verdict(square, 1.0, 0.2)
    margins = {round(r.margin, 14) for r in v.per_vertex.values()}
    assert len(margins) == 1


def test_domain_windows_square(square):
    rep = lp.domain_windows(square, 1.0)
    lo, hi = rep.global_window
    assert abs(lo + 2.0 / 3.0) <= 1e-6
    assert abs(hi - 2.0 / 3.0) <= 1e-6
    assert rep.contains(rep.reference_window[0] + 1e-3,
                        rep.reference_window[1] - 1e-3)


# -- Dirichlet harness -----------------------------------------------------

def test_solve_circle_constant(circle):
    mesh = _mesh_for(circle, 64, 0.5, 8)
    sol = solve_dirichlet(circle, lambda x, y: 1.0, mesh=mesh,
                          check_verdict=False)
    for p in ([0.0, 0.0], [0.3, 0.2], [-0.5, 0.4]):
        assert abs(sol(np.array(p)) - 1.0) <= 1e-9


def test_solve_circle_harmonic(circle):
    mesh = _mesh_for(circle, 64, 0.5, 8)
    sol = solve_dirichlet(circle, lambda x, y: x, mesh=mesh,
                          check_verdict=False)
    assert sol.rhs_factor == 2.0
    assert sol.residual <= 1e-10
    for p in ([0.0, 0.0], [0.3, 0.2], [0.0, -0.7]):
        assert abs(sol(np.array(p)) - p[0]) <= 1e-10


def test_solve_square_harmonic(square):
    sol = solve_dirichlet(square, lambda x, y: x * x - y * y,
                          mesh=_mesh_for(square, 32, 0.5, 12))
    for p in ([0.0, 0.0], [0.5, 0.25], [-0.6, -0.3]):
        assert abs(sol(np.array(p)) - (p[0] ** 2 - p[1] ** 2)) <= 1e-3


def test_solve_guards(square, slit_square):
    with pytest.raises(ValueError):
        solve_dirichlet(square, lambda x, y: 1.0, c=-1.0)
    with pytest.raises(ValueError):
        solve_dirichlet(slit_square, lambda x, y: 1.0)
    with pytest.raises(ValueError):
        # at the window endpoint the operator is not Fredholm
        solve_dirichlet(square, lambda x, y: 1.0, a=2.0 / 3.0)


# -- sigma_min studies -----------------------------------------------------

def test_study_square_bounded(square):
    res = min_singular_value_study(square, 1.0, 0.0)
    assert res.trend == "bounded-below"
    assert len(res.rows) == 4
    assert res.table() == list(res.rows)


def test_study_square_decaying_outside_window(square):
    res = min_singular_value_study(square, 1.0, -0.8)
    assert res.trend == "decaying"
    assert res.slope < -0.4


def test_study_circle_constants_kernel(circle):
    # -I + K annihilates constants on any domain; on the circle the discrete
    # operator reproduces this to rounding
    res = min_singular_value_study(circle, -1.0, 0.0,
                                   mesh_sizes=(8, 16, 32))
    assert res.trend == "decaying"
    assert res.rows[-1][2] <= 1e-12
    deflated = min_singular_value_study(circle, -1.0, 0.0,
                                        mesh_sizes=(8, 16, 32), deflate=1)
    assert deflated.trend == "bounded-below"


def test_study_jobs_agree(square):
    serial = min_singular_value_study(square, 1.0, 0.0,
                                      mesh_sizes=(8, 16, 32))
    threaded = min_singular_value_study(square, 1.0, 0.0,
                                        mesh_sizes=(8, 16, 32), jobs=3)
    assert serial.rows == threaded.rows
