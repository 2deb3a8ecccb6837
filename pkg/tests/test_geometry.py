"""Domain parsing, vertex analysis, unfolding, and distance functions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import polyfred as pf
from polyfred.geometry import (
    DomainError,
    VertexKind,
    interior_angles,
    parse_domain,
    smoothed_distance,
    theta0,
    unfold,
)

from conftest import ALL_DOMAINS, domain_path

TWO_PI = 2.0 * math.pi


# -- parsing and validation ------------------------------------------------

@pytest.mark.parametrize("name", ALL_DOMAINS)
def test_fixtures_parse(name):
    d = parse_domain(domain_path(name))
    assert d.loop, "every domain has an outer boundary loop"


def test_parse_accepts_dict_and_json_text():
    doc = {"vertices": [{"id": "a", "x": 0, "y": 0},
                        {"id": "b", "x": 1, "y": 0},
                        {"id": "c", "x": 0, "y": 1}],
           "edges": [{"id": "e0", "from": "a", "to": "b"},
                     {"id": "e1", "from": "b", "to": "c"},
                     {"id": "e2", "from": "c", "to": "a"}]}
    d1 = parse_domain(doc)
    import json
    d2 = parse_domain(json.dumps(doc))
    assert set(d1.vertices) == set(d2.vertices) == {"a", "b", "c"}


def test_duplicate_ids_rejected():
    doc = {"vertices": [{"id": "a", "x": 0, "y": 0},
                        {"id": "a", "x": 1, "y": 0},
                        {"id": "c", "x": 0, "y": 1}],
           "edges": [{"id": "e0", "from": "a", "to": "c"}]}
    with pytest.raises(DomainError):
        parse_domain(doc)


def test_unknown_vertex_reference_rejected():
    doc = {"vertices": [{"id": "a", "x": 0, "y": 0}],
           "edges": [{"id": "e0", "from": "a", "to": "zz"}]}
    with pytest.raises(DomainError):
        parse_domain(doc)


def test_open_boundary_rejected():
    doc = {"vertices": [{"id": "a", "x": 0, "y": 0},
                        {"id": "b", "x": 1, "y": 0},
                        {"id": "c", "x": 0, "y": 1}],
           "edges": [{"id": "e0", "from": "a", "to": "b"},
                     {"id": "e1", "from": "b", "to": "c"}]}
    with pytest.raises(DomainError):
        parse_domain(doc)


def test_flat_vertex_rejected():
    doc = {"vertices": [{"id": "a", "x": 0, "y": 0},
                        {"id": "m", "x": 1, "y": 0},
                        {"id": "b", "x": 2, "y": 0},
                        {"id": "c", "x": 1, "y": 1}],
           "edges": [{"id": "e0", "from": "a", "to": "m"},
                     {"id": "e1", "from": "m", "to": "b"},
                     {"id": "e2", "from": "b", "to": "c"},
                     {"id": "e3", "from": "c", "to": "a"}]}
    with pytest.raises(DomainError):
        parse_domain(doc)


def test_crack_arc_rejected():
    doc = {"vertices": [{"id": "a", "x": 2, "y": 0},
                        {"id": "b", "x": 2.5, "y": 0}],
           "edges": [{"id": "rim", "kind": "arc",
                      "params": {"center": [0, 0], "radius": 3.0,
                                 "theta_start": 0.0, "theta_end": TWO_PI}},
                     {"id": "k", "kind": "arc", "from": "a", "to": "b",
                      "crack": True,
                      "params": {"center": [0, 0], "radius": 2.0,
                                 "theta_start": 0.0, "theta_end": 0.3}}]}
    with pytest.raises(DomainError):
        parse_domain(doc)


def test_intersecting_edges_rejected():
    doc = {"vertices": [{"id": "a", "x": -1, "y": -1},
                        {"id": "b", "x": 1, "y": -1},
                        {"id": "c", "x": 1, "y": 1},
                        {"id": "d", "x": -1, "y": 1},
                        {"id": "p", "x": -0.5, "y": 0.0},
                        {"id": "q", "x": 0.5, "y": 0.0},
                        {"id": "r", "x": 0.0, "y": -0.5},
                        {"id": "s", "x": 0.0, "y": 0.5}],
           "edges": [{"id": "e0", "from": "a", "to": "b"},
                     {"id": "e1", "from": "b", "to": "c"},
                     {"id": "e2", "from": "c", "to": "d"},
                     {"id": "e3", "from": "d", "to": "a"},
                     {"id": "k0", "from": "p", "to": "q", "crack": True},
                     {"id": "k1", "from": "r", "to": "s", "crack": True}]}
    with pytest.raises(DomainError):
        parse_domain(doc)


# -- loop orientation and angles -------------------------------------------

@pytest.mark.parametrize("name", ALL_DOMAINS)
def test_loop_is_counterclockwise(name):
    d = parse_domain(domain_path(name))
    assert d._signed_area(d.loop) > 0


def test_interior_angles_square(square):
    angs = sorted(th for _, th in interior_angles(square))
    assert np.allclose(angs, [math.pi / 2] * 4, atol=1e-12)


def test_interior_angles_lshape(lshape):
    angs = sorted(th for _, th in interior_angles(lshape))
    assert np.allclose(angs[:5], [math.pi / 2] * 5, atol=1e-12)
    assert math.isclose(angs[5], 1.5 * math.pi, abs_tol=1e-12)


def test_interior_angles_hexagon(hexagon):
    angs = [th for _, th in interior_angles(hexagon)]
    assert np.allclose(angs, [2.0 * math.pi / 3] * 6, atol=1e-12)


def test_theta0_values():
    # min over angles of pi/theta and pi/(2*pi - theta)
    assert theta0([math.pi / 2] * 4) == 2.0 / 3.0
    assert theta0([math.pi / 2] * 5 + [1.5 * math.pi]) == 2.0 / 3.0
    assert math.isclose(theta0([2.0 * math.pi / 3] * 6), 0.75, abs_tol=1e-15)


def test_theta0_rejects_out_of_range():
    with pytest.raises(ValueError):
        theta0([0.0])
    with pytest.raises(ValueError):
        theta0([TWO_PI])
    with pytest.raises(ValueError):
        theta0([])


@given(st.floats(min_value=0.05, max_value=TWO_PI - 0.05))
def test_theta0_reflection_symmetry(th):
    assert theta0([th]) == theta0([TWO_PI - th])


# -- crack vertex classification -------------------------------------------

def test_slit_square_vertex_kinds(slit_square):
    info = slit_square.vertex_info
    for vid in ("a", "b", "c", "d"):
        assert info[vid].kind == VertexKind.CONICAL
        assert info[vid].ramification == 1
    for vid in ("p", "t"):
        # interior crack tips see the full plane around them
        assert info[vid].kind == VertexKind.INNER_CRACK
        assert info[vid].ramification == 1
        assert math.isclose(sum(s.measure for s in info[vid].sectors),
                            TWO_PI, abs_tol=1e-9)


def test_slit_disk_vertex_kinds(slit_disk):
    info = slit_disk.vertex_info
    assert info["j"].kind == VertexKind.OUTER_CRACK
    assert info["j"].ramification == 2
    assert info["t"].kind == VertexKind.INNER_CRACK
    assert info["t"].ramification == 1


def test_tcrack_junction(tcrack_square):
    info = tcrack_square.vertex_info
    assert info["j"].kind == VertexKind.INNER_CRACK
    assert info["j"].ramification == 3
    assert len(info["j"].sectors) == 3
    for vid in ("t1", "t2", "t3"):
        assert info[vid].ramification == 1


# -- unfolding -------------------------------------------------------------

def test_unfold_is_identity_without_cracks(square):
    u = unfold(square)
    assert set(u.uvertices) == set(square.vertices)
    assert u.alpha == 0 and u.m_prime == 0
    assert all(ue.twin_uid is None for ue in u.uedges.values())


def test_unfold_slit_square(slit_square):
    u = unfold(slit_square)
    assert u.alpha == 2 and u.m_prime == 0
    assert {"p#c0", "t#c0"} <= set(u.uvertices)
    plus, minus = u.uedges["slit+"], u.uedges["slit-"]
    assert plus.twin_uid == "slit-" and minus.twin_uid == "slit+"
    assert plus.forward and not minus.forward


@pytest.mark.parametrize("name,alpha,m_prime", [
    ("slit_square", 2, 0),
    ("slit_disk", 3, 0),
    ("tcrack_square", 6, 0),
])
def test_ramification_totals(name, alpha, m_prime):
    u = unfold(parse_domain(domain_path(name)))
    assert u.alpha == alpha
    assert u.m_prime == m_prime


def test_cover_map_projects_to_base(slit_square):
    u = unfold(slit_square)
    for uid, uv in u.uvertices.items():
        assert u.cover_map[uid] == uv.base_vertex_id


# -- smoothed distance -----------------------------------------------------

def test_smoothed_distance_profile(square):
    v = square.vertex("a").pos
    eps = square.epsilon["a"]
    # equals the plain distance deep inside the collar
    for frac in (0.1, 0.3, 0.5):
        p = v + np.array([frac * eps, 0.0])
        assert math.isclose(smoothed_distance(square, p), frac * eps,
                            rel_tol=1e-12)
    # plateaus at eps outside the collar
    assert smoothed_distance(square, np.array([0.0, 0.0])) == eps
    assert smoothed_distance(square, v) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-1.5, max_value=1.5),
       st.floats(min_value=-1.5, max_value=1.5))
def test_smoothed_distance_bounds(x, y):
    d = parse_domain(domain_path("square"))
    p = np.array([x, y])
    r = smoothed_distance(d, p)
    dist = min(float(np.linalg.norm(p - d.vertex(v).pos)) for v in d.vertices)
    eps = max(d.epsilon.values())
    assert 0.0 <= r <= eps + 1e-15
    # below half the collar radius the smoothing is the identity
    if dist <= min(d.epsilon.values()) / 2:
        assert math.isclose(r, dist, rel_tol=1e-12, abs_tol=1e-15)
    else:
        assert r >= min(dist, min(d.epsilon.values())) - 1e-12


def test_smoothed_distance_monotone_along_ray(square):
    v = square.vertex("a").pos
    ts = np.linspace(0.0, 1.0, 200)
    vals = [smoothed_distance(square, v + t * np.array([1.0, 1.0])) for t in ts]
    assert all(b - a >= -1e-13 for a, b in zip(vals, vals[1:]))


# -- edge geometry ---------------------------------------------------------

def test_arc_edge_geometry(circle):
    e = circle.edges["rim"]
    assert e.is_closed()
    assert math.isclose(e.length(circle), TWO_PI, rel_tol=1e-12)
    assert math.isclose(e.curvature(circle), 1.0, rel_tol=1e-12)
    p = e.point(0.25, circle)
    assert np.allclose(p, [0.0, 1.0], atol=1e-12)
    t = e.tangent(0.0, circle)
    assert np.allclose(t, [0.0, 1.0], atol=1e-12)


def test_line_edge_geometry(square):
    e = square.edges["south"]
    assert math.isclose(e.length(square), 2.0, rel_tol=1e-15)
    assert e.curvature(square) == 0.0
    assert np.allclose(e.point(0.5, square), [0.0, -1.0])
