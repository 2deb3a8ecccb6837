"""Planar domains with corners and cracks.

A domain is described by vertices and edges (straight segments or circular
arcs).  Edges marked ``crack`` are slits traversed on both sides.  From this
raw description we derive, per vertex, the cone base (the angular sectors the
domain occupies around the vertex), the crack classification, and the
ramification number.  Cracked domains can be unfolded into a crack-free
generalized domain whose boundary covers each crack twice, and every domain
can be desingularized into a collection of vertex collars glued to the smooth
boundary part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi

# angles closer to pi than this make a declared vertex removable
FLAT_TOL = 1e-12
ANGLE_TOL = 1e-9


class DomainError(ValueError):
    """Invalid domain description."""


class VertexKind(Enum):
    CONICAL = "conical"              # non-crack conical point
    INNER_CRACK = "inner_crack"
    OUTER_CRACK = "outer_crack"
    CONICAL_CRACK = "conical_crack"


@dataclass(frozen=True)
class Vertex:
    id: str
    x: float
    y: float

    @property
    def pos(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Edge:
    id: str
    v_from: str | None
    v_to: str | None
    kind: str = "line"               # "line" | "arc"
    crack: bool = False
    params: dict = field(default_factory=dict)

    # -- geometry along the normalized parameter s in [0, 1] ---------------

    def point(self, s, domain: "ConicalDomain"):
        s = np.asarray(s, dtype=float)
        if self.kind == "line":
            a = domain.vertex(self.v_from).pos
            b = domain.vertex(self.v_to).pos
            return a[None, :] + np.outer(s, b - a) if s.ndim else a + s * (b - a)
        c = np.asarray(self.params["center"], dtype=float)
        r = float(self.params["radius"])
        th = self._theta(s)
        out = np.stack([c[0] + r * np.cos(th), c[1] + r * np.sin(th)], axis=-1)
        return out

    def tangent(self, s, domain: "ConicalDomain"):
        """Unit tangent in the direction of increasing s."""
        s = np.asarray(s, dtype=float)
        if self.kind == "line":
            a = domain.vertex(self.v_from).pos
            b = domain.vertex(self.v_to).pos
            t = (b - a) / np.linalg.norm(b - a)
            return np.broadcast_to(t, s.shape + (2,)).copy() if s.ndim else t
        th = self._theta(s)
        sgn = 1.0 if self._dtheta() >= 0 else -1.0
        return np.stack([-sgn * np.sin(th), sgn * np.cos(th)], axis=-1)

    def length(self, domain: "ConicalDomain") -> float:
        if self.kind == "line":
            a = domain.vertex(self.v_from).pos
            b = domain.vertex(self.v_to).pos
            return float(np.linalg.norm(b - a))
        return float(self.params["radius"]) * abs(self._dtheta())

    def curvature(self, domain: "ConicalDomain") -> float:
        """Signed curvature (positive when turning left along increasing s)."""
        if self.kind == "line":
            return 0.0
        sgn = 1.0 if self._dtheta() >= 0 else -1.0
        return sgn / float(self.params["radius"])

    def is_closed(self) -> bool:
        return self.kind == "arc" and abs(abs(self._dtheta()) - TWO_PI) < ANGLE_TOL

    def _theta(self, s):
        t0 = float(self.params["theta_start"])
        return t0 + self._dtheta() * s

    def _dtheta(self) -> float:
        return float(self.params["theta_end"]) - float(self.params["theta_start"])


@dataclass(frozen=True)
class Ray:
    """An edge-end leaving a vertex: direction angle plus which edge/end."""
    edge_id: str
    end: str                         # "from" | "to"
    angle: float                     # direction of departure, in [0, 2pi)
    crack: bool


@dataclass(frozen=True)
class Sector:
    """One connected component of the cone base at a vertex.

    The sector spans counterclockwise from ``theta_start`` to ``theta_end``
    (``theta_end`` may exceed 2*pi).  ``ray_start`` bounds it clockwise and
    has the sector on its counterclockwise side (side +1); ``ray_end`` has it
    on its clockwise side (side -1).
    """
    theta_start: float
    theta_end: float
    ray_start: Ray
    ray_end: Ray

    @property
    def measure(self) -> float:
        return self.theta_end - self.theta_start


@dataclass(frozen=True)
class VertexInfo:
    vertex_id: str
    rays: tuple[Ray, ...]
    sectors: tuple[Sector, ...]      # components of the cone base
    kind: VertexKind
    ramification: int
    crack_sector_idx: tuple[int, ...]     # sectors adjacent to a crack ray
    noncrack_sector_idx: tuple[int, ...]  # the omega' part (conical crack pts)


def _norm_angle(a: float) -> float:
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0 else a


class ConicalDomain:
    """Validated polygonal/conical domain with optional cracks."""

    def __init__(self, vertices, edges, options=None):
        self.vertices: dict[str, Vertex] = {v.id: v for v in vertices}
        if len(self.vertices) != len(vertices):
            raise DomainError("duplicate vertex ids")
        self.edges: dict[str, Edge] = {e.id: e for e in edges}
        if len(self.edges) != len(edges):
            raise DomainError("duplicate edge ids")
        self.options = dict(options or {})
        self._validate_refs()
        self.loop = self._build_loop()          # [(edge_id, forward)], CCW
        self._validate_no_intersections()
        self.vertex_info: dict[str, VertexInfo] = self._analyze_vertices()
        self.epsilon: dict[str, float] = self._collar_cutoffs()

    # -- accessors ---------------------------------------------------------

    def vertex(self, vid: str) -> Vertex:
        return self.vertices[vid]

    @property
    def crack_edges(self) -> list[Edge]:
        return [e for e in self.edges.values() if e.crack]

    @property
    def has_cracks(self) -> bool:
        return any(e.crack for e in self.edges.values())

    def boundary_edges(self) -> list[tuple[Edge, bool]]:
        """Non-crack edges in CCW order with their traversal direction."""
        return [(self.edges[eid], fwd) for eid, fwd in self.loop]

    # -- construction helpers ---------------------------------------------

    def _validate_refs(self):
        for e in self.edges.values():
            if e.kind == "line":
                if e.v_from is None or e.v_to is None:
                    raise DomainError(f"line edge {e.id} needs endpoints")
                if e.v_from == e.v_to:
                    raise DomainError(f"degenerate edge {e.id}")
            elif e.kind == "arc":
                if not e.is_closed() and (e.v_from is None or e.v_to is None):
                    raise DomainError(f"open arc edge {e.id} needs endpoints")
                if e.crack:
                    raise DomainError("crack edges must be straight segments")
            else:
                raise DomainError(f"unknown edge kind {e.kind!r}")
            for vid in (e.v_from, e.v_to):
                if vid is not None and vid not in self.vertices:
                    raise DomainError(f"edge {e.id} references unknown vertex {vid}")
            if e.kind == "line" and e.crack:
                a = self.vertex(e.v_from).pos
                b = self.vertex(e.v_to).pos
                if np.linalg.norm(b - a) <= 0:
                    raise DomainError(f"degenerate crack edge {e.id}")
        used = {v for e in self.edges.values() for v in (e.v_from, e.v_to) if v}
        lonely = set(self.vertices) - used
        if lonely:
            raise DomainError(f"vertices on no edge: {sorted(lonely)}")

    def _build_loop(self):
        """Chain the non-crack edges into a single closed CCW loop."""
        loop_edges = [e for e in self.edges.values() if not e.crack]
        if not loop_edges:
            raise DomainError("domain has no outer boundary")
        closed = [e for e in loop_edges if e.kind == "arc" and e.is_closed()]
        if closed:
            if len(loop_edges) != 1:
                raise DomainError("a closed arc must be the only boundary edge")
            e = closed[0]
            return [(e.id, e._dtheta() > 0)]

        # adjacency: vertex -> incident (edge, end) pairs
        inc: dict[str, list[tuple[str, str]]] = {}
        for e in loop_edges:
            inc.setdefault(e.v_from, []).append((e.id, "from"))
            inc.setdefault(e.v_to, []).append((e.id, "to"))
        for vid, ends in inc.items():
            if len(ends) != 2:
                raise DomainError(
                    f"boundary not a single closed curve at vertex {vid}")

        start = loop_edges[0]
        loop = [(start.id, True)]
        cur_vertex = start.v_to
        seen = {start.id}
        while cur_vertex != start.v_from or len(seen) < len(loop_edges):
            nxt = [(eid, end) for eid, end in inc[cur_vertex] if eid not in seen]
            if not nxt:
                raise DomainError("boundary edges do not form one closed loop")
            eid, end = nxt[0]
            forward = end == "from"
            loop.append((eid, forward))
            seen.add(eid)
            e = self.edges[eid]
            cur_vertex = e.v_to if forward else e.v_from
        if cur_vertex != start.v_from:
            raise DomainError("boundary edges do not form one closed loop")

        if self._signed_area(loop) < 0:
            loop = [(eid, not fwd) for eid, fwd in reversed(loop)]
        return loop

    def _signed_area(self, loop) -> float:
        pts = []
        for eid, fwd in loop:
            e = self.edges[eid]
            s = np.linspace(0.0, 1.0, 33)[:-1]
            p = e.point(s if fwd else 1.0 - s, self)
            pts.append(p)
        p = np.vstack(pts)
        x, y = p[:, 0], p[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def _polyline(self, edge: Edge, n=64):
        s = np.linspace(0.0, 1.0, n)
        return edge.point(s, self)

    def _validate_no_intersections(self):
        """Coarse pairwise check that distinct edges only meet at shared vertices."""
        polys = {eid: self._polyline(e) for eid, e in self.edges.items()}
        ids = list(self.edges)
        for i, ei in enumerate(ids):
            for ej in ids[i + 1:]:
                a, b = self.edges[ei], self.edges[ej]
                shared = {a.v_from, a.v_to} & {b.v_from, b.v_to} - {None}
                if shared:
                    continue
                d = _min_polyline_dist(polys[ei], polys[ej])
                scale = max(a.length(self), b.length(self))
                if d < 1e-9 * max(scale, 1.0) or \
                        _polylines_cross(polys[ei], polys[ej]):
                    raise DomainError(f"edges {ei} and {ej} intersect")

    def _incident_rays(self, vid: str) -> list[Ray]:
        rays = []
        for e in self.edges.values():
            for end, at in (("from", e.v_from), ("to", e.v_to)):
                if at != vid:
                    continue
                if e.kind == "arc" and e.is_closed():
                    continue
                t = e.tangent(0.0 if end == "from" else 1.0, self)
                d = t if end == "from" else -t
                rays.append(Ray(e.id, end, _norm_angle(math.atan2(d[1], d[0])),
                                e.crack))
        # a closed arc anchored at this vertex contributes both of its ends
        for e in self.edges.values():
            if e.kind == "arc" and e.is_closed() and e.v_from == vid:
                for end, s, sign in (("from", 0.0, 1.0), ("to", 1.0, -1.0)):
                    t = e.tangent(s, self)
                    d = sign * t
                    rays.append(Ray(e.id, end, _norm_angle(math.atan2(d[1], d[0])),
                                    e.crack))
        return rays

    def _loop_rays(self, vid: str):
        """(outgoing, incoming) departure angles of the boundary loop at vid."""
        out_ray = in_ray = None
        for eid, fwd in self.loop:
            e = self.edges[eid]
            a = e.v_from if fwd else e.v_to
            b = e.v_to if fwd else e.v_from
            if a == vid:
                t = e.tangent(0.0 if fwd else 1.0, self)
                d = t if fwd else -t
                out_ray = (eid, "from" if fwd else "to",
                           _norm_angle(math.atan2(d[1], d[0])))
            if b == vid:
                t = e.tangent(1.0 if fwd else 0.0, self)
                d = -t if fwd else t
                in_ray = (eid, "to" if fwd else "from",
                          _norm_angle(math.atan2(d[1], d[0])))
        return out_ray, in_ray

    def _analyze_vertices(self) -> dict[str, VertexInfo]:
        info = {}
        for vid in self.vertices:
            rays = self._incident_rays(vid)
            if not rays:
                raise DomainError(f"vertex {vid} has no incident edge ends")
            crack_rays = [r for r in rays if r.crack]
            loop_here = any(not r.crack for r in rays)

            if loop_here:
                out_ray, in_ray = self._loop_rays(vid)
                if out_ray is None or in_ray is None:
                    raise DomainError(f"vertex {vid}: inconsistent boundary loop")
                ray_out = next(r for r in rays
                               if (r.edge_id, r.end) == out_ray[:2] and not r.crack)
                ray_in = next(r for r in rays
                              if (r.edge_id, r.end) == in_ray[:2] and not r.crack)
                base0 = ray_out.angle
                span = _norm_angle(ray_in.angle - base0)
                if span < ANGLE_TOL:
                    span = TWO_PI
                inner = sorted(
                    (r for r in crack_rays), key=lambda r: _norm_angle(r.angle - base0))
                for r in inner:
                    off = _norm_angle(r.angle - base0)
                    if off < ANGLE_TOL or off > span - ANGLE_TOL:
                        raise DomainError(
                            f"crack at vertex {vid} leaves the interior sector")
                bounds = [(base0, ray_out)] + [
                    (base0 + _norm_angle(r.angle - base0), r) for r in inner
                ] + [(base0 + span, ray_in)]
            else:
                # floating crack vertex: full circle split by crack rays
                inner = sorted(crack_rays, key=lambda r: r.angle)
                base0 = inner[0].angle
                bounds = [(base0 + _norm_angle(r.angle - base0), r) for r in inner]
                bounds.append((base0 + TWO_PI, inner[0]))

            sectors = []
            for (t0, r0), (t1, r1) in zip(bounds[:-1], bounds[1:]):
                if t1 - t0 < ANGLE_TOL:
                    raise DomainError(
                        f"vertex {vid} has a zero-measure cone-base component")
                sectors.append(Sector(t0, t1, r0, r1))

            total = sum(s.measure for s in sectors)
            crack_idx = tuple(i for i, s in enumerate(sectors)
                              if s.ray_start.crack or s.ray_end.crack)
            noncrack_idx = tuple(i for i in range(len(sectors))
                                 if i not in crack_idx)

            if crack_rays:
                if abs(total - TWO_PI) < ANGLE_TOL:
                    kind = VertexKind.INNER_CRACK
                    ram = len(sectors)
                elif loop_here and abs(total - math.pi) < ANGLE_TOL:
                    kind = VertexKind.OUTER_CRACK
                    ram = len(sectors)
                else:
                    kind = VertexKind.CONICAL_CRACK
                    ram = len(crack_idx) + (1 if noncrack_idx else 0)
            else:
                kind = VertexKind.CONICAL
                ram = 1
                if len(sectors) == 1 and abs(sectors[0].measure - math.pi) < FLAT_TOL:
                    raise DomainError(
                        f"vertex {vid} is flat (angle pi); remove it")
            info[vid] = VertexInfo(vid, tuple(rays), tuple(sectors), kind, ram,
                                   crack_idx, noncrack_idx)
        return info

    def _collar_cutoffs(self) -> dict[str, float]:
        eps = {}
        overrides = self.options.get("epsilon", {})
        vids = list(self.vertices)
        for vid in vids:
            shortest = min(e.length(self) for e in self.edges.values()
                           if vid in (e.v_from, e.v_to))
            others = [np.linalg.norm(self.vertex(vid).pos - self.vertex(o).pos)
                      for o in vids if o != vid]
            e0 = 0.25 * min([shortest] + others)
            eps[vid] = float(overrides.get(vid, e0))
            if eps[vid] <= 0:
                raise DomainError(f"collar cutoff for {vid} must be positive")
        return eps


# -- parsing ---------------------------------------------------------------

def parse_domain(spec) -> ConicalDomain:
    """Build a validated domain from a JSON document, path, or dict."""
    if isinstance(spec, (str, bytes)):
        text = spec
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            with open(spec) as fh:
                doc = json.load(fh)
    elif hasattr(spec, "read"):
        doc = json.load(spec)
    else:
        doc = spec
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise DomainError("domain document needs 'vertices' and 'edges'")
    vertices = [Vertex(str(v["id"]), float(v["x"]), float(v["y"]))
                for v in doc["vertices"]]
    edges = []
    for e in doc["edges"]:
        edges.append(Edge(
            id=str(e["id"]),
            v_from=None if e.get("from") is None else str(e["from"]),
            v_to=None if e.get("to") is None else str(e["to"]),
            kind=e.get("kind", "line"),
            crack=bool(e.get("crack", False)),
            params=dict(e.get("params", {})),
        ))
    return ConicalDomain(vertices, edges, doc.get("options"))


# -- basic measurements ----------------------------------------------------

def interior_angles(d: ConicalDomain) -> list[tuple[str, float]]:
    """(vertex id, angular measure) for every cone-base component."""
    out = []
    for vid, info in d.vertex_info.items():
        for s in info.sectors:
            out.append((vid, s.measure))
    return out


def theta0(angles) -> float:
    """min over all angles of pi/theta and pi/(2*pi - theta)."""
    vals = []
    for th in angles:
        th = float(th)
        if not (0.0 < th < TWO_PI):
            raise ValueError(f"angle {th} outside (0, 2*pi)")
        vals.append(math.pi / th)
        vals.append(math.pi / (TWO_PI - th))
    if not vals:
        raise ValueError("no angles given")
    return min(vals)


# -- unfolding -------------------------------------------------------------

@dataclass(frozen=True)
class URay:
    """Edge-end of the unfolded boundary at an unfolded vertex."""
    uedge_id: str
    end: str
    angle: float
    side: int                        # +1: sector on CCW side, -1: on CW side


@dataclass(frozen=True)
class USector:
    theta_start: float
    theta_end: float
    ray_start: URay
    ray_end: URay

    @property
    def measure(self) -> float:
        return self.theta_end - self.theta_start


@dataclass(frozen=True)
class UVertex:
    uid: str
    base_vertex_id: str
    family: str                      # "noncrack" | "noncrack_part" | "crack_cover"
    sectors: tuple[USector, ...]
    position: tuple[float, float]


@dataclass(frozen=True)
class UEdge:
    uid: str
    base_edge_id: str
    forward: bool                    # traversal direction relative to the base edge
    crack_face: bool
    twin_uid: str | None
    uv_from: str | None
    uv_to: str | None


class UnfoldedDomain:
    """Crack-free cover of a cracked domain (identity for crack-free input)."""

    def __init__(self, base: ConicalDomain):
        self.base = base
        self.uvertices: dict[str, UVertex] = {}
        self.uedges: dict[str, UEdge] = {}
        self.cover_map: dict[str, str] = {}
        self._build()

    # total ramification alpha and the count m' of conical crack points
    # with nonempty non-crack part are set by _build.

    def _build(self):
        base = self.base
        singular = {vid: info for vid, info in base.vertex_info.items()
                    if info.kind in (VertexKind.INNER_CRACK,
                                     VertexKind.OUTER_CRACK,
                                     VertexKind.CONICAL_CRACK)}
        self.m_prime = sum(
            1 for info in singular.values()
            if info.kind == VertexKind.CONICAL_CRACK and info.noncrack_sector_idx)
        self.alpha = sum(info.ramification for info in singular.values()) \
            - self.m_prime

        # edges: boundary edges as-is (oriented along the CCW loop),
        # crack edges as twin face pairs
        for eid, fwd in base.loop:
            e = base.edges[eid]
            uid = f"{eid}"
            a = e.v_from if fwd else e.v_to
            b = e.v_to if fwd else e.v_from
            self.uedges[uid] = UEdge(uid, eid, fwd, False, None, a, b)
            self.cover_map[uid] = eid
        for e in base.crack_edges:
            u0, u1 = f"{e.id}+", f"{e.id}-"
            self.uedges[u0] = UEdge(u0, e.id, True, True, u1, e.v_from, e.v_to)
            self.uedges[u1] = UEdge(u1, e.id, False, True, u0, e.v_to, e.v_from)
            self.cover_map[u0] = e.id
            self.cover_map[u1] = e.id

        for vid, info in base.vertex_info.items():
            pos = (base.vertex(vid).x, base.vertex(vid).y)
            if info.kind == VertexKind.CONICAL:
                uid = vid
                usect = tuple(self._lift_sector(s) for s in info.sectors)
                self.uvertices[uid] = UVertex(uid, vid, "noncrack", usect, pos)
                self.cover_map[uid] = vid
                continue
            # singular crack point: one cover vertex per crack-part sector,
            # plus one vertex for the non-crack part when it is nonempty
            for j, idx in enumerate(info.crack_sector_idx):
                uid = f"{vid}#c{j}"
                usect = (self._lift_sector(info.sectors[idx]),)
                self.uvertices[uid] = UVertex(uid, vid, "crack_cover", usect, pos)
                self.cover_map[uid] = vid
            if info.kind == VertexKind.CONICAL_CRACK and info.noncrack_sector_idx:
                uid = f"{vid}#0"
                usect = tuple(self._lift_sector(info.sectors[i])
                              for i in info.noncrack_sector_idx)
                self.uvertices[uid] = UVertex(uid, vid, "noncrack_part", usect, pos)
                self.cover_map[uid] = vid

    def _lift_sector(self, s: Sector) -> USector:
        r0 = self._lift_ray(s.ray_start, +1)
        r1 = self._lift_ray(s.ray_end, -1)
        return USector(s.theta_start, s.theta_end, r0, r1)

    def _lift_ray(self, ray: Ray, side: int) -> URay:
        if not ray.crack:
            uid = ray.edge_id
            ue = self.uedges[uid]
            end = ray.end if ue.forward else ("to" if ray.end == "from" else "from")
            return URay(uid, end, ray.angle, side)
        # crack ray: pick the face whose outer normal points away from the
        # sector, i.e. the face bounding the sector on this side.  The face
        # traversed away from the vertex with the sector on its left is the
        # one whose left side (+90 deg from departure direction) is the
        # sector side.
        for suffix, fwd in (("+", True), ("-", False)):
            uid = ray.edge_id + suffix
            ue = self.uedges[uid]
            end = ray.end if fwd else ("to" if ray.end == "from" else "from")
            # departure direction along this face from this vertex end
            # equals ray.angle for both faces; they differ by which side
            # the domain lies on.  Face "+" keeps the base edge direction:
            # for end "from" its interior-left side is +1, for end "to" -1.
            left_side = 1 if (end == "from") else -1
            if left_side == side:
                return URay(uid, end, ray.angle, side)
        raise AssertionError("unreachable: crack ray face resolution")

    @property
    def has_cracks(self) -> bool:
        return self.base.has_cracks

    def vertex_strata_sizes(self) -> dict[str, int]:
        return {uid: 2 * len(uv.sectors) for uid, uv in self.uvertices.items()}


def unfold(d: ConicalDomain) -> UnfoldedDomain:
    """Unfolded domain; identity cover when d has no cracks."""
    return UnfoldedDomain(d)


# -- desingularized boundary ----------------------------------------------

@dataclass(frozen=True)
class Collar:
    uvertex_id: str
    epsilon: float
    labels: tuple[URay, ...]         # points of the collar boundary


class DesingularizedBoundary:
    """Disjoint vertex collars glued to the smooth boundary part."""

    def __init__(self, u: UnfoldedDomain):
        self.unfolded = u
        self.domain = u.base
        self.collars: list[Collar] = []
        for uid, uv in u.uvertices.items():
            labels = []
            for s in uv.sectors:
                labels.extend([s.ray_start, s.ray_end])
            eps = u.base.epsilon[uv.base_vertex_id]
            self.collars.append(Collar(uid, eps, tuple(labels)))
        self.smooth_part = list(u.uedges.values())

    @property
    def boundary_point_count(self) -> int:
        return sum(len(c.labels) for c in self.collars)

    @property
    def from_cracked(self) -> bool:
        return self.unfolded.has_cracks


def desingularize_boundary(d) -> DesingularizedBoundary:
    """Collar decomposition of the boundary; cracked input is unfolded first
    only if already given as an UnfoldedDomain."""
    if isinstance(d, UnfoldedDomain):
        return DesingularizedBoundary(d)
    if d.has_cracks:
        raise DomainError("unresolved cracks: unfold the domain first")
    return DesingularizedBoundary(UnfoldedDomain(d))


# -- smoothed distance to the vertex set ----------------------------------

def _blend(s):
    """C^2 monotone quintic with h(0)=0, h'(0)=1, h''(0)=0, h(1)=1,
    h'(1)=h''(1)=0, used on the normalized blending variable."""
    return s + 4 * s**3 - 7 * s**4 + 3 * s**5


def smoothed_distance(d: ConicalDomain, x) -> float:
    """Smoothed distance r(x) to the vertex set.

    Equals the Euclidean vertex distance up to eps/2, blends monotonically on
    [eps/2, eps], and plateaus at eps outside the collar of the nearest
    vertex.  Exactly at a vertex the continuous extension 0 is returned.
    """
    x = np.asarray(x, dtype=float)
    if not d.vertices:
        eps = d.options.get("epsilon_smooth", 0.25)
        return float(eps)
    best = None
    for vid, v in d.vertices.items():
        dist = float(np.linalg.norm(x - v.pos))
        eps = d.epsilon[vid]
        if best is None or dist - eps < best[0] - best[1]:
            best = (dist, eps)
    dist, eps = best
    if dist >= eps:
        return eps
    if dist <= eps / 2:
        return dist
    s = (dist - eps / 2) / (eps / 2)
    return eps / 2 * (1.0 + _blend(s))


def _polylines_cross(p, q) -> bool:
    """Any proper segment-segment crossing between two polylines."""
    a, b = p[:-1], p[1:]
    c, d = q[:-1], q[1:]

    def orient(u, v, w):
        # sign of the cross product (v-u) x (w-u), broadcast over pairs
        return ((v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1])
                - (v[..., 1] - u[..., 1]) * (w[..., 0] - u[..., 0]))

    A = a[:, None, :]
    B = b[:, None, :]
    C = c[None, :, :]
    D = d[None, :, :]
    o1 = orient(A, B, C)
    o2 = orient(A, B, D)
    o3 = orient(C, D, A)
    o4 = orient(C, D, B)
    return bool(np.any((o1 * o2 < 0) & (o3 * o4 < 0)))


def _min_polyline_dist(p, q) -> float:
    # conservative point-cloud distance; enough for coarse intersection checks
    d2 = ((p[:, None, :] - q[None, :, :]) ** 2).sum(-1)
    return math.sqrt(float(d2.min()))
