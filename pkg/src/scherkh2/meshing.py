"""Triangulation of Scherk quadrilaterals and truncated ideal regions.

Everything is meshed in the disk chart.  Symmetric domains (the family
``D_lambda``, the quadrant ``{x1 > |x2|}`` and the truncated disk) are meshed
on the fundamental wedge ``0 <= arg z <= pi/4`` and unfolded with the
dihedral group of the square, so the meshes are exactly invariant under the
reflections ``x1 <-> x2`` and ``x1 -> -x1``.  General finite quadrilaterals
are meshed directly.  Triangle (Shewchuk) does the constrained quality
triangulation; boundary points are placed by us, exactly on the geodesics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import triangle as _triangle
from scipy.spatial import cKDTree

from .hypgeom import GeodesicArc, ScherkQuadrilateral, IdealVertex

TAGS = ("A1", "B1", "A2", "B2", "GAMMA1", "GAMMA2", "TRUNC")
INTERIOR = ""


class MeshError(ValueError):
    """Degenerate domain or unsatisfiable mesh quality request."""


@dataclass(frozen=True)
class RefinementConfig:
    h: float = 0.02
    grading: float = 0.5
    truncation_delta: float = 0.02
    min_angle: float = 20.0
    # width (disk chart) of the layer over which grading relaxes back to h
    grading_width: float = 0.1

    def __post_init__(self):
        if not self.h > 0:
            raise MeshError("h must be positive")
        if not 0 < self.grading <= 1:
            raise MeshError("grading must lie in (0, 1]")
        if not 0 < self.truncation_delta < 0.5:
            raise MeshError("truncation_delta must lie in (0, 0.5)")
        if not 0 < self.min_angle <= 33.0:
            # Ruppert refinement is only guaranteed to terminate below ~33.8 deg
            raise MeshError(f"minimum angle {self.min_angle} deg is not attainable")


@dataclass(frozen=True)
class QuadrantRegion:
    """The truncated quadrant ``{x1 > |x2|, |x| < 1 - delta}``."""

    truncation_delta: float = 0.02


@dataclass(frozen=True)
class DiskRegion:
    """The truncated disk ``{|x| < 1 - delta}`` (meshed as four quadrants)."""

    truncation_delta: float = 0.02


@dataclass(eq=False)
class TriMesh:
    nodes: np.ndarray              # (N, 2) disk coordinates
    triangles: np.ndarray          # (M, 3), counterclockwise
    tags: np.ndarray               # (N,) tag string, "" for untagged interior nodes
    boundary: np.ndarray           # (N,) bool, Dirichlet nodes
    h: float
    grading: float
    domain: object = None
    min_angle_required: float = 20.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def z(self) -> np.ndarray:
        if "z" not in self._cache:
            z = self.nodes[:, 0] + 1j * self.nodes[:, 1]
            z.setflags(write=False)
            self._cache["z"] = z
        return self._cache["z"]

    @property
    def boundary_nodes(self) -> dict:
        return {int(i): str(self.tags[i]) for i in np.flatnonzero(self.boundary)}

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def min_angle_deg(self) -> float:
        return float(np.degrees(_triangle_angles(self.nodes, self.triangles).min()))

    def edges(self) -> np.ndarray:
        """Unique undirected edges, shape (E, 2)."""
        if "edges" not in self._cache:
            t = self.triangles
            e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            e.sort(axis=1)
            self._cache["edges"] = np.unique(e, axis=0)
        return self._cache["edges"]

    def edge_triangle_counts(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts

    def neighbors(self) -> list:
        """Adjacency lists (sorted) of the node graph."""
        if "nbrs" not in self._cache:
            nb = [[] for _ in range(self.n_nodes)]
            for i, j in self.edges():
                nb[i].append(int(j))
                nb[j].append(int(i))
            self._cache["nbrs"] = [sorted(x) for x in nb]
        return self._cache["nbrs"]

    def node_triangles(self) -> list:
        if "ntri" not in self._cache:
            nt = [[] for _ in range(self.n_nodes)]
            for k, tri in enumerate(self.triangles):
                for i in tri:
                    nt[i].append(k)
            self._cache["ntri"] = nt
        return self._cache["ntri"]

    def ring(self, i: int, depth: int = 2) -> np.ndarray:
        """Nodes within ``depth`` graph steps of node ``i`` (including ``i``)."""
        nb = self.neighbors()
        seen = {i}
        front = [i]
        for _ in range(depth):
            nxt = []
            for a in front:
                for b in nb[a]:
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            front = nxt
        return np.array(sorted(seen))

    def local_size(self) -> np.ndarray:
        """Mean incident edge length per node (disk chart)."""
        if "lsize" not in self._cache:
            e = self.edges()
            le = np.linalg.norm(self.nodes[e[:, 0]] - self.nodes[e[:, 1]], axis=1)
            s = np.zeros(self.n_nodes)
            c = np.zeros(self.n_nodes)
            np.add.at(s, e[:, 0], le)
            np.add.at(s, e[:, 1], le)
            np.add.at(c, e[:, 0], 1)
            np.add.at(c, e[:, 1], 1)
            self._cache["lsize"] = s / np.maximum(c, 1)
        return self._cache["lsize"]

    def _tree(self):
        if "tree" not in self._cache:
            self._cache["tree"] = cKDTree(self.centroids())
        return self._cache["tree"]


def _triangle_angles(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p = nodes[tris]
    out = []
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        out.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
    return np.stack(out, axis=1)


# ---------------------------------------------------------------------------
# boundary pieces

@dataclass
class _Piece:
    tag: str
    point_at: object          # callable s in [0,1] -> complex array
    length: float             # Euclidean
    graded: bool              # grade element size toward this piece
    boundary: bool            # Dirichlet piece in the final mesh
    carrier: GeodesicArc | None = None


def _line_piece(z0: complex, z1: complex, tag: str, boundary: bool) -> _Piece:
    return _Piece(tag, lambda s: z0 + np.asarray(s) * (z1 - z0), abs(z1 - z0), False, boundary)


def _circle_piece(r: float, a0: float, a1: float, tag: str) -> _Piece:
    return _Piece(tag, lambda s: r * np.exp(1j * (a0 + np.asarray(s) * (a1 - a0))),
                  r * abs(a1 - a0), True, True)


def _sub_arc(arc: GeodesicArc, s0: float, s1: float, tag: str) -> _Piece:
    f = lambda s: arc.point_at(s0 + np.asarray(s) * (s1 - s0))
    return _Piece(tag, f, arc.euclidean_length() * abs(s1 - s0), True, True, carrier=arc)


class _SizeField:
    def __init__(self, cfg: RefinementConfig, graded: list, cusp_pairs: list):
        self.cfg = cfg
        self.graded = graded
        self.cusp_pairs = cusp_pairs

    def dist_graded(self, z):
        if not self.graded:
            return np.full(np.shape(z), np.inf)
        return np.min([p.dist(z) for p in self.graded], axis=0)

    def __call__(self, z):
        cfg = self.cfg
        d = self.dist_graded(z)
        s = cfg.h * (cfg.grading + (1.0 - cfg.grading) * np.minimum(1.0, d / cfg.grading_width))
        for dist in self.cusp_pairs:
            s = np.minimum(s, np.maximum(0.8 * dist(z), 1e-7))
        return s


@dataclass
class _DistTo:
    piece: _Piece
    dense: np.ndarray = None

    def __post_init__(self):
        self.dense = self.piece.point_at(np.linspace(0.0, 1.0, 4001))
        self._tree = cKDTree(np.column_stack([self.dense.real, self.dense.imag]))

    def dist(self, z):
        z = np.asarray(z)
        d, _ = self._tree.query(np.column_stack([z.real.ravel(), z.imag.ravel()]))
        return d.reshape(z.shape)


def _sample_piece(piece: _Piece, size: _SizeField) -> np.ndarray:
    """Points along a piece with spacing following the size field (ends included)."""
    n_dense = 20001
    s = np.linspace(0.0, 1.0, n_dense)
    z = piece.point_at(s)
    ds = np.abs(np.diff(z))
    zm = 0.5 * (z[1:] + z[:-1])
    w = np.concatenate([[0.0], np.cumsum(ds / size(zm))])
    n = max(1, int(math.ceil(w[-1])))
    targets = np.linspace(0.0, w[-1], n + 1)
    s_pts = np.interp(targets, w, s)
    s_pts[0], s_pts[-1] = 0.0, 1.0
    return piece.point_at(s_pts)


def _triangulate_polygon(pieces: list, size: _SizeField, cfg: RefinementConfig):
    """Quality-triangulate the closed polygon formed by ``pieces`` (in order).

    Returns nodes (complex), triangles, and per-node piece index for the
    input boundary points (-1 for interior nodes; corners get the index of
    the piece that starts there).
    """
    pts, owner = [], []
    for k, pc in enumerate(pieces):
        zs = _sample_piece(pc, size)[:-1]
        pts.append(zs)
        owner.append(np.full(len(zs), k))
    z_in = np.concatenate(pts)
    own = np.concatenate(owner)
    nb = len(z_in)
    seg = np.column_stack([np.arange(nb), (np.arange(nb) + 1) % nb])
    verts = np.column_stack([z_in.real, z_in.imag])
    q = f"pq{cfg.min_angle + 2.0:.2f}Y"
    span = max(np.ptp(verts[:, 0]), np.ptp(verts[:, 1]))
    if cfg.h > span:
        raise MeshError(f"h={cfg.h} exceeds the domain extent {span:.3g}")
    mesh = _triangle.triangulate(dict(vertices=verts, segments=seg),
                                 q + f"a{cfg.h * cfg.h * math.sqrt(3) / 4:.12g}")
    for _ in range(12):
        v, t = mesh["vertices"], mesh["triangles"]
        c = v[t].mean(axis=1)
        target = size(c[:, 0] + 1j * c[:, 1]) ** 2 * math.sqrt(3) / 4.0
        p = v[t]
        area = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                            - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
        if np.all(area <= 1.3 * target):
            break
        mesh = dict(vertices=v, triangles=t, segments=mesh["segments"],
                    triangle_max_area=np.minimum(target, area))
        mesh = _triangle.triangulate(mesh, "r" + q + "a")
    v = mesh["vertices"]
    t = mesh["triangles"]
    if len(v) < nb or not np.array_equal(v[:nb], verts):
        raise MeshError("boundary points were not preserved by the triangulator")
    corner = _min_corner_angle(z_in, np.concatenate([[0], np.cumsum([len(p) for p in pts])[:-1]]))
    node_owner = np.full(len(v), -1)
    node_owner[:nb] = own
    return v[:, 0] + 1j * v[:, 1], t.astype(np.int64), node_owner, corner


def _min_corner_angle(z: np.ndarray, starts: np.ndarray) -> float:
    """Smallest interior angle (deg) of the input polygon at the piece junctions."""
    n = len(z)
    out = 180.0
    for i in starts:
        a = z[(i + 1) % n] - z[i]
        b = z[i - 1] - z[i]
        ang = abs(math.degrees(math.atan2((np.conj(a) * b).imag, (np.conj(a) * b).real)))
        out = min(out, ang)
    return out


# ---------------------------------------------------------------------------
# dihedral unfolding

def _exact_rot(z, r):
    x, y = z.real, z.imag
    if r == 1:
        return x + 1j * y
    if r == 1j:
        return -y + 1j * x
    if r == -1:
        return -x - 1j * y
    return y - 1j * x


def _group(kind: str):
    """Group elements as (callable, reflection flag)."""
    out = []
    for r in (1, 1j, -1, -1j):
        out.append((lambda z, r=r: _exact_rot(z, r), False))
        out.append((lambda z, r=r: _exact_rot(np.conj(z), r), True))
    if kind == "quadrant":
        return [out[0], out[1]]   # identity, reflection across the x1-axis
    return out


def _unfold(z, tris, owner, pieces, group, key_scale=1e12):
    all_z, all_t, all_own = [], [], []
    offset = 0
    for f, refl in group:
        zz = f(z)
        tt = tris[:, [0, 2, 1]] if refl else tris
        all_z.append(zz)
        all_t.append(tt + offset)
        all_own.append(owner)
        offset += len(zz)
    Z = np.concatenate(all_z)
    T = np.concatenate(all_t)
    O = np.concatenate(all_own)
    keys = np.round(np.column_stack([Z.real, Z.imag]) * key_scale).astype(np.int64)
    uniq, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inv = inv.ravel()
    order = np.argsort(first)          # keep first-seen order for determinism
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    Zu = Z[first[order]]
    Ou = O[first[order]]
    Tu = remap[inv[T]]
    return Zu, Tu, Ou


def _angle_tag(z: complex) -> str:
    a = math.atan2(z.imag, z.real) % (2 * math.pi)
    k = int(((a + math.pi / 4) % (2 * math.pi)) // (math.pi / 2))
    return ("A1", "B1", "A2", "B2")[k]


def _diag_tag(z: complex) -> str:
    return "GAMMA1" if z.real * z.imag > 0 else "GAMMA2"


# ---------------------------------------------------------------------------
# public entry points

def triangulate(domain, cfg: RefinementConfig | None = None) -> TriMesh:
    cfg = cfg or RefinementConfig()
    if isinstance(domain, ScherkQuadrilateral):
        if domain.is_symmetric:
            return _mesh_symmetric(domain, cfg)
        if domain.is_ideal:
            raise MeshError("only the symmetric ideal family is supported for ideal domains")
        return _mesh_general(domain, cfg)
    if isinstance(domain, (QuadrantRegion, DiskRegion)):
        return _mesh_disk_like(domain, cfg)
    raise MeshError(f"cannot mesh {type(domain).__name__}")


def _mesh_symmetric(dom: ScherkQuadrilateral, cfg: RefinementConfig) -> TriMesh:
    arc = dom.edge("A1")                 # from vertex at -pi/4 to vertex at +pi/4
    c0 = arc.center.real
    m = c0 - arc.radius                  # A1 crosses the x1-axis here
    # parameter of the A1 arc at the axis and at the vertex (s=1)
    s_mid = arc.param_of(complex(m, 0.0))
    pieces = [_line_piece(0j, complex(m, 0.0), INTERIOR, False)]
    if math.isinf(dom.lam):
        rho = 1.0 - cfg.truncation_delta
        if m >= rho:
            raise MeshError("truncation radius does not cut the ideal square")
        cosphi = (rho * rho + 1.0) / (2.0 * c0 * rho)
        phi = math.acos(cosphi)
        zc = rho * complex(math.cos(phi), math.sin(phi))
        s_c = arc.param_of(zc)
        pieces.append(_sub_arc(arc, s_mid, s_c, "A1"))
        pieces.append(_circle_piece(rho, phi, math.pi / 4, "TRUNC"))
        zq = rho * complex(math.sqrt(0.5), math.sqrt(0.5))
    else:
        pieces.append(_sub_arc(arc, s_mid, 1.0, "A1"))
        zq = arc.z1
    zq = complex(zq.real, zq.real)       # exactly on the diagonal
    pieces.append(_line_piece(zq, 0j, "GAMMA1", False))

    graded = [_DistTo(p) for p in pieces if p.graded]
    cusp = []
    if math.isinf(dom.lam):
        da, dd = _DistTo(pieces[1]), _DistTo(pieces[3])
        cusp = [lambda z, da=da, dd=dd: da.dist(z) + dd.dist(z)]
    size = _SizeField(cfg, graded, cusp)
    z, tris, owner, corner = _triangulate_polygon(pieces, size, cfg)
    # exact mirror coordinates for nodes on the mirror lines
    on_axis = owner == 0
    z[on_axis] = z[on_axis].real + 0j
    on_diag = owner == len(pieces) - 1
    z[on_diag] = z[on_diag].real * (1 + 1j)
    Z, T, O = _unfold(z, tris, owner, pieces, _group("full"))
    tags = np.full(len(Z), INTERIOR, dtype=object)
    boundary = np.zeros(len(Z), dtype=bool)
    for i, (zi, o) in enumerate(zip(Z, O)):
        if o < 0:
            continue
        pc = pieces[o]
        if pc.tag == "TRUNC":
            tags[i], boundary[i] = "TRUNC", True
        elif pc.tag == "A1":
            tags[i], boundary[i] = _angle_tag(zi), True
        elif pc.tag == "GAMMA1" and zi != 0:
            tags[i] = _diag_tag(zi)
    if math.isinf(dom.lam):
        on_cut = np.abs(np.abs(Z) - rho) < 1e-13
        for i in np.flatnonzero(on_cut):
            boundary[i] = True
            if tags[i] == INTERIOR:
                tags[i] = "TRUNC"
    else:
        r_v = abs(dom.vertex_z()[0])
        vert = np.isclose(np.abs(Z), r_v, atol=1e-13, rtol=0) & np.isclose(
            np.abs(Z.real), np.abs(Z.imag), atol=1e-13, rtol=0)
        for i in np.flatnonzero(vert):
            tags[i], boundary[i] = _diag_tag(Z[i]), True
    return _finish(Z, T, tags, boundary, cfg, dom, corner)


def _mesh_disk_like(region, cfg: RefinementConfig) -> TriMesh:
    rho = 1.0 - region.truncation_delta
    zq = complex(rho * math.sqrt(0.5), rho * math.sqrt(0.5))
    zq = complex(zq.real, zq.real)
    pieces = [
        _line_piece(0j, complex(rho, 0.0), INTERIOR, False),
        _circle_piece(rho, 0.0, math.pi / 4, "TRUNC"),
        _line_piece(zq, 0j, "GAMMA1", isinstance(region, QuadrantRegion)),
    ]
    size = _SizeField(cfg, [_DistTo(pieces[1])], [])
    z, tris, owner, corner = _triangulate_polygon(pieces, size, cfg)
    z[owner == 0] = z[owner == 0].real + 0j
    z[owner == 2] = z[owner == 2].real * (1 + 1j)
    kind = "quadrant" if isinstance(region, QuadrantRegion) else "full"
    Z, T, O = _unfold(z, tris, owner, pieces, _group(kind))
    tags = np.full(len(Z), INTERIOR, dtype=object)
    boundary = np.zeros(len(Z), dtype=bool)
    for i, (zi, o) in enumerate(zip(Z, O)):
        if o == 1 or (o >= 0 and abs(abs(zi) - rho) < 1e-13):
            tags[i], boundary[i] = "TRUNC", True
        elif o == 2 and zi != 0:
            tags[i] = _diag_tag(zi)
            boundary[i] = isinstance(region, QuadrantRegion)
    if isinstance(region, QuadrantRegion):
        # the corner where the two edges of the quadrant meet is Dirichlet too
        boundary[np.flatnonzero(np.abs(Z) == 0)] = True
        # corners on the truncation circle carry the diagonal tag (data 0)
        on_corner = (np.abs(np.abs(Z) - rho) < 1e-13) & np.isclose(
            np.abs(Z.real), np.abs(Z.imag), atol=1e-13, rtol=0)
        for i in np.flatnonzero(on_corner):
            tags[i] = _diag_tag(Z[i])
    return _finish(Z, T, tags, boundary, cfg, region, corner)


def _mesh_general(dom: ScherkQuadrilateral, cfg: RefinementConfig) -> TriMesh:
    vz = dom.vertex_z()
    edges = list(dom.edges)
    # walk the boundary counterclockwise: vertex k-1 -> vertex k along edge k
    pieces = []
    for k, name in enumerate(("A1", "B1", "A2", "B2")):
        arc = edges[k]
        if abs(arc.z0 - vz[k - 1]) > 1e-12:
            raise MeshError("edge orientation mismatch")
        pc = _sub_arc(arc, 0.0, 1.0, name) if not arc.is_line else _Piece(
            name, arc.point_at, arc.euclidean_length(), True, True, carrier=arc)
        pieces.append(pc)
    # start the polygon at vertex 3 so that piece k starts at vertex k-1
    areas = sum((np.conj(vz[k - 1]) * vz[k]).imag for k in range(4))
    if areas <= 1e-12:
        raise MeshError("degenerate quadrilateral")
    size = _SizeField(cfg, [_DistTo(p) for p in pieces], [])
    z, tris, owner, corner = _triangulate_polygon(pieces, size, cfg)
    tags = np.full(len(z), INTERIOR, dtype=object)
    boundary = owner >= 0
    for i in np.flatnonzero(boundary):
        tags[i] = pieces[owner[i]].tag
    for k in range(4):
        i = int(np.argmin(np.abs(z - vz[k])))
        if abs(z[i] - vz[k]) < 1e-13:
            tags[i] = "GAMMA1" if k % 2 == 0 else "GAMMA2"
    return _finish(z, tris, tags, boundary, cfg, dom, corner)


def _finish(Z, T, tags, boundary, cfg, domain, corner_angle=180.0) -> TriMesh:
    nodes = np.column_stack([Z.real, Z.imag])
    p = nodes[T]
    sa = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    if np.any(sa <= 0):
        T = T.copy()
        flip = sa < 0
        T[flip] = T[flip][:, [0, 2, 1]]
        if np.any(sa == 0):
            raise MeshError("degenerate triangle produced")
    mesh = TriMesh(nodes, T, np.asarray(tags, dtype=object), np.asarray(boundary, dtype=bool),
                   cfg.h, cfg.grading, domain)
    # an input corner sharper than the target bounds the attainable quality
    required = min(cfg.min_angle, 0.9 * corner_angle)
    mesh.min_angle_required = required
    if mesh.min_angle_deg() < required - 1e-9:
        raise MeshError(f"quality constraint violated: min angle {mesh.min_angle_deg():.2f} deg")
    return mesh


def locate(mesh: TriMesh, p) -> tuple[int, np.ndarray]:
    """Containing triangle and barycentric coordinates of disk point ``p``."""
    p = np.asarray(p, dtype=float).reshape(2)
    tree = mesh._tree()
    k = min(32, mesh.n_triangles)
    while True:
        _, idx = tree.query(p, k=k)
        idx = np.atleast_1d(idx)
        for t in idx:
            lam = _barycentric(mesh.nodes[mesh.triangles[t]], p)
            if np.all(lam >= -1e-12):
                lam = np.clip(lam, 0.0, None)
                return int(t), lam / lam.sum()
        if k >= mesh.n_triangles:
            raise ValueError(f"point {tuple(p)} is outside the mesh")
        k = min(4 * k, mesh.n_triangles)


def _barycentric(tri: np.ndarray, p: np.ndarray) -> np.ndarray:
    a, b, c = tri
    m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    l1, l2 = np.linalg.solve(m, p - a)
    return np.array([1.0 - l1 - l2, l1, l2])


def boundary_polygon_area(mesh: TriMesh) -> float:
    """Area of the region bounded by the boundary edges (shoelace on each loop)."""
    counts = {}
    t = mesh.triangles
    for a, b in np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]):
        key = (min(a, b), max(a, b))
        counts[key] = counts.get(key, 0) + 1
    directed = [(a, b) for a, b in np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
                if counts[(min(a, b), max(a, b))] == 1]
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    return float(sum(0.5 * (x[a] * y[b] - x[b] * y[a]) for a, b in directed))
