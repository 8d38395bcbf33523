"""Qualitative checks on computed minimal graphs and the curvature comparison.

Fields are examined through jet fields (:class:`~scherkh2.curvature.JetField`
for discrete solutions, :class:`~scherkh2.curvature.ExactJetField` for
closed-form families).  Level sets are extracted by marching triangles on
the nodal values; the nu-level curves ``C_nu`` carry the frame angle theta
along them, which is what Gauss-map matching inverts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .curvature import (
    CurvatureError, ExactJetField, FrameContext, Jet2, JetField, fit_jet, shape_arrays,
)
from .hypgeom import conformal_factor, disk_to_half_plane_c, half_plane_distance_c, half_plane_to_disk_c
from .meshing import TriMesh, locate
from .solver import ScalarField

TWO_PI = 2.0 * math.pi
# patch scale for jets of Scherk-type fields, whose steep gradients make the
# truncation error of wide patches dominate the discretisation noise
SCHERK_PATCH_SCALE = 6.0


class AnalysisError(RuntimeError):
    pass


class NotAttained(AnalysisError):
    """The requested Gauss-map value is not reached on the truncated mesh."""


def as_jets(u) -> JetField | ExactJetField:
    if isinstance(u, (JetField, ExactJetField)):
        return u
    if isinstance(u, ScalarField):
        return JetField(u)
    raise TypeError("expected a ScalarField or a jet field")


def hyperbolic_mesh_size(mesh: TriMesh) -> np.ndarray:
    return mesh.local_size() * conformal_factor(mesh.z)


def _wrap(a):
    """Representative of ``a`` modulo 2 pi in (-pi, pi]."""
    return -((-np.asarray(a) + math.pi) % TWO_PI - math.pi)


# ---------------------------------------------------------------------------
# critical points

@dataclass
class CriticalPoint:
    location: complex        # disk chart
    grad_norm: float         # hyperbolic norm of the gradient at the representative node
    kind: str                # "min" | "max" | "saddle" | "degenerate"
    node: int
    cluster_size: int


@dataclass
class CriticalPointReport:
    points: list
    count: int
    degenerate: bool = False
    coincides: bool | None = None   # nu census: same point as the u census

    def to_dict(self) -> dict:
        return {"count": self.count, "degenerate": self.degenerate, "coincides": self.coincides,
                "points": [{"x1": p.location.real, "x2": p.location.imag, "grad_norm": p.grad_norm,
                            "kind": p.kind, "node": p.node, "cluster_size": p.cluster_size}
                           for p in self.points]}


def _gradient_and_hessian(jets):
    c = jets.coef
    y = jets.w.imag
    g = y * np.hypot(c[:, 1], c[:, 2])
    # spectral norm of the symmetric chart Hessian, scaled to the metric
    half = 0.5 * (c[:, 3] - c[:, 5])
    hn = np.abs(0.5 * (c[:, 3] + c[:, 5])) + np.sqrt(half * half + c[:, 4] ** 2)
    return g, y * y * hn


def _census(jets, threshold=None) -> CriticalPointReport:
    mesh = jets.mesh
    interior = ~mesh.boundary & jets.valid
    g, hn = _gradient_and_hessian(jets)
    values = jets.coef[:, 0]
    scale = 1.0 + np.nanmax(np.abs(values[interior])) if interior.any() else 1.0
    if interior.any() and np.nanmax(g[interior]) <= 1e-12 * scale:
        idx = np.flatnonzero(interior)
        pts = [CriticalPoint(complex(mesh.z[i]), float(g[i]), "degenerate", int(i), 1) for i in idx]
        return CriticalPointReport(pts, len(pts), degenerate=True)
    if threshold is None:
        thr = 10.0 * hyperbolic_mesh_size(mesh) * hn
    else:
        thr = np.broadcast_to(np.asarray(threshold, float), g.shape)
    flagged = interior & (g < thr)
    idx = np.flatnonzero(flagged)
    if len(idx) == 0:
        return CriticalPointReport([], 0)
    e = mesh.edges()
    keep = flagged[e[:, 0]] & flagged[e[:, 1]]
    e = e[keep]
    n = mesh.n_nodes
    A = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    _, lab = connected_components(A, directed=False)
    points = []
    for comp in np.unique(lab[idx]):
        members = idx[lab[idx] == comp]
        # a cluster without a topologically critical vertex is a threshold artefact
        crit = np.array([k for k in members if pl_critical(mesh, values, int(k))], dtype=int)
        if len(crit) == 0:
            continue
        i = int(crit[np.argmin(g[crit] / np.maximum(thr[crit], 1e-300))])
        c = jets.coef[i]
        det = c[3] * c[5] - c[4] ** 2
        kind = "saddle" if det < 0 else ("min" if c[3] + c[5] > 0 else "max")
        points.append(CriticalPoint(_refined_location(jets, i), float(g[i]), kind, i, len(members)))
    points = _merge_close(points, mesh)
    return CriticalPointReport(points, len(points))


def _link(mesh: TriMesh, i: int) -> np.ndarray:
    nb = np.asarray(mesh.neighbors()[i])
    d = mesh.z[nb] - mesh.z[i]
    return nb[np.argsort(np.angle(d))]


def pl_critical(mesh: TriMesh, values: np.ndarray, i: int) -> bool:
    """Piecewise-linear criticality of an interior vertex.

    A vertex is regular iff ``values - values[i]`` changes sign exactly twice
    around its link; ties are broken by node index (symbolic perturbation).
    """
    if mesh.boundary[i]:
        return False
    link = _link(mesh, i)
    v0 = values[i]
    above = (values[link] > v0) | ((values[link] == v0) & (link > i))
    changes = int(np.count_nonzero(above != np.roll(above, 1)))
    return changes != 2


def _refined_location(jets, i: int) -> complex:
    """One Newton step on the fitted quadratic, kept within two cells of node ``i``.

    Discrete fields are refitted in the chart recentred at the node, which
    commutes with the isometries fixing it; a critical point at a centre of
    symmetry then stays there instead of drifting with the chart bias.
    """
    c = jets.coef[i]
    if isinstance(jets, JetField):
        try:
            c = fit_jet(jets.u, i, scale=jets.scale, chart="centred").as_array()
        except CurvatureError:
            pass
    H = np.array([[c[3], c[4]], [c[4], c[5]]])
    w = complex(jets.w[i])
    try:
        d = -np.linalg.solve(H, c[1:3])
    except np.linalg.LinAlgError:
        return complex(jets.mesh.z[i])
    step = complex(d[0], d[1])
    # chart step versus local cell size, both measured in the half-plane
    cell = abs(disk_to_half_plane_c(jets.mesh.z[i] + jets.mesh.local_size()[i]) - w)
    if not np.isfinite(step.real + step.imag) or abs(step) > 2.0 * cell:
        return complex(jets.mesh.z[i])
    return complex(half_plane_to_disk_c(w + step))


def _merge_close(points: list, mesh: TriMesh) -> list:
    """Merge representatives closer than one local mesh cell (hyperbolic)."""
    hs = hyperbolic_mesh_size(mesh)
    out: list = []
    for p in sorted(points, key=lambda p: p.grad_norm):
        wp = disk_to_half_plane_c(p.location)
        close = False
        for q in out:
            d = half_plane_distance_c(wp, disk_to_half_plane_c(q.location))
            if d <= max(hs[p.node], hs[q.node]):
                q.cluster_size += p.cluster_size
                close = True
                break
        if not close:
            out.append(p)
    return out


def find_critical_points(u, threshold=None) -> CriticalPointReport:
    """Interior clusters where ``|grad u| < 10 h |Hess u|`` (metric norms)."""
    return _census(as_jets(u), threshold)


def nu_field(jets) -> ScalarField:
    return ScalarField(jets.mesh, np.where(jets.valid, jets.arrays["nu"], 1.0))


def nu_critical_points(u, threshold=None, u_report: CriticalPointReport | None = None) -> CriticalPointReport:
    """Critical points of ``nu = 1/W`` and whether they coincide with those of ``u``."""
    jets = as_jets(u)
    mesh = jets.mesh
    if np.all(np.abs(jets.coef[~mesh.boundary & jets.valid, 1:3]) <= 1e-14):
        rep = _census(ExactJetField(mesh, lambda x, y: (np.ones_like(x),) + (np.zeros_like(x),) * 5))
        rep.coincides = None
        return rep
    nu = nu_field(jets)
    nu_jets = JetField(nu, scale=jets.scale) if isinstance(jets, JetField) else JetField(nu)
    rep = _census(nu_jets, threshold)
    u_report = u_report or _census(jets)
    if rep.count == 1 and u_report.count == 1:
        p, q = rep.points[0], u_report.points[0]
        d = half_plane_distance_c(disk_to_half_plane_c(p.location), disk_to_half_plane_c(q.location))
        rep.coincides = bool(d <= hyperbolic_mesh_size(mesh)[q.node])
    else:
        rep.coincides = False
    return rep


# ---------------------------------------------------------------------------
# curvature sign

def distance_to_boundary(mesh: TriMesh, domain=None) -> np.ndarray:
    """Hyperbolic distance from every node to the boundary.

    Exact geodesic edges are used for quadrilaterals with finite vertices;
    otherwise the distance to the nearest boundary node.
    """
    z = mesh.z
    w = disk_to_half_plane_c(z)
    if domain is not None and hasattr(domain, "edges") and not domain.is_ideal:
        out = np.full(len(z), np.inf)
        for e in domain.edges:
            # distance to a geodesic: sinh d = |Im(...)|; evaluate by projection along the carrier
            wb = disk_to_half_plane_c(e.point_at(np.linspace(0.0, 1.0, 2001)))
            for chunk in np.array_split(np.arange(len(z)), max(1, len(z) // 2000)):
                d = half_plane_distance_c(w[chunk, None], wb[None, :]).min(axis=1)
                out[chunk] = np.minimum(out[chunk], d)
        return out
    bw = w[mesh.boundary]
    out = np.empty(len(z))
    for chunk in np.array_split(np.arange(len(z)), max(1, len(z) // 1000)):
        out[chunk] = half_plane_distance_c(w[chunk, None], bw[None, :]).min(axis=1)
    return out


@dataclass
class NonvanishingReport:
    passed: bool
    min_abs_K: float
    location: complex
    n_tested: int
    sign_constant: bool
    max_K: float
    failures: list = field(default_factory=list)   # disk locations with |K| <= floor or K > 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["location"] = [self.location.real, self.location.imag]
        d["failures"] = [[z.real, z.imag] for z in self.failures[:50]]
        d["n_failures"] = len(self.failures)
        return d


def verify_nonvanishing_curvature(u, margin: float = 0.3, floor: float = 1e-8, domain=None) -> NonvanishingReport:
    """K_ext < -floor at every node at hyperbolic distance >= margin from the boundary."""
    jets = as_jets(u)
    mesh = jets.mesh
    dist = distance_to_boundary(mesh, domain if domain is not None else mesh.domain)
    sel = (dist >= margin) & jets.valid
    if not sel.any():
        raise AnalysisError("no nodes beyond the requested margin")
    K = jets.arrays["K"]
    idx = np.flatnonzero(sel)
    k_abs = np.abs(K[idx])
    i = int(idx[np.argmin(k_abs)])
    bad = idx[(K[idx] >= -floor)]
    sign_constant = bool(np.all(K[idx] < 0) or np.all(K[idx] > 0))
    return NonvanishingReport(
        passed=len(bad) == 0, min_abs_K=float(k_abs.min()), location=complex(mesh.z[i]),
        n_tested=int(len(idx)), sign_constant=sign_constant, max_K=float(K[idx].max()),
        failures=[complex(mesh.z[j]) for j in bad])


# ---------------------------------------------------------------------------
# level sets

@dataclass
class Branch:
    points: np.ndarray          # disk chart polyline
    ends: tuple                 # classification of both ends ("closed" for loops)
    keys: list


@dataclass
class LevelSetGraph:
    level: float
    branches: list
    junctions: list             # (location, degree)
    cycle_rank: int             # independent cycles of the segment graph
    flat_triangles: int

    @property
    def closed_loops(self) -> list:
        return [b for b in self.branches if b.ends == ("closed", "closed")]

    def interior_loops(self, mesh: TriMesh) -> int:
        """Cycles that avoid the boundary entirely."""
        return sum(1 for b in self.closed_loops if not any(_key_on_boundary(mesh, k) for k in b.keys))

    def to_dict(self) -> dict:
        return {"level": self.level, "cycle_rank": self.cycle_rank,
                "junctions": [[z.real, z.imag, d] for z, d in self.junctions],
                "branches": [{"ends": list(b.ends), "n_points": len(b.points)} for b in self.branches]}


def corner_nodes(mesh: TriMesh, min_turn_deg: float = 15.0) -> np.ndarray:
    """Boundary nodes where the boundary polyline turns sharply."""
    if "corners" in mesh._cache:
        return mesh._cache["corners"]
    t = mesh.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    es = np.sort(e, axis=1)
    _, inv, cnt = np.unique(es, axis=0, return_inverse=True, return_counts=True)
    bd = e[cnt[inv] == 1]              # oriented boundary edges (counterclockwise)
    nxt = {int(a): int(b) for a, b in bd}
    prv = {int(b): int(a) for a, b in bd}
    z = mesh.z
    out = []
    for i in nxt:
        if i not in prv:
            continue
        d1 = z[i] - z[prv[i]]
        d2 = z[nxt[i]] - z[i]
        turn = abs(math.degrees(math.atan2((np.conj(d1) * d2).imag, (np.conj(d1) * d2).real)))
        if turn > min_turn_deg:
            out.append(i)
    res = np.array(sorted(out), dtype=int)
    mesh._cache["corners"] = res
    mesh._cache["bedges"] = {tuple(sorted((int(a), int(b)))) for a, b in bd}
    return res


def _key_on_boundary(mesh, key) -> bool:
    corner_nodes(mesh)
    if key[0] == "n":
        return bool(mesh.boundary[key[1]])
    return (key[1], key[2]) in mesh._cache["bedges"]


def _classify(mesh, key) -> str:
    corners = set(corner_nodes(mesh).tolist())
    if key[0] == "n":
        if key[1] in corners:
            return "vertex"
        return "boundary" if mesh.boundary[key[1]] else "interior"
    a, b = key[1], key[2]
    if (a, b) in mesh._cache["bedges"]:
        return "vertex" if (a in corners or b in corners) else "boundary"
    return "interior"


def _segments(mesh: TriMesh, vals: np.ndarray, c: float, tol: float):
    s = vals - c
    zero = np.abs(s) <= tol
    sign = np.where(zero, 0, np.sign(s)).astype(int)
    segs = set()
    flat = 0
    for tri in mesh.triangles:
        a, b, d = (int(v) for v in tri)
        sg = (sign[a], sign[b], sign[d])
        nz = sg.count(0)
        if nz == 3:
            flat += 1
            continue
        if nz == 0 and (sg[0] == sg[1] == sg[2]):
            continue
        pts = [("n", v) for v, sv in zip((a, b, d), sg) if sv == 0]
        for p, q in ((a, b), (b, d), (d, a)):
            if sign[p] * sign[q] < 0:
                pts.append(("e", min(p, q), max(p, q)))
        if len(pts) == 2:
            segs.add(tuple(sorted(pts)))
    return segs, flat, s


def _key_point(mesh, s, key) -> complex:
    z = mesh.z
    if key[0] == "n":
        return complex(z[key[1]])
    a, b = key[1], key[2]
    t = s[a] / (s[a] - s[b])
    return complex(z[a] + t * (z[b] - z[a]))


def key_edge_param(s, key):
    """(a, b, t) locating a level-set vertex on the mesh (t = 0 for nodes)."""
    if key[0] == "n":
        return key[1], key[1], 0.0
    a, b = key[1], key[2]
    return a, b, float(s[a] / (s[a] - s[b]))


def extract_level_set(u, c: float, tol: float | None = None) -> LevelSetGraph:
    """Marching-triangles level set ``{u = c}`` of a P1 field.

    Nodes within ``tol`` of the level are level-set vertices themselves, so
    saddles appear as junctions of even degree.
    """
    mesh = u.mesh
    vals = np.asarray(u.values, float)
    if tol is None:
        tol = 1e-9 * max(1.0, abs(c))
    segs, flat, s = _segments(mesh, vals, c, tol)
    adj: dict = {}
    for p, q in segs:
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)
    nodes = list(adj)
    n_comp = _n_components(adj)
    cycle_rank = len(segs) - len(nodes) + n_comp
    breaks = {k for k in nodes if len(adj[k]) != 2}
    used = set()
    branches = []

    def walk(start, nxt):
        path = [start, nxt]
        used.add(frozenset((start, nxt)))
        prev, cur = start, nxt
        while cur not in breaks and cur != start:
            cand = [k for k in adj[cur] if frozenset((cur, k)) not in used]
            if not cand:
                break
            prev, cur = cur, cand[0]
            used.add(frozenset((prev, cur)))
            path.append(cur)
        return path

    for k in sorted(breaks):
        for q in sorted(adj[k]):
            if frozenset((k, q)) in used:
                continue
            path = walk(k, q)
            ends = tuple(_end_label(mesh, adj, x) for x in (path[0], path[-1]))
            branches.append(Branch(np.array([_key_point(mesh, s, x) for x in path]), ends, path))
    for k in sorted(nodes):
        for q in sorted(adj[k]):
            if frozenset((k, q)) in used:
                continue
            path = walk(k, q)
            branches.append(Branch(np.array([_key_point(mesh, s, x) for x in path]), ("closed", "closed"), path))
    junctions = [(_key_point(mesh, s, k), len(adj[k])) for k in sorted(breaks) if len(adj[k]) > 2]
    return LevelSetGraph(float(c), branches, junctions, int(cycle_rank), flat)


def _end_label(mesh, adj, key) -> str:
    if len(adj[key]) > 2:
        return "junction"
    return _classify(mesh, key)


def _n_components(adj: dict) -> int:
    seen = set()
    n = 0
    for k in adj:
        if k in seen:
            continue
        n += 1
        stack = [k]
        seen.add(k)
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    return n


# ---------------------------------------------------------------------------
# theta along nu-level curves

def _edge_jets(jets, a, b, t, z):
    """Jets at points on mesh edges, blending the two nodal quadratics."""
    if isinstance(jets, ExactJetField):
        w = disk_to_half_plane_c(z)
        return np.column_stack(jets.derivatives(w.real, w.imag))
    w = disk_to_half_plane_c(z)
    out = np.zeros((len(z), 6))
    for idx, wt in ((a, 1.0 - t), (b, t)):
        c = jets.coef[idx]
        dx = w.real - jets.w[idx].real
        dy = w.imag - jets.w[idx].imag
        out += wt[:, None] * np.column_stack([
            c[:, 0] + c[:, 1] * dx + c[:, 2] * dy + 0.5 * c[:, 3] * dx * dx + c[:, 4] * dx * dy + 0.5 * c[:, 5] * dy * dy,
            c[:, 1] + c[:, 3] * dx + c[:, 4] * dy,
            c[:, 2] + c[:, 4] * dx + c[:, 5] * dy,
            c[:, 3], c[:, 4], c[:, 5]])
    return out


@dataclass
class NuCurve:
    nu0: float
    z: np.ndarray          # closed polyline, counterclockwise, first point not repeated
    theta: np.ndarray      # continuous theta at the points (not reduced mod 2 pi)
    nu: np.ndarray         # nu of the blended jets at the points
    K: np.ndarray
    nodes: np.ndarray      # nearest mesh node of each point
    center: complex

    @property
    def winding(self) -> float:
        return float(self.theta_closed[-1] - self.theta_closed[0])

    @property
    def theta_closed(self) -> np.ndarray:
        last = self.theta[-1] + _line_step(self.theta[0] - self.theta[-1])
        return np.append(self.theta, last)

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.theta_closed))))

    def crossing(self, phi: float) -> tuple[complex, float]:
        """Point where the curve meets the ray of direction phi from the center, with continuous theta."""
        zc = np.append(self.z, self.z[0])
        arg = np.angle(zc - self.center)
        th = self.theta_closed
        for k in range(len(arg) - 1):
            d0 = _wrap(arg[k] - phi)
            d1 = _wrap(arg[k + 1] - phi)
            if d0 <= 0 < d1 and d1 - d0 < math.pi:
                s = -d0 / (d1 - d0)
                return complex(zc[k] + s * (zc[k + 1] - zc[k])), float(th[k] + s * (th[k + 1] - th[k]))
        raise AnalysisError("curve does not cross the requested ray")

    def theta_at_angle(self, phi: float) -> float:
        return self.crossing(phi)[1]


def _line_step(d):
    """Representative of ``d`` modulo pi in (-pi/2, pi/2]."""
    return -((-np.asarray(d) + 0.5 * math.pi) % math.pi - 0.5 * math.pi)


def trace_nu_curve(jets, frame: FrameContext, nu0: float, center: complex | None = None) -> NuCurve:
    """The closed component of ``{nu = nu0}`` around ``center`` with continuous theta."""
    mesh = jets.mesh
    nu = nu_field(jets)
    if center is None:
        center = complex(mesh.z[frame.seed])
    graph = extract_level_set(nu, nu0, tol=1e-14)
    s = nu.values - nu0
    best = None
    for b in graph.closed_loops:
        zz = b.points[:-1] if abs(b.points[0] - b.points[-1]) < 1e-15 else b.points
        wn = np.sum(_wrap(np.diff(np.angle(np.append(zz, zz[0]) - center)))) / TWO_PI
        if abs(round(wn)) == 1:
            if best is None or len(zz) > len(best[0]):
                best = (zz, b.keys[:len(zz)], wn)
    if best is None:
        raise NotAttained(f"nu = {nu0} has no closed level curve around the center on this mesh")
    zz, keys, wn = best
    if wn < 0:
        zz = zz[::-1]
        keys = keys[::-1]
    params = [key_edge_param(s, k) for k in keys]
    a = np.array([p[0] for p in params])
    b = np.array([p[1] for p in params])
    t = np.array([p[2] for p in params])
    J = _edge_jets(jets, a, b, t, zz)
    w = disk_to_half_plane_c(zz)
    arr = shape_arrays(w.imag, J[:, 1], J[:, 2], J[:, 3], J[:, 4], J[:, 5])
    near = np.where(t < 0.5, a, b)
    raw = arr["theta"]
    th = np.empty(len(zz))
    # first point: sign from the global frame context
    th[0] = frame.theta_at(Jet2(w[0].real, w[0].imag, *J[0]), int(near[0]))
    for k in range(1, len(zz)):
        th[k] = th[k - 1] + _line_step(raw[k] - th[k - 1])
    return NuCurve(nu0, zz, th, arr["nu"], arr["K"], near, center)


@dataclass
class WindingReport:
    nu0: float
    winding: float
    total_variation: float
    per_quadrant: list
    axis_values: dict      # ray angle -> theta reduced to (-pi, pi]
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def _axis_theta(jets, q: complex, th: float) -> float:
    """theta at a symmetry-axis point from a centred refit.

    Reflections across the axes through the center are not affine in the
    half-plane chart, so half-plane fits break the symmetry that pins theta
    there; the centred chart at ``q`` commutes with the reflection fixing ``q``.
    """
    if not isinstance(jets, JetField):
        return th
    try:
        j = fit_jet(jets.u, (q.real, q.imag), scale=jets.scale, chart="centred")
    except CurvatureError:
        return th
    arr = shape_arrays(np.array([j.y]), np.array([j.ux]), np.array([j.uy]),
                       np.array([j.uxx]), np.array([j.uxy]), np.array([j.uyy]))
    return th + float(_line_step(float(arr["theta"][0]) - th))


def theta_winding(u, nu0: float, frame: FrameContext | None = None) -> WindingReport:
    """Variation of theta along ``C_nu0`` (expected 2 pi) with per-quadrant detail."""
    jets = as_jets(u)
    frame = frame or FrameContext(jets)
    curve = trace_nu_curve(jets, frame, nu0)
    rays = [0.0, 0.25 * math.pi, 0.5 * math.pi, 0.75 * math.pi, math.pi, 1.25 * math.pi, 1.5 * math.pi, 1.75 * math.pi]
    vals = {}
    for phi in rays:
        try:
            q, th = curve.crossing(phi)
            vals[phi] = _axis_theta(jets, q, th)
        except AnalysisError:
            vals[phi] = math.nan
    quads = []
    for k in range(4):
        a0, a1 = vals[k * 0.5 * math.pi], vals[((k + 1) % 4) * 0.5 * math.pi]
        d = a1 - a0
        if k == 3:
            d += curve.winding
        quads.append(float(d))
    axis = {f"{phi:.6f}": float(_wrap(v)) for phi, v in vals.items()}
    return WindingReport(nu0, curve.winding, curve.total_variation, quads, axis, len(curve.z))


# ---------------------------------------------------------------------------
# Gauss-map matching

@dataclass
class GaussMatch:
    q: complex
    nu: float
    theta: float
    residual_nu: float
    residual_theta: float
    K: float
    iterations: int

    @property
    def kappa(self) -> float:
        return abs(self.K)


def _nu_theta_at(jets, frame, q: complex, ref_theta: float):
    if abs(q) >= 1.0:
        raise NotAttained("matching left the disk")
    try:
        tri, lam = locate(jets.mesh, (q.real, q.imag))
    except Exception as exc:     # outside the mesh
        raise NotAttained(str(exc)) from exc
    j = jets.jet_at(q, tri, lam)
    arr = shape_arrays(np.array([j.y]), np.array([j.ux]), np.array([j.uy]),
                       np.array([j.uxx]), np.array([j.uxy]), np.array([j.uyy]))
    th = float(arr["theta"][0])
    th = ref_theta + float(_line_step(th - ref_theta))
    return float(arr["nu"][0]), th, float(arr["K"][0])


def match_gauss_map(target_nu: float, target_theta: float, jets, frame: FrameContext | None = None,
                    curve: NuCurve | None = None, tol: float = 1e-4) -> GaussMatch:
    """Point of the (Scherk) field with prescribed ``nu`` and ``theta``."""
    jets = as_jets(jets)
    frame = frame or FrameContext(jets)
    mesh = jets.mesh
    if target_nu >= 1.0 - 1e-12:
        i = frame.seed
        j = jets.node_jet(i)
        K = float(jets.arrays["K"][i])
        return GaussMatch(complex(mesh.z[i]), float(jets.arrays["nu"][i]), math.nan,
                          abs(1.0 - float(jets.arrays["nu"][i])), 0.0, K, 0)
    if not 0.0 < target_nu < 1.0:
        raise ValueError("target nu must lie in (0, 1]")
    curve = curve or trace_nu_curve(jets, frame, target_nu)
    th = curve.theta_closed
    zc = np.append(curve.z, curve.z[0])
    # first segment whose theta range contains target + 2 pi m; the slack catches
    # targets sitting on the seam of a curve whose winding is 2 pi up to round-off
    k0 = None
    for k in range(len(th) - 1):
        lo, hi = sorted(((th[k] - target_theta) / TWO_PI, (th[k + 1] - target_theta) / TWO_PI))
        m = math.ceil(lo - 1e-9)
        if m <= hi + 1e-9:
            k0 = k
            break
    if k0 is None:
        raise NotAttained(f"theta = {target_theta} not reached along C_nu")
    goal = target_theta + TWO_PI * m
    denom = th[k0 + 1] - th[k0]
    s = 0.0 if denom == 0 else min(max((goal - th[k0]) / denom, 0.0), 1.0)
    q = complex(zc[k0] + s * (zc[k0 + 1] - zc[k0]))
    ref = goal
    nu_q, th_q, K_q = _nu_theta_at(jets, frame, q, ref)
    it = 0
    eps = 1e-7
    for it in range(1, 40):
        F = np.array([nu_q - target_nu, th_q - goal])
        if np.max(np.abs(F)) < 1e-11:
            break
        Jm = np.empty((2, 2))
        for col, dq in enumerate((eps, 1j * eps)):
            n1, t1, _ = _nu_theta_at(jets, frame, q + dq, th_q)
            n0, t0, _ = _nu_theta_at(jets, frame, q - dq, th_q)
            Jm[:, col] = [(n1 - n0) / (2 * eps), (t1 - t0) / (2 * eps)]
        try:
            step = np.linalg.solve(Jm, -F)
        except np.linalg.LinAlgError:
            break
        lam_ = 1.0
        base = np.max(np.abs(F))
        while lam_ > 1e-4:
            qn = q + lam_ * complex(step[0], step[1])
            try:
                nn, tn, Kn = _nu_theta_at(jets, frame, qn, th_q)
                if max(abs(nn - target_nu), abs(tn - goal)) < base:
                    break
            except NotAttained:
                pass
            lam_ *= 0.5
        else:
            break
        q, nu_q, th_q, K_q = qn, nn, tn, Kn
    r_nu = abs(nu_q - target_nu)
    r_th = abs(float(_wrap(th_q - target_theta)))
    if max(r_nu, r_th) >= tol:
        raise NotAttained(f"matching residuals {r_nu:.2e}, {r_th:.2e} exceed {tol}")
    return GaussMatch(q, nu_q, float(th_q % TWO_PI), r_nu, r_th, K_q, it)


# ---------------------------------------------------------------------------
# the curvature comparison

@dataclass
class ReferenceField:
    label: str
    jets: object
    frame: FrameContext
    curves: dict = field(default_factory=dict)

    def curve(self, nu0: float) -> NuCurve:
        key = round(nu0, 12)
        if key not in self.curves:
            self.curves[key] = trace_nu_curve(self.jets, self.frame, nu0)
        return self.curves[key]

    def match(self, nu0: float, theta0: float) -> GaussMatch:
        curve = None if nu0 >= 1.0 - 1e-12 else self.curve(nu0)
        return match_gauss_map(nu0, theta0, self.jets, self.frame, curve)


@dataclass
class ScherkReference:
    """Approximations of the ideal Scherk graph used to evaluate kappa.

    ``ladder`` holds fields at increasing caps on the primary mesh (last is
    the primary field); ``coarse`` is the top cap on a coarser mesh.
    """
    ladder: list
    coarse: ReferenceField | None = None
    meta: dict = field(default_factory=dict)

    @property
    def primary(self) -> ReferenceField:
        return self.ladder[-1]

    def kappa(self, nu0: float, theta0: float) -> tuple[float, float, GaussMatch]:
        """``(kappa, uncertainty, match)`` at the Gauss-map value ``(nu0, theta0)``."""
        main = self.primary.match(nu0, theta0)
        k = [r.match(nu0, theta0).kappa for r in self.ladder[:-1]] + [main.kappa]
        unc = cap_uncertainty(k)
        if self.coarse is not None:
            kc = self.coarse.match(nu0, theta0).kappa
            unc += abs(main.kappa - kc)
        return main.kappa, unc, main


def cap_uncertainty(values) -> float:
    """Tail estimate for a sequence indexed by doubling caps: twice the last increment.

    At fixed mesh size the capped discrete solutions drift slowly (roughly
    logarithmically) in the cap, so increments do not contract geometrically
    and a geometric tail would be ill-conditioned as the ratio nears one.
    """
    v = [float(x) for x in values]
    if len(v) < 2:
        return 0.0
    return 2.0 * abs(v[-1] - v[-2])


def build_scherk_reference(h: float = 0.01, caps=(4.0, 8.0, 16.0), coarse_h: float | None = 0.014,
                           truncation_delta: float = 0.02, solver_cfg=None,
                           patch_scale: float = SCHERK_PATCH_SCALE) -> ScherkReference:
    from .meshing import RefinementConfig
    from .solver import SolverConfig, solve_scherk
    cfg = solver_cfg or SolverConfig()
    top = max(caps)
    mcfg = RefinementConfig(h=h, truncation_delta=truncation_delta)
    _, rep, per = solve_scherk(math.inf, top, SolverConfig(cfg.tol, cfg.max_iter, cfg.damping,
                                                           tuple(sorted(set(caps) | {1.0, 2.0})), cfg.armijo),
                               mesh_cfg=mcfg)
    ladder = []
    for T in sorted(caps):
        jets = JetField(per[T], scale=patch_scale)
        ladder.append(ReferenceField(f"h={h},T={T:g}", jets, FrameContext(jets)))
    coarse = None
    if coarse_h:
        sol, _, _ = solve_scherk(math.inf, top, cfg, mesh_cfg=RefinementConfig(h=coarse_h, truncation_delta=truncation_delta))
        jets = JetField(sol, scale=patch_scale)
        coarse = ReferenceField(f"h={coarse_h},T={top:g}", jets, FrameContext(jets))
    meta = {"h": h, "caps": list(map(float, sorted(caps))), "coarse_h": coarse_h,
            "truncation_delta": truncation_delta, "iterations": rep.iterations,
            "final_grad_norm": rep.final_grad_norm, "n_nodes": int(ladder[-1].jets.mesh.n_nodes)}
    return ScherkReference(ladder, coarse, meta)


@dataclass
class BoundComparison:
    label: str
    p: complex                 # half-plane point of the entire graph
    nu: float
    theta: float
    q: complex                 # matched point on the Scherk approximation (disk chart)
    abs_K: float
    kappa: float
    margin: float
    uncertainty: float
    residual_nu: float
    residual_theta: float

    @property
    def passed(self) -> bool:
        return self.margin > self.uncertainty

    def row(self) -> dict:
        return {"label": self.label, "px": self.p.real, "py": self.p.imag, "nu": self.nu,
                "theta": self.theta, "q1": self.q.real, "q2": self.q.imag, "abs_K": self.abs_K,
                "kappa": self.kappa, "margin": self.margin, "uncertainty": self.uncertainty,
                "residual_nu": self.residual_nu, "residual_theta": self.residual_theta,
                "passed": self.passed}


def nu_window(nu_min: float, nu_max: float = 1.0, n: int = 20,
              lo: float = 0.2, hi: float = 0.95, hi_fallback: float = 0.99) -> np.ndarray:
    """Deterministic grid of nu values attained by a family.

    The grid covers ``[lo, hi]`` intersected with the attained range; for
    families that only reach nu above ``hi`` it extends up to ``hi_fallback``.
    """
    a = max(lo, nu_min + 1e-3)
    b = min(hi, nu_max - 1e-3)
    if b - a < 0.05:
        b = min(hi_fallback, nu_max - 1e-3)
    if b <= a:
        raise NotAttained("family attains no nu in the tested window")
    return np.linspace(a, b, n)


def linear_family_samples(a: float, n: int = 20) -> list:
    """Points (0, y) of ``u = a x`` with nu on a fixed grid: nu = 1/sqrt(1 + a^2 y^2)."""
    out = []
    for nu in nu_window(0.0, 1.0, n):
        y = math.sqrt(1.0 / (nu * nu) - 1.0) / a
        out.append(Jet2(0.0, y, 0.0, a, 0.0, 0.0, 0.0, 0.0))
    return out


def vt_family_samples(graph, n: int = 10) -> list:
    """Points of ``v_t`` on both sides of gamma with nu on a fixed grid, plus a point on gamma."""
    def nu_of(alpha):
        s = math.sin(alpha)
        g = s * float(graph.df(alpha))
        return 1.0 / math.sqrt(1.0 + g * g)
    nu_g = graph.nu_on_gamma()
    out = []
    for nu in nu_window(nu_g, 1.0, n):
        al = brentq(lambda a: nu_of(a) - nu, 1e-12, 0.5 * math.pi)
        for alpha in (al, math.pi - al):
            out.append(graph.jet(math.cos(alpha), math.sin(alpha)))
    if 0.2 <= nu_g:
        out.append(graph.jet(0.0, 1.0))
    return out


def jet_gauss_data(j: Jet2) -> tuple[float, float, float]:
    """(nu, theta, |K|) of a single jet with the default frame sign."""
    from .curvature import shape_data
    sd = shape_data(j)
    return sd.nu, sd.theta, abs(sd.K_ext)


def curvature_bound_check(samples, reference: ScherkReference, label: str = "") -> list:
    """Compare |K_ext| at the samples with kappa at the matched Scherk points."""
    out = []
    for j in samples:
        nu, th, k_abs = jet_gauss_data(j)
        kappa, unc, m = reference.kappa(nu, th)
        out.append(BoundComparison(label, complex(j.x, j.y), nu, th, m.q, k_abs, kappa,
                                   kappa - k_abs, unc, m.residual_nu, m.residual_theta))
    return out


@dataclass
class SharpnessRow:
    n: float
    nu: float
    theta: float
    abs_K: float
    kappa: float
    margin: float
    uncertainty: float     # of kappa, from the reference


def sharpness_study(fields: dict, reference: ScherkReference, targets) -> list:
    """Margins ``kappa - |K_{u_n}|`` at fixed Gauss-map targets for each ``u_n``.

    ``fields`` maps n to a ScalarField (or jet field) of ``u_n``.
    """
    rows = []
    kap = {}
    for nu0, th0 in targets:
        k, unc, _ = reference.kappa(nu0, th0)
        kap[(nu0, th0)] = (k, unc)
    for n in sorted(fields):
        f = fields[n]
        jets = JetField(f, scale=SCHERK_PATCH_SCALE) if isinstance(f, ScalarField) else as_jets(f)
        ref = ReferenceField(f"u_{n:g}", jets, FrameContext(jets))
        for nu0, th0 in targets:
            m = ref.match(nu0, th0)
            k, unc = kap[(nu0, th0)]
            rows.append(SharpnessRow(float(n), nu0, th0, m.kappa, k, k - m.kappa, unc))
    return rows


def margins_by_target(rows: list) -> dict:
    """``{(nu, theta): [margin for increasing n]}``."""
    out: dict = {}
    for r in sorted(rows, key=lambda r: r.n):
        out.setdefault((r.nu, r.theta), []).append(r.margin)
    return out


# ---------------------------------------------------------------------------
# symmetry of Scherk solutions

def node_permutation(mesh: TriMesh, f) -> np.ndarray:
    """Index map i -> j with node j = f(node i) (exact coordinate keys)."""
    key = {tuple(k): i for i, k in enumerate(np.round(mesh.nodes * 1e12).astype(np.int64))}
    img = f(mesh.z)
    keys = np.round(np.column_stack([img.real, img.imag]) * 1e12).astype(np.int64)
    try:
        return np.array([key[tuple(k)] for k in keys])
    except KeyError as exc:
        raise AnalysisError("mesh is not invariant under the map") from exc


def symmetry_residuals(u: ScalarField) -> dict:
    """Odd under (x1,x2) -> (x2,x1), even under (x1,x2) -> (-x1,x2) and (x1,-x2)."""
    m = u.mesh
    v = u.values
    swap = node_permutation(m, lambda z: 1j * np.conj(z))
    mir1 = node_permutation(m, lambda z: -np.conj(z))
    mir2 = node_permutation(m, np.conj)
    return {"odd_swap": float(np.abs(v + v[swap]).max()),
            "even_x1": float(np.abs(v - v[mir1]).max()),
            "even_x2": float(np.abs(v - v[mir2]).max())}


# ---------------------------------------------------------------------------
# reports

@dataclass
class Check:
    name: str
    passed: bool
    value: object
    tolerance: object
    details: object = None


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def verification_report(checks: list, meta: dict) -> dict:
    return {"passed": all(c.passed for c in checks), "checks": [_jsonable(asdict(c)) for c in checks],
            "solution_meta": _jsonable(meta)}


def dump_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def scherk_suite(u: ScalarField, margin: float = 0.3, nus=(0.3, 0.6, 0.9)) -> list:
    """Checks of the structural statements on a symmetric Scherk solution."""
    jets = JetField(u, scale=SCHERK_PATCH_SCALE) if isinstance(u, ScalarField) else as_jets(u)
    checks = []
    crit = find_critical_points(jets)
    center_ok = crit.count == 1 and _within_cell(jets.mesh, crit.points[0], 0j)
    checks.append(Check("u_critical_points", bool(center_ok), crit.count, 1, crit.to_dict()))
    ncrit = nu_critical_points(jets, u_report=crit)
    ok = ncrit.count == 1 and bool(ncrit.coincides) and _within_cell(jets.mesh, ncrit.points[0], 0j)
    checks.append(Check("nu_critical_points", bool(ok), ncrit.count, 1, ncrit.to_dict()))
    nv = verify_nonvanishing_curvature(jets, margin)
    checks.append(Check("nonvanishing_curvature", nv.passed, nv.min_abs_K, 1e-8, nv.to_dict()))
    try:
        sym = symmetry_residuals(u)
        checks.append(Check("symmetry", max(sym.values()) < 1e-8, max(sym.values()), 1e-8, sym))
    except AnalysisError as exc:
        checks.append(Check("symmetry", False, None, 1e-8, str(exc)))
    zero = extract_level_set(u, 0.0)
    interior_loops = zero.interior_loops(u.mesh)
    ends_ok = all(e in ("vertex", "junction") for b in zero.branches for e in b.ends)
    checks.append(Check("zero_level_set", bool(interior_loops == 0 and ends_ok), len(zero.branches), 4,
                        zero.to_dict()))
    frame = FrameContext(jets)
    for nu0 in nus:
        try:
            w = theta_winding(jets, nu0, frame)
            checks.append(Check(f"theta_winding_nu{nu0:g}", abs(abs(w.winding) - TWO_PI) < 0.05,
                                w.winding, 0.05, w.to_dict()))
        except AnalysisError as exc:
            checks.append(Check(f"theta_winding_nu{nu0:g}", False, None, 0.05, str(exc)))
    return checks


def curvature_suite(u, margin: float = 0.3) -> list:
    nv = verify_nonvanishing_curvature(u, margin)
    return [Check("nonvanishing_curvature", nv.passed, nv.min_abs_K, 1e-8, nv.to_dict())]


def _within_cell(mesh, p: CriticalPoint, z0: complex) -> bool:
    d = half_plane_distance_c(disk_to_half_plane_c(p.location), disk_to_half_plane_c(z0))
    return bool(d <= hyperbolic_mesh_size(mesh)[p.node] + 1e-12)


SUITES = {"scherk": scherk_suite, "curvature": curvature_suite}
