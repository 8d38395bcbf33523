"""Second-order jets and the extrinsic geometry of vertical graphs in H^2 x R.

All formulas are in the half-plane chart ``{(x, y): y > 0}`` with metric
``(dx^2 + dy^2)/y^2 + dt^2``.  Two independent routes to the principal frame
are provided:

* :func:`principal_frame` moves the jet to ``(0, 1)`` with ``u_y = 0`` by an
  isometry and solves the 2x2 eigen-system written in terms of ``u_yy`` and
  ``T_u = u_xy + u_x``;
* :func:`shape_arrays` diagonalises the second fundamental form directly in
  a Gram-Schmidt frame at the base point (vectorised, used on whole meshes).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .hypgeom import (
    MobiusIsometry, ModelPoint, compose, conformal_factor, disk_to_half_plane_c,
    half_plane_distance_c, half_plane_to_disk_jacobian_c, isometry_taking, to_disk,
)


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True)
class Jet2:
    x: float
    y: float
    u: float = 0.0
    ux: float = 0.0
    uy: float = 0.0
    uxx: float = 0.0
    uxy: float = 0.0
    uyy: float = 0.0

    def __post_init__(self):
        if not self.y > 0:
            raise CurvatureError("jet base must lie in the upper half-plane")

    @property
    def W(self) -> float:
        return math.sqrt(1.0 + self.y * self.y * (self.ux * self.ux + self.uy * self.uy))

    @property
    def T(self) -> float:
        """``T_u = u_xy + u_x`` (meaningful at y = 1)."""
        return self.uxy + self.ux

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.ux, self.uy, self.uxx, self.uxy, self.uyy])

    def taylor(self, x, y):
        dx, dy = x - self.x, y - self.y
        return (self.u + self.ux * dx + self.uy * dy
                + 0.5 * self.uxx * dx * dx + self.uxy * dx * dy + 0.5 * self.uyy * dy * dy)


@dataclass(frozen=True)
class ShapeData:
    W: float
    nu: float
    L: float
    M: float
    N2: float
    K_ext: float
    k1: float
    dir1: tuple
    dir2: tuple
    theta: float
    normal: tuple


# ---------------------------------------------------------------------------
# closed-form quantities

def unit_normal(j: Jet2) -> np.ndarray:
    """Upward unit normal, components along (d/dx, d/dy, d/dt)."""
    y2 = j.y * j.y
    return np.array([-y2 * j.ux, -y2 * j.uy, 1.0]) / j.W


def second_fundamental_form(j: Jet2):
    """Raw coefficients <nabla_{F_a} F_b, N>, orthonormal-frame coefficients and N.

    The orthonormal frame is ``E1 = F_x/|F_x|`` and the Gram-Schmidt
    completion ``E2`` of ``F_y``; it equals ``{F_x/|F_x|, F_y/|F_y|}`` when
    ``u_x u_y = 0``.
    """
    y, W = j.y, j.W
    raw = ((y * j.uxx - j.uy) / (y * W),
           (y * j.uxy + j.ux) / (y * W),
           (y * j.uyy + j.uy) / (y * W))
    B = _frame_coefficients(y, j.ux, j.uy, *raw)
    return raw, B[:3], unit_normal(j)


def extrinsic_curvature(j: Jet2) -> float:
    y = j.y
    W2 = 1.0 + y * y * (j.ux * j.ux + j.uy * j.uy)
    return (y * y / (W2 * W2)) * ((y * j.uxx - j.uy) * (y * j.uyy + j.uy) - (y * j.uxy + j.ux) ** 2)


def minimal_defect(j: Jet2) -> float:
    y = j.y
    return ((1 + y * y * j.ux ** 2) * j.uyy + (1 + y * y * j.uy ** 2) * j.uxx
            - 2 * y * y * j.ux * j.uy * j.uxy - y * j.uy * (j.ux ** 2 + j.uy ** 2))


def normalized_curvature_at_p(j: Jet2, tol: float = 1e-6):
    """``(K_ext, k1, T_u, defect)`` at ``p = (0, 1)`` for a jet with ``u_y = 0``.

    ``defect = u_xx + W^2 u_yy`` must vanish for minimal jets.
    """
    if abs(j.x) > 1e-12 or abs(j.y - 1.0) > 1e-12:
        raise CurvatureError("jet must be based at (0, 1)")
    if abs(j.uy) > 1e-9 * max(1.0, abs(j.ux)):
        raise CurvatureError("jet must satisfy u_y = 0")
    W2 = 1.0 + j.ux * j.ux
    defect = j.uxx + W2 * j.uyy
    if abs(defect) > tol:
        raise CurvatureError(f"jet violates u_xx = -W^2 u_yy (defect {defect:.3e})")
    T = j.T
    K = -(W2 * j.uyy ** 2 + T * T) / (W2 * W2)
    return K, math.sqrt(-K), T, defect


# ---------------------------------------------------------------------------
# jet transport by isometries

def _pullback(c, d1: complex, d2: complex) -> np.ndarray:
    """Derivatives of ``U o psi`` from those of ``U`` (``c`` = u, u_x, u_y, u_xx, u_xy, u_yy).

    ``psi`` is holomorphic with ``psi' = d1`` and ``psi'' = d2`` at the point.
    """
    p_, q_ = d1.real, d1.imag
    r, s = d2.real, d2.imag
    J = np.array([[p_, -q_], [q_, p_]])          # J[a, i] = d psi^a / d x_i
    H = np.array([[c[3], c[4]], [c[4], c[5]]])
    g = np.array([c[1], c[2]])
    grad = J.T @ g
    hess = J.T @ H @ J
    # second derivatives of psi: d_xx = (r, s), d_xy = (-s, r), d_yy = (-r, -s)
    return np.array([c[0], grad[0], grad[1],
                     hess[0, 0] + g @ np.array([r, s]),
                     hess[0, 1] + g @ np.array([-s, r]),
                     hess[1, 1] + g @ np.array([-r, -s])])


def _pullback_holomorphic(j: Jet2, psi: MobiusIsometry, q: complex) -> Jet2:
    """Jet of ``u o psi`` at ``q`` where ``psi`` is holomorphic and ``psi(q)`` is the base of ``j``."""
    c = _pullback(j.as_array(), complex(psi.derivative(q)), complex(psi.second_derivative(q)))
    return Jet2(q.real, q.imag, *c)


def transport_jet(j: Jet2, m: MobiusIsometry) -> Jet2:
    """Jet of ``u o m^{-1}`` at ``m(base)``: the graph moved by the isometry ``m``."""
    w = complex(j.x, j.y)
    q = complex(m(w))
    psi = m.inverse()
    if not psi.reflect:
        return _pullback_holomorphic(j, MobiusIsometry(psi.a, psi.b, psi.c, psi.d), q)
    # psi = M o R with R(x, y) = (-x, y): pull back through M at R(q), then R
    Mh = MobiusIsometry(psi.a, psi.b, psi.c, psi.d)
    rq = complex(-q.real, q.imag)
    jm = _pullback_holomorphic(j, Mh, rq)
    return Jet2(q.real, q.imag, jm.u, -jm.ux, jm.uy, jm.uxx, -jm.uxy, jm.uyy)


def normalize_jet(j: Jet2) -> tuple[Jet2, MobiusIsometry]:
    """Move the base to (0, 1) and rotate about it so that ``u_y = 0``, ``u_x >= 0``."""
    m = isometry_taking(ModelPoint.half_plane(j.x, j.y))
    jt = transport_jet(j, m)
    phi = -math.atan2(jt.uy, jt.ux) if (jt.ux or jt.uy) else 0.0
    # transporting by a rotation about i rotates the gradient by the same angle
    rot = MobiusIsometry.rotation_about_i(phi)
    m = compose(rot, m)
    jn = transport_jet(j, m)
    return Jet2(0.0, 1.0, jn.u, jn.ux, 0.0, jn.uxx, jn.uxy, jn.uyy), m


# ---------------------------------------------------------------------------
# principal frames

@dataclass(frozen=True)
class PrincipalFrame:
    k1: float
    dir1: tuple           # (a, b) in the {X, Y} basis at the normalised point
    dir2: tuple
    V1: np.ndarray        # tangent vectors at the original base (dx, dy, dt)
    V2: np.ndarray


def normalised_principal_direction(W: float, uyy: float, T: float, k1: float) -> tuple[float, float]:
    """Unit solution (a, b) of  b T = (W^2 k1 + W u_yy) a,  a T = (W^2 k1 - W u_yy) b."""
    c1 = np.array([T, W * W * k1 + W * uyy])
    c2 = np.array([W * W * k1 - W * uyy, T])
    v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    n = np.linalg.norm(v)
    if n == 0:
        raise CurvatureError("umbilic point: no canonical principal frame")
    return float(v[0] / n), float(v[1] / n)


def principal_frame(j: Jet2, tol: float = 1e-6) -> PrincipalFrame:
    jn, m = normalize_jet(j)
    K, k1, T, _ = normalized_curvature_at_p(jn, tol)
    if k1 <= 1e-14:
        raise CurvatureError("umbilic point: no canonical principal frame")
    W = jn.W
    a, b = normalised_principal_direction(W, jn.uyy, T, k1)
    dir1 = (a, b)
    dir2 = (-b, a)
    # X = (1, 0, u_x)/W and Y = (0, 1, 0) at (0, 1); pull back by m^{-1}
    X = np.array([1.0, 0.0, jn.ux]) / W
    Y = np.array([0.0, 1.0, 0.0])
    inv = m.inverse()
    V1 = _push_tangent(inv, complex(0.0, 1.0), a * X + b * Y)
    V2 = _push_tangent(inv, complex(0.0, 1.0), -b * X + a * Y)
    return PrincipalFrame(k1, dir1, dir2, V1, V2)


def _push_tangent(m: MobiusIsometry, w: complex, v: np.ndarray) -> np.ndarray:
    """Differential of ``m x id_R`` applied to the tangent vector ``v`` at ``w``."""
    dx, dy = v[0], v[1]
    if m.reflect:
        w = complex(-w.real, w.imag)
        dx = -dx
    d = complex(MobiusIsometry(m.a, m.b, m.c, m.d).derivative(w)) * complex(dx, dy)
    return np.array([d.real, d.imag, v[2]])


def theta_from_frame(V1: np.ndarray, V2: np.ndarray) -> float:
    """Oriented angle from V2 to the tangential part of d/dt, in [0, 2 pi)."""
    return math.atan2(-V1[2], V2[2]) % (2.0 * math.pi)


def theta(j: Jet2, reference: complex | None = None) -> float:
    """Frame angle at a single point.

    The sign of the principal frame is fixed by ``reference``: V1 is chosen
    so that its disk-chart projection has nonnegative inner product with it
    (default: the positive x1 direction).
    """
    nu = 1.0 / j.W
    if not 0.0 < nu < 1.0:
        raise CurvatureError("theta undefined where the tangent plane is horizontal or vertical")
    fr = principal_frame(j)
    V1, V2 = fr.V1, fr.V2
    ref = 1.0 + 0j if reference is None else reference
    d = _disk_direction(np.array([j.x + 1j * j.y]), np.array([V1[0]]), np.array([V1[1]]))[0]
    if (np.conj(ref) * d).real < 0:
        V1, V2 = -V1, -V2
    return theta_from_frame(V1, V2)


def shape_data(j: Jet2, reference: complex | None = None) -> ShapeData:
    arr = shape_arrays(np.array([j.y]), np.array([j.ux]), np.array([j.uy]),
                       np.array([j.uxx]), np.array([j.uxy]), np.array([j.uyy]))
    th = arr["theta"][0]
    V1, V2 = arr["V1"][0], arr["V2"][0]
    d = _disk_direction(np.array([j.x + 1j * j.y]), V1[:1], V1[1:2])[0]
    ref = 1.0 + 0j if reference is None else reference
    if (np.conj(ref) * d).real < 0:
        V1, V2 = -V1, -V2
        th = (th + math.pi) % (2 * math.pi)
    # directions in the orthonormal frame {E1, E2}
    c, s = math.cos(arr["phi"][0]), math.sin(arr["phi"][0])
    sgn = 1.0 if np.allclose(V1, arr["V1"][0]) else -1.0
    return ShapeData(
        W=float(arr["W"][0]), nu=float(arr["nu"][0]),
        L=float(arr["B11"][0]), M=float(arr["B12"][0]), N2=float(arr["B22"][0]),
        K_ext=float(arr["K"][0]), k1=float(arr["k1"][0]),
        dir1=(sgn * c, sgn * s), dir2=(-sgn * s, sgn * c), theta=float(th),
        normal=tuple(unit_normal(j)))


# ---------------------------------------------------------------------------
# vectorised direct route

def _frame_coefficients(y, ux, uy, h11, h12, h22):
    a = np.sqrt(1.0 / (y * y) + ux * ux)
    c = ux * uy / a
    b = np.sqrt(1.0 / (y * y) + uy * uy - c * c)
    r = c / a
    B11 = h11 / (a * a)
    B12 = (h12 - r * h11) / (a * b)
    B22 = (h22 - 2.0 * r * h12 + r * r * h11) / (b * b)
    return B11, B12, B22, a, b, c


def shape_arrays(y, ux, uy, uxx, uxy, uyy) -> dict:
    """Shape quantities for many jets at once (all arguments are arrays)."""
    y = np.asarray(y, float)
    W = np.sqrt(1.0 + y * y * (ux * ux + uy * uy))
    h11 = (y * uxx - uy) / (y * W)
    h12 = (y * uxy + ux) / (y * W)
    h22 = (y * uyy + uy) / (y * W)
    B11, B12, B22, a, b, c = _frame_coefficients(y, ux, uy, h11, h12, h22)
    K = (y * y / W ** 4) * ((y * uxx - uy) * (y * uyy + uy) - (y * uxy + ux) ** 2)
    half = 0.5 * (B11 - B22)
    rad = np.sqrt(half * half + B12 * B12)
    k_plus = 0.5 * (B11 + B22) + rad
    phi = 0.5 * np.arctan2(2.0 * B12, B11 - B22)
    cph, sph = np.cos(phi), np.sin(phi)
    zero = np.zeros_like(y)
    E1 = np.stack([1.0 / a, zero, ux / a], axis=-1)
    E2 = np.stack([-c / (a * b), 1.0 / b, (uy - c * ux / a) / b], axis=-1)
    V1 = cph[:, None] * E1 + sph[:, None] * E2
    V2 = -sph[:, None] * E1 + cph[:, None] * E2
    th = np.arctan2(-V1[:, 2], V2[:, 2]) % (2.0 * np.pi)
    return dict(W=W, nu=1.0 / W, K=K, k1=np.sqrt(np.maximum(-K, 0.0)), k_plus=k_plus,
                B11=B11, B12=B12, B22=B22, phi=phi, V1=V1, V2=V2, theta=th, umbilic_gap=rad)


def _disk_direction(w, dx, dy):
    """Disk-chart image of horizontal half-plane vectors (dx, dy) at points w."""
    return half_plane_to_disk_jacobian_c(w) * (dx + 1j * dy)


# ---------------------------------------------------------------------------
# jets from discrete fields

DEFAULT_PATCH_SCALE = 10.0


def _design(dx, dy, degree: int = 2):
    cols = [np.ones_like(dx), dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy]
    if degree >= 3:
        cols += [dx ** 3, dx * dx * dy, dx * dy * dy, dy ** 3]
    return np.column_stack(cols)


def _fit(wp: complex, wn: np.ndarray, vals: np.ndarray, hloc: float, degree: int = 2) -> np.ndarray:
    """Weighted polynomial fit about ``wp`` in half-plane coordinates; returns the 2-jet."""
    dx = wn.real - wp.real
    dy = wn.imag - wp.imag
    A = _design(dx, dy, degree)
    wts = 1.0 / (np.hypot(dx, dy) + hloc)
    # fitting deviations from the mean keeps a constant field exactly flat
    c0 = float(np.mean(vals))
    sol, _, rank, _ = np.linalg.lstsq(A * wts[:, None], (vals - c0) * wts, rcond=None)
    if rank < A.shape[1]:
        raise CurvatureError("rank-deficient patch for the polynomial fit")
    sol[0] += c0
    return sol[:6]


def _fit_centred(zp: complex, zn: np.ndarray, vals: np.ndarray, hyp: float, degree: int = 2) -> np.ndarray:
    """Fit in the disk chart recentred at ``zp``, then pull back to half-plane derivatives.

    The recentring isometry carries the hyperbolic metric at ``zp`` to a
    multiple of the Euclidean one, so the fit commutes with every isometry
    fixing ``zp`` (rotations and reflections about it).
    """
    s = 1.0 - abs(zp) ** 2
    zeta = (zn - zp) / (1.0 - np.conj(zp) * zn)
    c = _fit(0j, zeta, vals, 0.5 * hyp, degree)
    wp = complex(disk_to_half_plane_c(zp))
    g1 = -2j / (1j + wp) ** 2
    g2 = 4j / (1j + wp) ** 3
    p1 = 1.0 / s
    p2 = 2.0 * np.conj(zp) / s ** 2
    return _pullback(c, complex(p1 * g1), complex(p2 * g1 * g1 + p1 * g2))


FIT_CHARTS = ("half-plane", "centred")


def _node_tree(mesh):
    if "node_tree" not in mesh._cache:
        from scipy.spatial import cKDTree
        mesh._cache["node_tree"] = cKDTree(mesh.nodes)
    return mesh._cache["node_tree"]


def _hyperbolic_size(mesh) -> np.ndarray:
    if "hyp_size" not in mesh._cache:
        mesh._cache["hyp_size"] = mesh.local_size() * conformal_factor(mesh.z)
    return mesh._cache["hyp_size"]


def _half_plane_nodes(mesh) -> np.ndarray:
    if "w_nodes" not in mesh._cache:
        mesh._cache["w_nodes"] = disk_to_half_plane_c(mesh.z)
    return mesh._cache["w_nodes"]


def fitting_patch(mesh, zp: complex, anchor: int, scale: float = DEFAULT_PATCH_SCALE,
                  depth: int = 2) -> np.ndarray:
    """Nodes used to fit the jet at ``zp``.

    The two-ring of ``anchor`` enlarged to the hyperbolic ball of radius
    ``scale`` times the local hyperbolic mesh size.  Second derivatives of
    a piecewise-linear field carry O(h^2 / r^2) noise on a patch of radius
    r, so a two-ring alone does not converge.
    """
    ring = mesh.ring(anchor, depth)
    if scale <= 0:
        return ring
    R = scale * _hyperbolic_size(mesh)[anchor]
    c, rho = _euclidean_ball(zp, R)
    cand = _node_tree(mesh).query_ball_point([c.real, c.imag], rho)
    return _patch_from_candidates(mesh, ring, cand, zp, R)


def _euclidean_ball(zp, R):
    """Centre and radius (disk chart) of the hyperbolic ball of radius ``R`` about ``zp``."""
    t2 = np.tanh(np.asarray(R) / 2.0) ** 2
    a2 = np.abs(zp) ** 2
    den = 1.0 - t2 * a2
    return zp * (1.0 - t2) / den, np.sqrt(t2) * (1.0 - a2) / den + 1e-12


def _patch_from_candidates(mesh, ring, cand, zp, R) -> np.ndarray:
    cand = np.array(cand, dtype=np.intp)
    wp = complex(disk_to_half_plane_c(zp))
    d = half_plane_distance_c(_half_plane_nodes(mesh)[cand], wp)
    return np.union1d(ring, cand[d <= R])


def fit_jet(u, p, scale: float = DEFAULT_PATCH_SCALE, depth: int = 2, degree: int = 2,
            chart: str = "half-plane") -> Jet2:
    """Weighted least-squares quadratic fit of ``u`` in half-plane coordinates.

    ``p`` is a node index, a :class:`ModelPoint`, or a disk-chart pair.
    Weights are ``1/(d + h)`` with ``d`` the chart distance to ``p`` and ``h``
    the local mesh size in the chart.  ``degree=3`` adds cubic terms, which
    lowers the truncation error on one-sided patches.  ``scale=0`` restricts the patch to the
    plain two-ring.
    """
    mesh = u.mesh
    if isinstance(p, (int, np.integer)):
        anchor = int(p)
        zp = complex(*mesh.nodes[anchor])
    else:
        from .meshing import locate
        zp = to_disk(p).z if isinstance(p, ModelPoint) else complex(*p)
        t, lam = locate(mesh, (zp.real, zp.imag))
        anchor = int(mesh.triangles[t][np.argmax(lam)])
    patch = fitting_patch(mesh, zp, anchor, scale, depth)
    if len(patch) < (6 if degree < 3 else 10):
        raise CurvatureError("too few nodes in the fitting patch")
    wp = complex(disk_to_half_plane_c(zp))
    hyp = _hyperbolic_size(mesh)[anchor]
    if chart == "centred":
        c = _fit_centred(zp, mesh.z[patch], u.values[patch], hyp, degree)
    elif chart == "half-plane":
        c = _fit(wp, disk_to_half_plane_c(mesh.z[patch]), u.values[patch], hyp * wp.imag, degree)
    else:
        raise ValueError(f"chart must be one of {FIT_CHARTS}")
    return Jet2(wp.real, wp.imag, *c)


class JetField:
    """Nodal jets of a discrete field and their barycentric blending.

    Each node carries the quadratic fitted on its patch; at an arbitrary
    point the derivatives of the three quadratics of the containing triangle
    are evaluated there and blended with the barycentric weights, which
    gives a continuous jet field.  ``nodes`` restricts the fits to a subset.
    """

    def __init__(self, u, scale: float = DEFAULT_PATCH_SCALE, nodes=None, depth: int = 2, degree: int = 2,
                 chart: str = "half-plane"):
        if chart not in FIT_CHARTS:
            raise ValueError(f"chart must be one of {FIT_CHARTS}")
        self.u = u
        self.chart = chart
        self.degree = degree
        mesh = u.mesh
        self.mesh = mesh
        self.scale = scale
        self.w = disk_to_half_plane_c(mesh.z)
        n = mesh.n_nodes
        todo = np.arange(n) if nodes is None else np.asarray(nodes, dtype=int)
        coef = np.full((n, 6), np.nan)
        hyp = _hyperbolic_size(mesh)
        z = mesh.z
        if scale > 0:
            # one batched neighbour query instead of one per node
            R = scale * hyp[todo]
            c, rho = _euclidean_ball(z[todo], R)
            cands = _node_tree(mesh).query_ball_point(np.column_stack([c.real, c.imag]), rho, workers=-1)
        for k, i in enumerate(todo):
            if scale > 0:
                patch = _patch_from_candidates(mesh, mesh.ring(int(i), depth), cands[k], z[i], R[k])
            else:
                patch = mesh.ring(int(i), depth)
            if len(patch) < (6 if degree < 3 else 10):
                continue
            try:
                if chart == "centred":
                    coef[i] = _fit_centred(z[i], z[patch], u.values[patch], hyp[i], degree)
                else:
                    coef[i] = _fit(self.w[i], self.w[patch], u.values[patch], hyp[i] * self.w[i].imag, degree)
            except CurvatureError:
                pass
        self.coef = coef
        y = self.w.imag
        with np.errstate(invalid="ignore"):
            self.arrays = shape_arrays(y, coef[:, 1], coef[:, 2], coef[:, 3], coef[:, 4], coef[:, 5])

    @property
    def valid(self) -> np.ndarray:
        return np.all(np.isfinite(self.coef), axis=1)

    def node_jet(self, i: int) -> Jet2:
        w = self.w[i]
        return Jet2(w.real, w.imag, *self.coef[i])

    def jet_at(self, p_disk: complex, tri: int | None = None, lam=None) -> Jet2:
        from .meshing import locate
        if tri is None:
            tri, lam = locate(self.mesh, (p_disk.real, p_disk.imag))
        wp = complex(disk_to_half_plane_c(p_disk))
        out = np.zeros(6)
        for i, l in zip(self.mesh.triangles[tri], lam):
            c = self.coef[i]
            dx, dy = wp.real - self.w[i].real, wp.imag - self.w[i].imag
            out += l * np.array([
                c[0] + c[1] * dx + c[2] * dy + 0.5 * c[3] * dx * dx + c[4] * dx * dy + 0.5 * c[5] * dy * dy,
                c[1] + c[3] * dx + c[4] * dy,
                c[2] + c[4] * dx + c[5] * dy,
                c[3], c[4], c[5]])
        return Jet2(wp.real, wp.imag, *out)


class ExactJetField:
    """Jet field of a closed-form function on a mesh.

    ``derivatives(x, y)`` returns ``(u, u_x, u_y, u_xx, u_xy, u_yy)`` at
    half-plane points; the interface mirrors :class:`JetField`.
    """

    def __init__(self, mesh, derivatives):
        self.mesh = mesh
        self.derivatives = derivatives
        self.w = disk_to_half_plane_c(mesh.z)
        self.coef = np.column_stack(derivatives(self.w.real, self.w.imag))
        y = self.w.imag
        c = self.coef
        with np.errstate(invalid="ignore", divide="ignore"):
            self.arrays = shape_arrays(y, c[:, 1], c[:, 2], c[:, 3], c[:, 4], c[:, 5])

    @property
    def valid(self) -> np.ndarray:
        return np.all(np.isfinite(self.coef), axis=1)

    def node_jet(self, i: int) -> Jet2:
        w = self.w[i]
        return Jet2(w.real, w.imag, *self.coef[i])

    def jet_at(self, p_disk: complex, tri=None, lam=None) -> Jet2:
        w = complex(disk_to_half_plane_c(p_disk))
        return Jet2(w.real, w.imag, *(float(v) for v in self.derivatives(w.real, w.imag)))


class FrameContext:
    """Consistent signs of the principal frame over a mesh.

    Signs are propagated breadth-first from ``seed`` (default: the node of
    largest nu), choosing at each node the lift of the principal line closest
    to the already assigned neighbour.  At the seed, V1 points along +x1.
    """

    def __init__(self, jets: JetField, seed: int | None = None, mask=None):
        self.jets = jets
        mesh = jets.mesh
        arr = jets.arrays
        ok = jets.valid & np.isfinite(arr["phi"])
        if mask is not None:
            ok &= mask
        V1 = arr["V1"]
        d = _disk_direction(jets.w, V1[:, 0], V1[:, 1])
        d = d / np.where(np.abs(d) > 0, np.abs(d), 1.0)
        self.dir1 = d
        nu = np.where(ok, arr["nu"], -np.inf)
        self.seed = int(np.argmax(nu)) if seed is None else int(seed)
        sign = np.zeros(mesh.n_nodes)
        sign[self.seed] = 1.0 if d[self.seed].real >= 0 else -1.0
        nbrs = mesh.neighbors()
        queue = deque([self.seed])
        while queue:
            i = queue.popleft()
            for k in nbrs[i]:
                if sign[k] != 0 or not ok[k]:
                    continue
                dot = (np.conj(sign[i] * d[i]) * d[k]).real
                sign[k] = 1.0 if dot >= 0 else -1.0
                queue.append(k)
        self.sign = sign
        self.theta = np.where(sign >= 0, arr["theta"], (arr["theta"] + np.pi) % (2 * np.pi))
        self.theta[sign == 0] = np.nan

    def theta_at(self, j: Jet2, near: int) -> float:
        """Theta of an arbitrary jet, signed consistently with node ``near``."""
        arr = shape_arrays(np.array([j.y]), np.array([j.ux]), np.array([j.uy]),
                           np.array([j.uxx]), np.array([j.uxy]), np.array([j.uyy]))
        V1 = arr["V1"][0]
        d = _disk_direction(np.array([j.x + 1j * j.y]), V1[:1], V1[1:2])[0]
        ref = self.sign[near] * self.dir1[near]
        th = arr["theta"][0]
        if (np.conj(ref) * d).real < 0:
            th = (th + np.pi) % (2 * np.pi)
        return float(th)
