"""Hyperbolic-plane primitives in the Poincare disk and upper half-plane charts.

Points are exchanged as :class:`ModelPoint` values; ideal points are stored as
boundary angles (:class:`IdealVertex`) and never as chart coordinates.  Bulk
routines working on numpy arrays of complex numbers are provided for the
mesher and solver, which handle thousands of points at a time.

The Cayley transform used throughout is ``w = i(1 - z)/(1 + z)``: the disk
origin goes to ``i = (0, 1)`` and the disk point ``(0.5, 0)`` to ``(0, 1/3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

DISK = "disk"
HALF_PLANE = "half-plane"

_CHARTS = (DISK, HALF_PLANE)


class ChartDomainError(ValueError):
    """A coordinate pair lies outside the open domain of its chart."""


@dataclass(frozen=True)
class ModelPoint:
    chart: str
    c1: float
    c2: float

    def __post_init__(self):
        if self.chart not in _CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise ChartDomainError("non-finite coordinates")
        if self.chart == DISK and self.c1 * self.c1 + self.c2 * self.c2 >= 1.0:
            raise ChartDomainError(f"({self.c1}, {self.c2}) is not inside the unit disk")
        if self.chart == HALF_PLANE and self.c2 <= 0.0:
            raise ChartDomainError(f"({self.c1}, {self.c2}) is not in the upper half-plane")

    @classmethod
    def disk(cls, x1: float, x2: float) -> "ModelPoint":
        return cls(DISK, float(x1), float(x2))

    @classmethod
    def half_plane(cls, x: float, y: float) -> "ModelPoint":
        return cls(HALF_PLANE, float(x), float(y))

    @property
    def z(self) -> complex:
        return complex(self.c1, self.c2)

    def as_tuple(self) -> tuple[float, float]:
        return (self.c1, self.c2)


@dataclass(frozen=True)
class IdealVertex:
    """A point of the circle at infinity, as an angle of the disk chart."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2.0 * math.pi))

    @property
    def z(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))


Vertex = Union[ModelPoint, IdealVertex]


@dataclass(frozen=True)
class Length:
    """Hyperbolic length, either finite or infinite (never a sentinel float)."""

    value: float | None

    @classmethod
    def infinite(cls) -> "Length":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __float__(self) -> float:
        return math.inf if self.value is None else self.value


# ---------------------------------------------------------------------------
# chart conversions (scalar and vectorised)

def disk_to_half_plane_c(z):
    """Cayley transform on complex scalars or arrays."""
    return 1j * (1.0 - z) / (1.0 + z)


def half_plane_to_disk_c(w):
    return (1j - w) / (1j + w)


def disk_to_half_plane_jacobian_c(z):
    """Complex derivative dw/dz of the Cayley transform."""
    return -2j / (1.0 + z) ** 2


def half_plane_to_disk_jacobian_c(w):
    return -2j / (1j + w) ** 2


def to_half_plane(p: ModelPoint) -> ModelPoint:
    if p.chart == HALF_PLANE:
        return p
    w = disk_to_half_plane_c(p.z)
    return ModelPoint.half_plane(w.real, w.imag)


def to_disk(p: ModelPoint) -> ModelPoint:
    if p.chart == DISK:
        return p
    z = half_plane_to_disk_c(p.z)
    return ModelPoint.disk(z.real, z.imag)


def _as_chart(p: ModelPoint, chart: str) -> ModelPoint:
    return to_disk(p) if chart == DISK else to_half_plane(p)


def disk_distance_c(z1, z2):
    """Hyperbolic distance between disk points (complex, broadcasting)."""
    # asinh form: accurate near the unit circle, unlike 2 artanh|(z1 - z2)/(1 - conj(z1) z2)|
    a1, a2 = np.abs(z1), np.abs(z2)
    s = np.sqrt((1.0 - a1) * (1.0 + a1) * (1.0 - a2) * (1.0 + a2))
    return 2.0 * np.arcsinh(np.abs(z1 - z2) / s)


def half_plane_distance_c(w1, w2):
    # asinh form stays accurate for nearby points
    return 2.0 * np.arcsinh(np.abs(w1 - w2) / (2.0 * np.sqrt(np.imag(w1) * np.imag(w2))))


def distance(p: ModelPoint, q: ModelPoint) -> float:
    if p.chart != q.chart:
        q = _as_chart(q, p.chart)
    if p.chart == DISK:
        return float(disk_distance_c(p.z, q.z))
    return float(half_plane_distance_c(p.z, q.z))


def conformal_factor(z):
    """Disk metric factor rho = 2 / (1 - |z|^2), so that g = rho^2 g_0."""
    return 2.0 / (1.0 - np.abs(z) ** 2)


# ---------------------------------------------------------------------------
# isometries of the half-plane

@dataclass(frozen=True)
class MobiusIsometry:
    """``w -> (a w' + b)/(c w' + d)`` with ``w' = -conj(w)`` when ``reflect``.

    Coefficients are real and normalised to ``ad - bc = 1``.
    """

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0
    reflect: bool = False

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or det <= 1e-300:
            raise ValueError("Mobius coefficient matrix must have positive determinant")
        s = 1.0 / math.sqrt(det)
        a, b, c, d = self.a * s, self.b * s, self.c * s, self.d * s
        # fix the overall sign so that equal maps compare equal
        if c < 0 or (c == 0 and d < 0):
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> "MobiusIsometry":
        return cls()

    @classmethod
    def reflection(cls) -> "MobiusIsometry":
        """Reflection across the geodesic {x = 0}."""
        return cls(reflect=True)

    @classmethod
    def rotation_about_i(cls, phi: float) -> "MobiusIsometry":
        """Rotation by ``phi`` (counterclockwise) about the point (0, 1)."""
        c, s = math.cos(phi / 2.0), math.sin(phi / 2.0)
        return cls(c, s, -s, c)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __call__(self, w):
        if self.reflect:
            w = -np.conj(w)
        return (self.a * w + self.b) / (self.c * w + self.d)

    def derivative(self, w):
        """Complex derivative of the holomorphic part, evaluated at ``w``.

        For reflecting maps this is the derivative of the Mobius factor at
        the reflected point; see :func:`real_jacobians` for the real chain rule.
        """
        if self.reflect:
            w = -np.conj(w)
        return 1.0 / (self.c * w + self.d) ** 2

    def second_derivative(self, w):
        if self.reflect:
            w = -np.conj(w)
        return -2.0 * self.c / (self.c * w + self.d) ** 3

    def inverse(self) -> "MobiusIsometry":
        a, b, c, d = self.d, -self.b, -self.c, self.a
        if self.reflect:
            # (M o R)^-1 = R o M^-1 = conj(M^-1) o R
            return MobiusIsometry(a, -b, -c, d, reflect=True)
        return MobiusIsometry(a, b, c, d)


def compose(m1: MobiusIsometry, m2: MobiusIsometry) -> MobiusIsometry:
    """Return ``m1 o m2`` (apply ``m2`` first)."""
    a2, b2, c2, d2 = m2.a, m2.b, m2.c, m2.d
    if m1.reflect:
        # R o M o R = [[a, -b], [-c, d]]
        b2, c2 = -b2, -c2
    prod = np.array([[m1.a, m1.b], [m1.c, m1.d]]) @ np.array([[a2, b2], [c2, d2]])
    return MobiusIsometry(prod[0, 0], prod[0, 1], prod[1, 0], prod[1, 1],
                          reflect=m1.reflect != m2.reflect)


def apply_isometry(m: MobiusIsometry, p: ModelPoint) -> ModelPoint:
    hp = to_half_plane(p)
    w = m(hp.z)
    out = ModelPoint.half_plane(w.real, w.imag)
    return _as_chart(out, p.chart)


def isometry_taking(p: ModelPoint) -> MobiusIsometry:
    """Hyperbolic translation sending ``p`` to the half-plane point (0, 1)."""
    hp = to_half_plane(p)
    x0, y0 = hp.c1, hp.c2
    return MobiusIsometry(1.0, -x0, 0.0, y0)


def disk_rotation(phi: float) -> MobiusIsometry:
    """Rotation about the disk origin, expressed in the half-plane chart."""
    # Cayley is orientation preserving, so a disk rotation by phi about 0 is
    # the rotation by phi about its image i.
    return MobiusIsometry.rotation_about_i(phi)


# ---------------------------------------------------------------------------
# geodesics

@dataclass(frozen=True)
class GeodesicArc:
    """Geodesic arc between two points of the closed disk.

    In the disk chart the carrier is either a diameter line (``center is
    None``) or a circle of center ``center`` and radius ``radius``
    orthogonal to the unit circle.
    """

    start: Vertex
    end: Vertex
    center: complex | None = field(default=None, compare=False)
    radius: float | None = field(default=None, compare=False)

    @property
    def is_line(self) -> bool:
        return self.center is None

    @property
    def z0(self) -> complex:
        return _disk_z(self.start)

    @property
    def z1(self) -> complex:
        return _disk_z(self.end)

    def _angles(self) -> tuple[float, float]:
        a0 = math.atan2((self.z0 - self.center).imag, (self.z0 - self.center).real)
        a1 = math.atan2((self.z1 - self.center).imag, (self.z1 - self.center).real)
        # the inner arc subtends less than pi
        da = (a1 - a0 + math.pi) % (2.0 * math.pi) - math.pi
        return a0, a0 + da

    def euclidean_length(self) -> float:
        if self.is_line:
            return abs(self.z1 - self.z0)
        a0, a1 = self._angles()
        return self.radius * abs(a1 - a0)

    def point_at(self, s):
        """Points at Euclidean arc-length fraction ``s`` in [0, 1] (vectorised)."""
        s = np.asarray(s, dtype=float)
        if self.is_line:
            return self.z0 + s * (self.z1 - self.z0)
        a0, a1 = self._angles()
        return self.center + self.radius * np.exp(1j * (a0 + s * (a1 - a0)))

    def param_of(self, z: complex) -> float:
        """Arc-length fraction of a point on the carrier (inverse of point_at)."""
        if self.is_line:
            d = self.z1 - self.z0
            return float((np.conj(d) * (z - self.z0)).real / abs(d) ** 2)
        a0, a1 = self._angles()
        a = math.atan2((z - self.center).imag, (z - self.center).real)
        a = a0 + (a - a0 + math.pi) % (2.0 * math.pi) - math.pi
        return (a - a0) / (a1 - a0)

    def distance_to(self, z):
        """Euclidean distance (disk chart) from points ``z`` to the carrier."""
        z = np.asarray(z)
        if self.is_line:
            d = self.z1 - self.z0
            n = d / abs(d)
            return np.abs(np.imag(np.conj(n) * (z - self.z0)))
        return np.abs(np.abs(z - self.center) - self.radius)

    def project(self, z):
        """Closest point of the carrier (used to snap boundary nodes)."""
        z = np.asarray(z)
        if self.is_line:
            d = self.z1 - self.z0
            n = d / abs(d)
            return self.z0 + n * np.real(np.conj(n) * (z - self.z0))
        v = z - self.center
        return self.center + self.radius * v / np.abs(v)


def _disk_z(v: Vertex) -> complex:
    if isinstance(v, IdealVertex):
        return v.z
    return to_disk(v).z


def geodesic_between(p: Vertex, q: Vertex) -> GeodesicArc:
    zp, zq = _disk_z(p), _disk_z(q)
    if abs(zp - zq) < 1e-15:
        raise ValueError("coincident endpoints do not determine a geodesic")
    cross = (np.conj(zp) * zq).imag
    scale = max(abs(zp), abs(zq), 1.0)
    if abs(cross) <= 1e-14 * scale * scale:
        if isinstance(p, IdealVertex) and isinstance(q, IdealVertex) and abs(zp + zq) > 1e-12:
            raise ValueError("ideal endpoints are not antipodal yet collinear with the origin")
        return GeodesicArc(p, q)
    # circle |z - c|^2 = |c|^2 - 1 through both: Re(conj(c) z) = (1 + |z|^2)/2
    A = np.array([[zp.real, zp.imag], [zq.real, zq.imag]])
    rhs = np.array([(1.0 + abs(zp) ** 2) / 2.0, (1.0 + abs(zq) ** 2) / 2.0])
    cx, cy = np.linalg.solve(A, rhs)
    c = complex(cx, cy)
    return GeodesicArc(p, q, center=c, radius=math.sqrt(abs(c) ** 2 - 1.0))


def edge_length(arc: GeodesicArc) -> Length:
    if isinstance(arc.start, IdealVertex) or isinstance(arc.end, IdealVertex):
        return Length.infinite()
    return Length(float(disk_distance_c(arc.z0, arc.z1)))


def geodesic_midpoint(p: ModelPoint, q: ModelPoint) -> ModelPoint:
    """Hyperbolic midpoint, computed by moving ``p`` to the disk origin."""
    zp, zq = to_disk(p).z, to_disk(q).z
    w = (zq - zp) / (1.0 - np.conj(zp) * zq)
    d = 2.0 * math.atanh(abs(w))
    wm = w / abs(w) * math.tanh(d / 4.0)
    zm = (wm + zp) / (1.0 + np.conj(zp) * wm)
    return ModelPoint.disk(zm.real, zm.imag)


# ---------------------------------------------------------------------------
# Scherk quadrilaterals

EDGE_NAMES = ("A1", "B1", "A2", "B2")


@dataclass(frozen=True)
class ScherkQuadrilateral:
    """Geodesic quadrilateral with edges ordered ``[A1, B1, A2, B2]``.

    Vertices are counterclockwise, ``vertices[0] = A1 ∩ B1``, and edge ``k``
    joins ``vertices[k-1]`` to ``vertices[k]``.  ``lam`` is the half-diagonal
    of the symmetric family (``math.inf`` for the ideal square) or ``None``.
    """

    vertices: tuple
    edges: tuple
    lam: float | None = None

    @property
    def is_ideal(self) -> bool:
        return any(isinstance(v, IdealVertex) for v in self.vertices)

    @property
    def is_symmetric(self) -> bool:
        return self.lam is not None

    def edge(self, name: str) -> GeodesicArc:
        return self.edges[EDGE_NAMES.index(name)]

    def vertex_z(self) -> np.ndarray:
        return np.array([_disk_z(v) for v in self.vertices])

    def to_json(self) -> dict:
        if self.lam is not None:
            return {"type": "scherk_symmetric",
                    "lambda": "inf" if math.isinf(self.lam) else self.lam}
        verts = []
        for v in self.vertices:
            if isinstance(v, IdealVertex):
                verts.append({"ideal_angle": v.angle})
            else:
                verts.append(list(to_disk(v).as_tuple()))
        return {"type": "quadrilateral", "vertices": verts}


def quadrilateral(vertices) -> ScherkQuadrilateral:
    """Quadrilateral from four counterclockwise vertices, first = A1 ∩ B1."""
    verts = tuple(vertices)
    if len(verts) != 4:
        raise ValueError("a Scherk quadrilateral has exactly four vertices")
    zs = np.array([_disk_z(v) for v in verts])
    area2 = sum((np.conj(zs[k - 1]) * zs[k]).imag for k in range(4))
    if area2 <= 0:
        raise ValueError("vertices must be in counterclockwise order")
    edges = tuple(geodesic_between(verts[k - 1], verts[k]) for k in range(4))
    return ScherkQuadrilateral(verts, edges)


def build_symmetric_domain(lam: float) -> ScherkQuadrilateral:
    """Geodesic square with vertices on {x1 = ±x2} at distance ``lam`` from 0."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    angles = [math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4]
    if math.isinf(lam):
        verts = tuple(IdealVertex(a) for a in angles)
    else:
        r = math.tanh(lam / 2.0)
        verts = tuple(ModelPoint.disk(r * math.cos(a), r * math.sin(a)) for a in angles)
    edges = tuple(geodesic_between(verts[k - 1], verts[k]) for k in range(4))
    return ScherkQuadrilateral(verts, edges, lam=lam)


def domain_from_json(spec: dict) -> ScherkQuadrilateral:
    kind = spec.get("type")
    if kind == "scherk_symmetric":
        lam = spec["lambda"]
        lam = math.inf if lam in ("inf", "infinity", math.inf) else float(lam)
        return build_symmetric_domain(lam)
    if kind == "quadrilateral":
        verts = []
        for v in spec["vertices"]:
            if isinstance(v, dict):
                verts.append(IdealVertex(v["ideal_angle"]))
            else:
                verts.append(ModelPoint.disk(*v))
        return quadrilateral(verts)
    raise ValueError(f"unknown domain type {kind!r}")


@dataclass(frozen=True)
class EquilibriumResult:
    checkable: bool
    balanced: bool = False
    residual: float | None = None


def check_equilibrium(q: ScherkQuadrilateral, tol: float = 1e-9) -> EquilibriumResult:
    lengths = [edge_length(e) for e in q.edges]
    if any(l.is_infinite for l in lengths):
        return EquilibriumResult(checkable=False)
    a1, b1, a2, b2 = (l.value for l in lengths)
    res = abs(a1 + a2 - b1 - b2)
    return EquilibriumResult(True, res < tol, res)


def interior_angle(q: ScherkQuadrilateral, k: int) -> float:
    """Euclidean (= hyperbolic, the chart is conformal) angle at vertex ``k``."""
    z = _disk_z(q.vertices[k])

    def tangent(arc: GeodesicArc) -> complex:
        if arc.is_line:
            t = arc.z1 - arc.z0
        else:
            t = 1j * (z - arc.center)
        # orient away from the vertex
        other = arc.z0 if abs(arc.z1 - z) < abs(arc.z0 - z) else arc.z1
        if arc.is_line:
            t = other - z
        elif (np.conj(t) * (arc.point_at(0.5) - z)).real < 0:
            t = -t
        return t / abs(t)

    t_in = tangent(q.edges[k])
    t_out = tangent(q.edges[(k + 1) % 4])
    return abs(math.atan2((np.conj(t_in) * t_out).imag, (np.conj(t_in) * t_out).real))
