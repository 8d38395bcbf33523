"""Minimal-graph solver: P1 minimisation of the hyperbolic area functional.

In the disk chart with conformal factor ``rho = 2/(1-|x|^2)`` the area of the
graph of ``u`` is ``∫ rho sqrt(rho^2 + |grad_0 u|^2) dx``; its Euler-Lagrange
equation is ``div(grad u / W) = 0`` in the hyperbolic metric.  The integrand
is convex in the gradient, so damped Newton on the discrete functional is
globally convergent.  ``rho`` is frozen at triangle centroids.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hypgeom import build_symmetric_domain, conformal_factor, disk_to_half_plane_c
from .meshing import DiskRegion, QuadrantRegion, RefinementConfig, TriMesh, triangulate

log = logging.getLogger(__name__)

DEFAULT_CAPS = (1.0, 2.0, 4.0, 8.0, 16.0)


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass
class ScalarField:
    mesh: TriMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes,):
            raise ValueError("one value per mesh node is required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite nodal values")

    def __add__(self, c: float) -> "ScalarField":
        return ScalarField(self.mesh, self.values + c)

    def __call__(self, p) -> float:
        """P1 interpolation at a disk point."""
        from .meshing import locate
        t, lam = locate(self.mesh, p)
        return float(lam @ self.values[self.mesh.triangles[t]])


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 100
    damping: float = 0.5
    continuation: tuple = DEFAULT_CAPS
    armijo: float = 1e-4

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        caps = tuple(float(c) for c in self.continuation)
        if any(b <= a for a, b in zip(caps, caps[1:])) or any(c <= 0 for c in caps):
            raise ValueError("continuation caps must be positive and increasing")
        object.__setattr__(self, "continuation", caps)


@dataclass
class DirichletProblem:
    """Dirichlet data on the boundary nodes of ``mesh`` (NaN elsewhere)."""

    mesh: TriMesh
    data: np.ndarray
    cap: float = math.inf

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        b = self.mesh.boundary
        if not np.all(np.isfinite(self.data[b])):
            raise ValueError("every boundary node needs finite data")
        if np.isfinite(self.cap) and np.any(np.abs(self.data[b]) > self.cap + 1e-12):
            raise ValueError("boundary data exceeds the cap")


@dataclass
class ConvergenceReport:
    converged: bool = False
    iterations: int = 0
    grad_norms: list = field(default_factory=list)
    decrements: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    newton_steps: int = 0
    gradient_steps: int = 0
    caps: list = field(default_factory=list)
    cap_samples: list = field(default_factory=list)
    segments: list = field(default_factory=list)

    @property
    def final_grad_norm(self) -> float:
        return self.grad_norms[-1] if self.grad_norms else math.nan

    def decrement_segments(self) -> list:
        """Newton decrements of each individual solve (one list per cap)."""
        return self.segments if self.segments else [list(self.decrements)]

    def merge(self, other: "ConvergenceReport") -> None:
        self.iterations += other.iterations
        self.grad_norms += other.grad_norms
        self.decrements += other.decrements
        self.steps += other.steps
        self.energies += other.energies
        self.newton_steps += other.newton_steps
        self.gradient_steps += other.gradient_steps
        self.segments += other.decrement_segments()
        self.converged = other.converged


# ---------------------------------------------------------------------------
# area functional

class AreaFunctional:
    """Discrete area functional on a mesh with its exact derivatives."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        p = mesh.nodes[mesh.triangles]                   # (M, 3, 2)
        x, y = p[..., 0], p[..., 1]
        area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
        self.area = 0.5 * area2
        # gradients of the three hat functions
        self.gx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1) / area2[:, None]
        self.gy = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1) / area2[:, None]
        c = p.mean(axis=1)
        self.rho = conformal_factor(c[:, 0] + 1j * c[:, 1])
        t = mesh.triangles
        self._rows = np.repeat(t, 3, axis=1).ravel()
        self._cols = np.tile(t, (1, 3)).ravel()

    def grad_u(self, u: np.ndarray):
        ut = u[self.mesh.triangles]
        return np.sum(ut * self.gx, axis=1), np.sum(ut * self.gy, axis=1)

    def value(self, u: np.ndarray) -> float:
        ux, uy = self.grad_u(u)
        r = self.rho
        return float(np.sum(self.area * r * np.sqrt(r * r + ux * ux + uy * uy)))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        ux, uy = self.grad_u(u)
        r = self.rho
        s = np.sqrt(r * r + ux * ux + uy * uy)
        w = self.area * r / s
        loc = (w * ux)[:, None] * self.gx + (w * uy)[:, None] * self.gy
        g = np.zeros(self.mesh.n_nodes)
        np.add.at(g, self.mesh.triangles.ravel(), loc.ravel())
        return g

    def hessian(self, u: np.ndarray) -> sp.csr_matrix:
        ux, uy = self.grad_u(u)
        r = self.rho
        s = np.sqrt(r * r + ux * ux + uy * uy)
        f = self.area * r / s
        s2 = s * s
        dxx = f * (1.0 - ux * ux / s2)
        dxy = f * (-ux * uy / s2)
        dyy = f * (1.0 - uy * uy / s2)
        gx, gy = self.gx, self.gy
        # local 3x3 blocks: g_i^T D g_j
        ax = dxx[:, None] * gx + dxy[:, None] * gy
        ay = dxy[:, None] * gx + dyy[:, None] * gy
        loc = ax[:, :, None] * gx[:, None, :] + ay[:, :, None] * gy[:, None, :]
        n = self.mesh.n_nodes
        return sp.csr_matrix((loc.ravel(), (self._rows, self._cols)), shape=(n, n))


def area_functional(u: ScalarField):
    """Value, gradient and Hessian of the area functional at ``u``."""
    F = AreaFunctional(u.mesh)
    return F.value(u.values), F.gradient(u.values), F.hessian(u.values)


# ---------------------------------------------------------------------------
# Newton solver

def _newton(F: AreaFunctional, u0: np.ndarray, free: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, ConvergenceReport]:
    u = u0.copy()
    rep = ConvergenceReport()
    E = F.value(u)
    for it in range(cfg.max_iter + 1):
        g = F.gradient(u)[free]
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        rep.grad_norms.append(gnorm)
        rep.energies.append(E)
        if gnorm < cfg.tol:
            rep.converged = True
            break
        if it == cfg.max_iter:
            break
        H = F.hessian(u)[free][:, free].tocsc()
        newton = True
        try:
            d = spla.spsolve(H, -g)
            if not np.all(np.isfinite(d)):
                raise ValueError
            slope = float(g @ d)
            if slope >= 0:
                raise ValueError
        except (ValueError, RuntimeError):
            newton = False
            d = -g / max(np.max(np.abs(H.diagonal())), 1e-300)
            slope = float(g @ d)
        dec2 = -slope
        rep.decrements.append(math.sqrt(max(dec2, 0.0)))
        alpha = 1.0
        un = u.copy()
        while True:
            un[free] = u[free] + alpha * d
            En = F.value(un)
            # once the predicted decrease is below roundoff, the Armijo test
            # is meaningless and the full Newton step is taken
            if newton and alpha == 1.0 and 0.5 * dec2 <= 1e-13 * (1.0 + abs(E)):
                break
            if En <= E + cfg.armijo * alpha * slope:
                break
            alpha *= cfg.damping
            if alpha < 1e-14:
                raise NonConvergence("line search failed", rep)
        u, E = un, En
        rep.steps.append(alpha)
        rep.iterations += 1
        rep.newton_steps += newton
        rep.gradient_steps += not newton
    return u, rep


def harmonic_extension(F: AreaFunctional, data: np.ndarray) -> np.ndarray:
    """Initial guess: the Hessian at u = 0 is the (conformally invariant) Laplacian."""
    mesh = F.mesh
    b = mesh.boundary
    u = np.zeros(mesh.n_nodes)
    u[b] = data[b]
    H = F.hessian(np.zeros(mesh.n_nodes))
    free = ~b
    rhs = -(H[free][:, b] @ u[b])
    u[free] = spla.spsolve(H[free][:, free].tocsc(), rhs)
    return u


def solve_minimal_graph(prob: DirichletProblem, cfg: SolverConfig | None = None,
                        initial: np.ndarray | None = None, F: AreaFunctional | None = None) -> tuple[ScalarField, ConvergenceReport]:
    cfg = cfg or SolverConfig()
    mesh = prob.mesh
    F = F or AreaFunctional(mesh)
    free = ~mesh.boundary
    if initial is None:
        u0 = harmonic_extension(F, prob.data)
    else:
        u0 = np.array(initial, dtype=float)
        u0[mesh.boundary] = prob.data[mesh.boundary]
    u, rep = _newton(F, u0, free, cfg)
    if not rep.converged:
        raise NonConvergence(
            f"no convergence after {cfg.max_iter} iterations (last gradient norm {rep.final_grad_norm:.3e})", rep)
    return ScalarField(mesh, u), rep


# ---------------------------------------------------------------------------
# boundary data

def scherk_data(mesh: TriMesh, cap: float) -> np.ndarray:
    """+cap on A-edges, -cap on B-edges, 0 on diagonal corners.

    On the truncation arc of the ideal square the data is +cap on the
    A side of the nearest diagonal and -cap on the B side.
    """
    data = np.full(mesh.n_nodes, np.nan)
    for i in np.flatnonzero(mesh.boundary):
        tag = mesh.tags[i]
        if tag in ("A1", "A2"):
            data[i] = cap
        elif tag in ("B1", "B2"):
            data[i] = -cap
        elif tag in ("GAMMA1", "GAMMA2"):
            data[i] = 0.0
        elif tag == "TRUNC":
            x1, x2 = mesh.nodes[i]
            data[i] = cap * float(np.sign(abs(x1) - abs(x2)))
        else:
            raise SolverError(f"untagged boundary node {i}")
    return data


def function_data(mesh: TriMesh, f) -> np.ndarray:
    """Boundary data sampled from ``f(x, y)`` given in half-plane coordinates."""
    w = disk_to_half_plane_c(mesh.z)
    data = np.full(mesh.n_nodes, np.nan)
    b = mesh.boundary
    data[b] = f(w.real[b], w.imag[b])
    return data


def quadrant_data(mesh: TriMesh, level: float) -> np.ndarray:
    data = np.full(mesh.n_nodes, np.nan)
    for i in np.flatnonzero(mesh.boundary):
        data[i] = level if mesh.tags[i] == "TRUNC" else 0.0
    return data


def _interior_samples(mesh: TriMesh, u: np.ndarray, k: int = 5) -> list:
    """Values at a few fixed interior nodes (deterministic choice)."""
    idx = np.flatnonzero(~mesh.boundary)
    pick = idx[np.linspace(0, len(idx) - 1, k).astype(int)]
    return [float(u[i]) for i in pick]


def solve_with_continuation(mesh: TriMesh, data_for_cap, cap: float, cfg: SolverConfig | None = None):
    """Solve for data ``data_for_cap(T)`` along the cap ladder up to ``cap``.

    Each solve is warm-started by rescaling the previous solution.
    Returns the final field, the merged report and the per-cap fields.
    """
    cfg = cfg or SolverConfig()
    caps = [c for c in cfg.continuation if c < cap] + [float(cap)]
    F = AreaFunctional(mesh)
    total = ConvergenceReport()
    per_cap = {}
    u_prev, t_prev = None, None
    for T in caps:
        init = None if u_prev is None else u_prev * (T / t_prev)
        sol, rep = solve_minimal_graph(DirichletProblem(mesh, data_for_cap(T), T), cfg, init, F)
        log.info("cap %g: %d iterations, |g| = %.2e", T, rep.iterations, rep.final_grad_norm)
        total.merge(rep)
        total.caps.append(T)
        total.cap_samples.append(_interior_samples(mesh, sol.values))
        per_cap[T] = sol
        u_prev, t_prev = sol.values, T
    return per_cap[caps[-1]], total, per_cap


def solve_scherk(lam: float, cap: float, cfg: SolverConfig | None = None,
                 mesh_cfg: RefinementConfig | None = None, mesh: TriMesh | None = None):
    """Capped Scherk solution on the symmetric square ``D_lambda``."""
    if mesh is None:
        mesh = triangulate(build_symmetric_domain(lam), mesh_cfg or RefinementConfig())
    return solve_with_continuation(mesh, lambda T: scherk_data(mesh, T), cap, cfg)


# ---------------------------------------------------------------------------
# entire graphs u_n by reflection

@dataclass
class EntireGraph:
    n: float
    quadrant: ScalarField           # v_n
    disk: ScalarField               # u_n
    report: ConvergenceReport
    reflection_defect: float


def build_entire_graph_un(n: float, cfg: SolverConfig | None = None,
                          mesh_cfg: RefinementConfig | None = None) -> EntireGraph:
    """Odd reflection of the quadrant solution with data ``n`` on the arc."""
    if not n > 0:
        raise ValueError("n must be positive")
    mesh_cfg = mesh_cfg or RefinementConfig()
    qmesh = triangulate(QuadrantRegion(mesh_cfg.truncation_delta), mesh_cfg)
    v, rep, _ = solve_with_continuation(qmesh, lambda T: quadrant_data(qmesh, T), n, cfg)
    dmesh = triangulate(DiskRegion(mesh_cfg.truncation_delta), mesh_cfg)
    u, defect = reflect_quadrant(v, dmesh)
    return EntireGraph(n, v, u, rep, defect)


def _keys(z: np.ndarray) -> np.ndarray:
    return np.round(np.column_stack([z.real, z.imag]) * 1e12).astype(np.int64)


def reflect_quadrant(v: ScalarField, dmesh: TriMesh) -> tuple[ScalarField, float]:
    """Extend a field on ``{x1 > |x2|}`` to the disk, odd across both diagonals.

    Nodes on the diagonals can be reached by two reflections; the spread of
    the candidate values is returned as the reflection defect.
    """
    table = {tuple(k): val for k, val in zip(_keys(v.mesh.z), v.values)}
    z = dmesh.z
    out = np.empty(dmesh.n_nodes)
    defect = 0.0
    # reflections across eta1 (x1 = x2) and eta2 (x1 = -x2), and their product
    maps = [(lambda w: w, 1.0),
            (lambda w: 1j * np.conj(w), -1.0),      # (x1,x2) -> (x2,x1)
            (lambda w: -1j * np.conj(w), -1.0),     # (x1,x2) -> (-x2,-x1)
            (lambda w: -w, 1.0)]
    for i, zi in enumerate(z):
        cands = []
        for f, sgn in maps:
            w = f(zi)
            w = complex(float(w.real), float(w.imag))
            if w.real >= abs(w.imag):
                key = tuple(_keys(np.array([w]))[0])
                if key in table:
                    cands.append(sgn * table[key])
        if not cands:
            raise SolverError(f"disk node {i} has no quadrant preimage")
        out[i] = cands[0]
        defect = max(defect, max(cands) - min(cands))
    if defect > 1e-8:
        log.warning("reflection defect %.3e exceeds 1e-8", defect)
    return ScalarField(dmesh, out), defect


# ---------------------------------------------------------------------------
# pointwise PDE residual

def minimal_equation_lhs(y, ux, uy, uxx, uxy, uyy):
    """Left side of the expanded minimal graph equation (half-plane chart)."""
    return ((1 + y * y * ux * ux) * uyy + (1 + y * y * uy * uy) * uxx
            - 2 * y * y * ux * uy * uxy - y * uy * (ux * ux + uy * uy))


def pde_residual(u: ScalarField, p) -> float:
    from .curvature import fit_jet
    j = fit_jet(u, p)
    return float(minimal_equation_lhs(j.y, j.ux, j.uy, j.uxx, j.uxy, j.uyy))


from .transinv import (  # noqa: E402  (re-exported as part of the solver surface)
    TranslationInvariantGraph, TranslationInvariantProblem, solve_translation_invariant,
)
