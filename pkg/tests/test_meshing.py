import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scherkh2.hypgeom import build_symmetric_domain, quadrilateral, ModelPoint
from scherkh2.meshing import (
    DiskRegion, MeshError, QuadrantRegion, RefinementConfig, TAGS, boundary_polygon_area, locate,
    triangulate,
)


def _edge_circle_defect(mesh, dom):
    worst = 0.0
    for name in ("A1", "B1", "A2", "B2"):
        sel = mesh.tags == name
        if sel.any():
            worst = max(worst, float(dom.edge(name).distance_to(mesh.z[sel]).max()))
    return worst


def test_d1_boundary_nodes_on_geodesics(d1_mesh):
    dom = build_symmetric_domain(1.0)
    assert _edge_circle_defect(d1_mesh, dom) < 1e-10
    # every Dirichlet node lies on one of the four circles
    zb = d1_mesh.z[d1_mesh.boundary]
    dmin = np.min([e.distance_to(zb) for e in dom.edges], axis=0)
    assert dmin.max() < 1e-10


def test_mesh_invariants(d1_mesh):
    m = d1_mesh
    assert np.all(m.areas() > 0)
    assert m.min_angle_deg() >= 20.0
    assert set(np.unique(m.tags[m.boundary])) <= set(TAGS)
    assert np.all(m.tags[m.boundary] != "")
    assert np.all(np.abs(m.z) < 1.0)
    counts = m.edge_triangle_counts()
    assert set(np.unique(counts)) <= {1, 2}


def test_every_boundary_edge_is_dirichlet(d1_mesh):
    m = d1_mesh
    e = m.edges()
    outer = e[m.edge_triangle_counts() == 1]
    assert np.all(m.boundary[outer])


def test_area_matches_boundary_polygon(d1_mesh):
    assert abs(d1_mesh.areas().sum() - boundary_polygon_area(d1_mesh)) < 1e-8


def test_diagonals_are_mesh_lines(d1_mesh):
    m = d1_mesh
    on_diag = np.abs(np.abs(m.nodes[:, 0]) - np.abs(m.nodes[:, 1])) < 1e-13
    # a diagonal of length 2 tanh(1/2) at h = 0.05 carries many nodes
    assert on_diag.sum() >= 4 * int(math.tanh(0.5) / 0.05)
    assert "GAMMA1" in set(m.tags) and "GAMMA2" in set(m.tags)


def test_ideal_square_truncation_arc():
    cfg = RefinementConfig(h=0.05, truncation_delta=0.02)
    m = triangulate(build_symmetric_domain(math.inf), cfg)
    trunc = m.tags == "TRUNC"
    assert trunc.any()
    assert np.abs(np.abs(m.z[trunc]) - 0.98).max() < 1e-10
    assert np.abs(m.z).max() <= 0.98 + 1e-12
    dom = build_symmetric_domain(math.inf)
    assert _edge_circle_defect(m, dom) < 1e-10
    assert abs(m.areas().sum() - boundary_polygon_area(m)) < 1e-8


def test_halving_h_quadruples_triangles():
    dom = build_symmetric_domain(1.0)
    n1 = triangulate(dom, RefinementConfig(h=0.04)).n_triangles
    n2 = triangulate(dom, RefinementConfig(h=0.02)).n_triangles
    assert 3.5 <= n2 / n1 <= 4.5


def test_grading_refines_near_a_and_b_edges():
    dom = build_symmetric_domain(2.0)
    m = triangulate(dom, RefinementConfig(h=0.04, grading=0.5))
    size = m.local_size()
    near = m.boundary & np.isin(m.tags, ["A1", "B1", "A2", "B2"])
    center = np.abs(m.z) < 0.2
    assert np.median(size[near]) < 0.8 * np.median(size[center])
    flat = triangulate(dom, RefinementConfig(h=0.04, grading=1.0))
    assert m.n_nodes > flat.n_nodes


def test_quadrant_and_disk_regions():
    cfg = RefinementConfig(h=0.05)
    q = triangulate(QuadrantRegion(0.02), cfg)
    assert np.all(q.nodes[:, 0] >= np.abs(q.nodes[:, 1]) - 1e-12)
    d = triangulate(DiskRegion(0.02), cfg)
    assert np.abs(np.abs(d.z[d.tags == "TRUNC"]) - 0.98).max() < 1e-10
    assert abs(d.areas().sum() - boundary_polygon_area(d)) < 1e-8
    assert d.min_angle_deg() >= 20.0


def test_general_quadrilateral():
    verts = [ModelPoint.disk(0.4, 0.3), ModelPoint.disk(-0.35, 0.4), ModelPoint.disk(-0.4, -0.3),
             ModelPoint.disk(0.3, -0.45)]
    dom = quadrilateral(verts)
    m = triangulate(dom, RefinementConfig(h=0.05))
    assert _edge_circle_defect(m, dom) < 1e-10
    assert np.all(m.areas() > 0)
    assert abs(m.areas().sum() - boundary_polygon_area(m)) < 1e-8


def test_config_validation():
    for kw in ({"h": 0.0}, {"h": -1.0}, {"grading": 0.0}, {"grading": 1.5},
               {"truncation_delta": 0.0}, {"truncation_delta": 0.5}, {"min_angle": 40.0}):
        with pytest.raises(MeshError):
            RefinementConfig(**kw)


def test_unmeshable_object():
    with pytest.raises(MeshError):
        triangulate("not a domain", RefinementConfig())


# locate ---------------------------------------------------------------------

def test_locate_nodes(d1_mesh):
    m = d1_mesh
    for i in range(0, m.n_nodes, 37):
        t, lam = locate(m, m.nodes[i])
        assert i in m.triangles[t]
        k = list(m.triangles[t]).index(i)
        assert lam[k] == pytest.approx(1.0, abs=1e-12)


def test_locate_centroids(d1_mesh):
    m = d1_mesh
    c = m.centroids()
    for t in range(0, m.n_triangles, 53):
        t2, lam = locate(m, c[t])
        assert t2 == t
        assert lam == pytest.approx([1 / 3] * 3, abs=1e-12)


def test_locate_outside(d1_mesh):
    with pytest.raises(ValueError):
        locate(d1_mesh, (0.9, 0.0))


@given(st.floats(0.0, 0.3), st.floats(0.0, 2 * math.pi))
def test_locate_reconstructs_point(d1_mesh, r, a):
    p = np.array([r * math.cos(a), r * math.sin(a)])
    t, lam = locate(d1_mesh, p)
    assert np.all(lam >= 0) and lam.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.abs(lam @ d1_mesh.nodes[d1_mesh.triangles[t]] - p).max() < 1e-12
