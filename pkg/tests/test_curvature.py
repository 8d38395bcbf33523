import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from scherkh2.curvature import (
    CurvatureError, ExactJetField, FrameContext, Jet2, JetField, extrinsic_curvature, fit_jet,
    normalize_jet, normalized_curvature_at_p, principal_frame, second_fundamental_form, shape_arrays,
    shape_data, theta, transport_jet, unit_normal,
)
from scherkh2.hypgeom import MobiusIsometry, ModelPoint, build_symmetric_domain, compose, disk_to_half_plane_c
from scherkh2.meshing import RefinementConfig, triangulate
from scherkh2.solver import ScalarField, SolverConfig, minimal_equation_lhs, solve_scherk

coef = st.floats(-3.0, 3.0)


@st.composite
def jets(draw):
    return Jet2(draw(st.floats(-2.0, 2.0)), draw(st.floats(0.2, 3.0)), draw(coef), draw(coef),
                draw(coef), draw(coef), draw(coef), draw(coef))


@st.composite
def isometries(draw):
    m = compose(MobiusIsometry.rotation_about_i(draw(st.floats(0, 2 * math.pi))),
                MobiusIsometry(1.0, -draw(st.floats(-2, 2)), 0.0, draw(st.floats(0.3, 3.0))))
    if draw(st.booleans()):
        m = compose(MobiusIsometry.reflection(), m)
    return m


def _minimal_at_p(ux, uxy, uyy):
    """Jet at (0, 1) with u_y = 0 satisfying u_xx = -W^2 u_yy."""
    return Jet2(0.0, 1.0, 0.0, ux, 0.0, -(1 + ux * ux) * uyy, uxy, uyy)


# closed forms -----------------------------------------------------------------

def test_zero_jet():
    j = Jet2(0.0, 1.0)
    raw, B, N = second_fundamental_form(j)
    assert raw == (0.0, 0.0, 0.0)
    assert np.allclose(B, 0.0)
    assert np.allclose(N, (0.0, 0.0, 1.0))
    assert extrinsic_curvature(j) == 0.0


@pytest.mark.parametrize("a", [0.25, 1.0, 4.0])
def test_linear_jet_coefficients(a):
    j = Jet2(0.0, 1.0, 0.0, a)
    W = math.sqrt(1 + a * a)
    raw, _, N = second_fundamental_form(j)
    assert raw == pytest.approx((0.0, a / W, 0.0), abs=1e-15)
    assert N == pytest.approx(np.array([-a, 0.0, 1.0]) / W)
    assert extrinsic_curvature(j) == pytest.approx(-a * a / (1 + a * a) ** 2, abs=1e-15)
    j2 = Jet2(0.0, 2.0, 0.0, a)
    assert extrinsic_curvature(j2) == pytest.approx(-4 * a * a / (1 + 4 * a * a) ** 2, abs=1e-15)


def test_quarter_at_unit_slope():
    assert extrinsic_curvature(Jet2(0.0, 1.0, 0.0, 1.0)) == -0.25


@pytest.mark.parametrize("x", [-1.0, 0.0, 2.5])
def test_log_y_first_coefficient(x):
    j = Jet2(x, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0)
    raw, _, _ = second_fundamental_form(j)
    assert raw[0] == pytest.approx(-1.0 / j.W, abs=1e-15)


@given(jets())
def test_nu_is_inverse_w(j):
    sd = shape_data(j) if abs(extrinsic_curvature(j)) > 1e-8 else None
    N = unit_normal(j)
    assert abs(N[2] - 1.0 / j.W) < 1e-12
    metric_norm = math.sqrt((N[0] ** 2 + N[1] ** 2) / j.y ** 2 + N[2] ** 2)
    assert metric_norm == pytest.approx(1.0, abs=1e-12)
    if sd is not None:
        assert abs(sd.nu - 1.0 / j.W) < 1e-12


@given(jets())
def test_frame_determinant_is_extrinsic_curvature(j):
    _, (L, M, N2), _ = second_fundamental_form(j)
    assert L * N2 - M * M == pytest.approx(extrinsic_curvature(j), rel=1e-9, abs=1e-12)


# normalisation and isometry invariance -------------------------------------------------

@given(jets(), isometries())
def test_isometry_invariance(j, m):
    jt = transport_jet(j, m)
    K0, K1 = extrinsic_curvature(j), extrinsic_curvature(jt)
    assert abs(K1 - K0) < 1e-9 * max(1.0, abs(K0))
    assert jt.W == pytest.approx(j.W, rel=1e-9)


@given(jets())
def test_normalize_jet(j):
    jn, m = normalize_jet(j)
    assert (jn.x, jn.y, jn.uy) == (0.0, 1.0, 0.0)
    w = complex(m(complex(j.x, j.y)))
    assert abs(w - 1j) < 1e-9
    assert jn.ux >= 0
    assert extrinsic_curvature(jn) == pytest.approx(extrinsic_curvature(j), rel=1e-9, abs=1e-12)


@given(coef, coef, coef)
def test_normalized_formula_agrees(ux, uxy, uyy):
    j = _minimal_at_p(ux, uxy, uyy)
    K, k1, T, defect = normalized_curvature_at_p(j)
    assert abs(defect) < 1e-12
    assert K == pytest.approx(extrinsic_curvature(j), rel=1e-9, abs=1e-12)
    assert K <= 0.0
    if uyy == 0 and uxy + ux == 0:
        assert K == 0.0
    elif uyy * uyy + (uxy + ux) ** 2 > 1e-300:     # not lost to underflow
        assert K < 0.0
    assert k1 == pytest.approx(math.sqrt(-K))
    assert T == uxy + ux


@given(jets(), coef)
def test_normalized_formula_on_transported_jets(j, c):
    # make the jet minimal at its normalised point, then move it back
    jn, m = normalize_jet(j)
    jm = Jet2(0.0, 1.0, jn.u, jn.ux, 0.0, -jn.W ** 2 * jn.uyy, jn.uxy, jn.uyy)
    back = transport_jet(jm, m.inverse())
    jn2, _ = normalize_jet(back)
    K, _, _, _ = normalized_curvature_at_p(jn2, tol=1e-6 * max(1.0, abs(jn2.uxx)))
    assert abs(K - extrinsic_curvature(back)) < 1e-9 * max(1.0, abs(K))


def test_linear_consistency():
    for a in (0.25, 1.0, 4.0):
        K, _, T, _ = normalized_curvature_at_p(Jet2(0.0, 1.0, 0.0, a))
        assert T == a
        assert K == pytest.approx(-a * a / (1 + a * a) ** 2, abs=1e-15)


def test_diagonal_shape_operator():
    c = 0.7
    K, k1, T, _ = normalized_curvature_at_p(Jet2(0.0, 1.0, 0.0, 0.0, 0.0, -c, 0.0, c))
    assert K == pytest.approx(-c * c)
    fr = principal_frame(Jet2(0.0, 1.0, 0.0, 0.0, 0.0, -c, 0.0, c))
    assert abs(abs(fr.dir1[1]) - 1.0) < 1e-12          # along Y
    assert abs(abs(fr.dir2[0]) - 1.0) < 1e-12          # along X


def test_precondition_violations():
    with pytest.raises(CurvatureError):
        normalized_curvature_at_p(Jet2(0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0))  # not minimal
    with pytest.raises(CurvatureError):
        normalized_curvature_at_p(Jet2(0.5, 1.0))
    with pytest.raises(CurvatureError):
        normalized_curvature_at_p(Jet2(0.0, 1.0, 0.0, 0.0, 0.3))
    with pytest.raises(CurvatureError):
        Jet2(0.0, 0.0)


# principal frames -----------------------------------------------------------------

def test_frame_of_unit_slope():
    fr = principal_frame(Jet2(0.0, 1.0, 0.0, 1.0))
    assert fr.k1 == pytest.approx(0.5)
    s = 1 / math.sqrt(2)
    assert abs(abs(fr.dir1[0] * s + fr.dir1[1] * s) - 1.0) < 1e-12     # parallel to X + Y
    assert abs(abs(fr.dir2[0] * s - fr.dir2[1] * s) - 1.0) < 1e-12     # parallel to X - Y
    assert fr.dir1[0] * fr.dir2[1] - fr.dir1[1] * fr.dir2[0] == pytest.approx(1.0)


def test_umbilic_has_no_frame():
    with pytest.raises(CurvatureError):
        principal_frame(Jet2(0.0, 1.0))


@given(coef, coef, coef)
def test_eigen_oracle(ux, uxy, uyy):
    j = _minimal_at_p(ux, uxy, uyy)
    assume(abs(extrinsic_curvature(j)) > 1e-6)
    fr = principal_frame(j)
    sd = shape_data(j)
    S = np.array([[sd.L, sd.M], [sd.M, sd.N2]])
    d1 = np.array(fr.dir1)
    assert np.abs(S @ d1 - fr.k1 * d1).max() < 1e-10 * max(1.0, fr.k1)
    assert abs(d1 @ np.array(fr.dir2)) < 1e-12
    # the vectorised route and the 2x2 system give the same line
    assert abs(abs(np.dot(sd.dir1, d1)) - 1.0) < 1e-9


@given(jets())
def test_shape_data_directions_orthonormal(j):
    assume(abs(extrinsic_curvature(j)) > 1e-6)
    sd = shape_data(j)
    d1, d2 = np.array(sd.dir1), np.array(sd.dir2)
    assert abs(d1 @ d2) < 1e-12
    assert abs(np.linalg.norm(d1) - 1) < 1e-12
    assert 0.0 <= sd.theta < 2 * math.pi


def test_theta_modulo_pi_on_minimal_jets():
    rng = np.random.default_rng(5)
    for _ in range(50):
        ux, uxy, uyy = rng.uniform(-2, 2, 3)
        j = _minimal_at_p(ux, uxy, uyy)
        if abs(extrinsic_curvature(j)) < 1e-6 or abs(ux) < 0.05:
            continue
        m = compose(MobiusIsometry.rotation_about_i(rng.uniform(0, 6)), MobiusIsometry(1.0, rng.uniform(-1, 1), 0.0, rng.uniform(0.5, 2)))
        jt = transport_jet(j, m)
        # theta depends on the frame sign only through a shift by pi
        assert abs(math.remainder(theta(jt) - shape_data(jt).theta, math.pi)) < 1e-8


def test_theta_undefined_for_horizontal_plane():
    with pytest.raises(CurvatureError):
        theta(Jet2(0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0))


def test_vectorised_matches_scalar():
    rng = np.random.default_rng(11)
    y = rng.uniform(0.2, 3, 40)
    c = rng.uniform(-2, 2, (40, 5))
    arr = shape_arrays(y, *c.T)
    for k in range(40):
        j = Jet2(0.0, y[k], 0.0, *c[k])
        assert arr["K"][k] == pytest.approx(extrinsic_curvature(j), rel=1e-12, abs=1e-14)
        assert arr["nu"][k] == pytest.approx(1 / j.W, rel=1e-14)


# jet fitting -------------------------------------------------------------------

@pytest.fixture(scope="module")
def mesh():
    return triangulate(build_symmetric_domain(1.0), RefinementConfig(h=0.04))


def _field(mesh, f):
    w = disk_to_half_plane_c(mesh.z)
    return ScalarField(mesh, f(w.real, w.imag))


@pytest.mark.parametrize("scale", [0.0, 6.0, 10.0])
def test_fit_reproduces_quadratics(mesh, scale):
    j = fit_jet(_field(mesh, lambda x, y: x), ModelPoint.disk(0.1, -0.05), scale=scale)
    assert j.as_array()[1:] == pytest.approx([1, 0, 0, 0, 0], abs=1e-10)
    j = fit_jet(_field(mesh, lambda x, y: x * y), ModelPoint.disk(0.0, 0.0), scale=scale)
    assert (j.uxx, j.uxy, j.uyy) == pytest.approx((0.0, 1.0, 0.0), abs=1e-10)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_fit_exact_on_random_quadratic(mesh, c0, c1, c2, c3, c4, c5):
    f = _field(mesh, lambda x, y: c0 + c1 * x + c2 * y + 0.5 * c3 * x * x + c4 * x * y + 0.5 * c5 * y * y)
    j = fit_jet(f, 17)
    x, y = j.x, j.y
    expect = [c0 + c1 * x + c2 * y + 0.5 * c3 * x * x + c4 * x * y + 0.5 * c5 * y * y,
              c1 + c3 * x + c4 * y, c2 + c4 * x + c5 * y, c3, c4, c5]
    assert j.as_array() == pytest.approx(expect, abs=1e-8)


def test_jet_field_exact_on_constant(mesh):
    J = JetField(ScalarField(mesh, np.full(mesh.n_nodes, 3.0)))
    assert np.all(J.coef[J.valid, 1:] == 0.0)
    assert np.all(J.arrays["K"][J.valid] == 0.0)


def test_exact_jet_field_interface(mesh):
    E = ExactJetField(mesh, lambda x, y: (x, np.ones_like(x), 0 * x, 0 * x, 0 * x, 0 * x))
    j = E.jet_at(0.1 + 0.1j)
    assert j.ux == 1.0 and E.valid.all()
    assert E.node_jet(0).u == pytest.approx(disk_to_half_plane_c(mesh.z[0]).real)


def test_two_ring_patch_minimum(mesh):
    f = _field(mesh, lambda x, y: x)
    for i in range(0, mesh.n_nodes, 41):
        if not mesh.boundary[i]:
            assert len(mesh.ring(i, 2)) >= 6


@pytest.mark.xfail(strict=True, reason="half-plane quadratic fits do not commute with the rotation about (0, 1); "
                   "their cubic truncation leaves u_y of order 1e-3 at the centre")
def test_scherk_gradient_vanishes_at_center(scherk2):
    u, _, _ = scherk2
    j = fit_jet(u, ModelPoint.disk(0.0, 0.0))
    assert (j.x, j.y) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert abs(j.ux) < 1e-6 and abs(j.uy) < 1e-6


@pytest.mark.parametrize("scale", [0.0, 6.0, 10.0])
def test_scherk_gradient_vanishes_at_center_centred_fit(scherk2, scale):
    u, _, _ = scherk2
    j = fit_jet(u, ModelPoint.disk(0.0, 0.0), scale=scale, chart="centred")
    assert (j.x, j.y) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert abs(j.ux) < 1e-6 and abs(j.uy) < 1e-6


def test_centred_fit_matches_half_plane_fit_to_truncation(linear_solutions):
    u = linear_solutions[1.0]
    p = ModelPoint.disk(0.1, 0.05)
    a = fit_jet(u, p).as_array()
    b = fit_jet(u, p, chart="centred", degree=3).as_array()
    assert np.abs(a - b)[:3].max() < 1e-3
    assert np.abs(a - b)[3:].max() < 2e-2


def test_fit_chart_validation(scherk2):
    u, _, _ = scherk2
    with pytest.raises(ValueError):
        fit_jet(u, 0, chart="klein")
    with pytest.raises(ValueError):
        JetField(u, chart="klein")


@given(st.floats(0.0, 0.25), st.floats(0.0, 2 * math.pi))
def test_centred_fit_exact_on_centred_quadratics(d1_mesh, r, a):
    # quadratics in the recentred disk coordinate are reproduced exactly
    zp = r * complex(math.cos(a), math.sin(a))
    zeta = (d1_mesh.z - zp) / (1.0 - np.conj(zp) * d1_mesh.z)
    v = ScalarField(d1_mesh, 1.0 + zeta.real - 2.0 * zeta.imag + zeta.real * zeta.imag)
    j = fit_jet(v, ModelPoint.disk(zp.real, zp.imag), chart="centred")
    # pull back by hand: grad_w = J^T grad_zeta with J the Jacobian of zeta(w)
    w = complex(j.x, j.y)
    dz = -2j / (1j + w) ** 2 / (1.0 - abs(zp) ** 2)
    gx = (1.0 * dz).real * 1.0 + dz.imag * -2.0
    gy = -dz.imag * 1.0 + dz.real * -2.0
    assert (j.u, j.ux, j.uy) == pytest.approx((1.0, gx, gy), abs=1e-9)


def test_frame_context_seed_and_sign(scherk2):
    u, _, _ = scherk2
    J = JetField(u, scale=6.0)
    F = FrameContext(J)
    assert abs(u.mesh.z[F.seed]) < 0.05
    ok = F.sign != 0
    assert ok.mean() > 0.9
    assert np.all(np.isnan(F.theta[~ok]))


def test_minimal_relation_converges_under_refinement():
    # u_xx + W^2 u_yy at the normalised point equals y^2 times the equation's left side
    meds = []
    hs = (0.04, 0.02, 0.01)
    for h in hs:
        u, _, _ = solve_scherk(2.0, 4.0, SolverConfig(continuation=(1.0, 2.0, 4.0)),
                               mesh_cfg=RefinementConfig(h=h))
        J = JetField(u, scale=6.0)
        c, y = J.coef, J.w.imag
        sel = J.valid & (np.abs(u.mesh.z) < 0.45)
        d = np.abs(y * y * minimal_equation_lhs(y, c[:, 1], c[:, 2], c[:, 3], c[:, 4], c[:, 5]))[sel]
        # spot check the identity on one node through explicit normalisation
        i = int(np.flatnonzero(sel)[len(d) // 2])
        jn, _ = normalize_jet(J.node_jet(i))
        assert abs(jn.uxx + jn.W ** 2 * jn.uyy) == pytest.approx(
            abs(y[i] ** 2 * minimal_equation_lhs(y[i], *c[i, 1:])), rel=1e-6, abs=1e-10)
        meds.append(float(np.median(d)))
    order = np.polyfit(np.log(hs), np.log(meds), 1)[0]
    assert meds[0] > meds[1] > meds[2]
    assert order >= 1.0
