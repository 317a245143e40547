import numpy as np
import pytest

from ddgmps.fields import (DGField1D, basis_values, coeffs_from_point_values,
                           eval_poly, project_1d, project_2d, restrict_2d,
                           trace_pair, weighted_mass_matrix_1d)
from ddgmps.mesh import build_mesh_1d, build_mesh_2d
from ddgmps.quadrature import VOLUME_RULE

WEIGHT = lambda x: 4 * x * np.exp(-np.asarray(x) ** 2 + 1)


def test_eval_basis_members():
    assert eval_poly(np.array([1.0, 0, 0]), 0.7) == pytest.approx(1.0)
    assert eval_poly(np.array([0, 1.0, 0]), -1.0) == pytest.approx(-1.0)
    assert eval_poly(np.array([0, 0, 1.0]), 1.0) == pytest.approx(2 / 3)


def test_trace_pair_continuous_field_has_no_jumps(rng):
    mesh = build_mesh_1d((0.0, 1.0), 8)
    # globally continuous: u = x restricted per cell
    coeffs = np.zeros((8, 3))
    coeffs[:, 0] = mesh.centers
    coeffs[:, 1] = mesh.h / 2
    f = DGField1D(mesh, coeffs)
    for k in range(1, 8):
        um, up = trace_pair(f, k)
        assert up - um == pytest.approx(0.0, abs=1e-15)
    # periodic wrap sees the drop from 1 to 0
    um, up = trace_pair(f, 8)
    assert up - um == pytest.approx(-1.0)
    um0, up0 = trace_pair(f, 0)
    assert up0 - um0 == pytest.approx(-1.0)


def test_trace_derivatives_scale():
    mesh = build_mesh_1d((0.0, 1.0), 4)
    coeffs = np.zeros((4, 3))
    coeffs[:, 2] = 1.0  # u = xi^2 - 1/3 per cell
    f = DGField1D(mesh, coeffs)
    dm, dp = trace_pair(f, 1, order=1)
    assert dm == pytest.approx(2 * 2 / mesh.h)
    assert dp == pytest.approx(-2 * 2 / mesh.h)
    sm, sp = trace_pair(f, 1, order=2)
    assert sm == pytest.approx(2 * 4 / mesh.h**2)
    assert sp == pytest.approx(sm)


def test_trace_jump_average_identity(rng):
    mesh = build_mesh_1d((0.0, 1.0), 6)
    f = DGField1D(mesh, rng.normal(size=(6, 3)))
    for k in range(7):
        um, up = trace_pair(f, k)
        jump, avg = up - um, 0.5 * (up + um)
        assert avg + jump / 2 == pytest.approx(up, rel=1e-14, abs=1e-14)
        assert avg - jump / 2 == pytest.approx(um, rel=1e-14, abs=1e-14)


def test_trace_out_of_range():
    mesh = build_mesh_1d((0.0, 1.0), 4)
    f = DGField1D(mesh, np.zeros((4, 3)))
    with pytest.raises(IndexError):
        trace_pair(f, 5)


def test_mass_matrix_unweighted_diagonal():
    mesh = build_mesh_1d((0.0, 1.0), 5)
    m = weighted_mass_matrix_1d(mesh)
    h = mesh.h
    for j in range(5):
        assert np.allclose(m[j], np.diag([h, h / 3, 4 * h / 45]), atol=1e-16)


def test_mass_matrix_scales_linearly():
    mesh = build_mesh_1d((1.0, 3.0), 4)
    m1 = weighted_mass_matrix_1d(mesh, weight=lambda x: np.full_like(np.asarray(x), 2.0))
    m0 = weighted_mass_matrix_1d(mesh)
    assert np.allclose(m1, 2 * m0, rtol=1e-13)


def test_mass_matrix_weighted_oracle():
    # dense-quadrature oracle values for M = 4x exp(1-x^2) on the cell [1, 1.5]
    mesh = build_mesh_1d((1.0, 3.0), 4)
    m = weighted_mass_matrix_1d(mesh, weight=WEIGHT)[0]
    oracle = np.array([
        [1.42699041e+00, -1.94746531e-01, 5.42810041e-04],
        [-1.94746531e-01, 4.76206279e-01, -5.11298695e-02],
        [5.42810041e-04, -5.11298695e-02, 1.26913539e-01]])
    assert np.allclose(m, oracle, rtol=1e-8)
    assert np.allclose(m, m.T, atol=1e-14)
    assert np.all(np.linalg.eigvalsh(m) > 0)


def test_mass_matrix_rejects_nonpositive_weight():
    mesh = build_mesh_1d((-1.0, 1.0), 4)
    with pytest.raises(ValueError):
        weighted_mass_matrix_1d(mesh, weight=lambda x: np.asarray(x))


def test_projection_reproduces_constants():
    mesh = build_mesh_1d((1.0, 3.0), 6)
    f = project_1d(lambda x: np.full_like(np.asarray(x), 5.0), mesh, weight=WEIGHT)
    assert np.allclose(f.coeffs[:, 0], 5.0, atol=1e-13)
    assert np.allclose(f.coeffs[:, 1:], 0.0, atol=1e-13)


def test_projection_reproduces_quadratics():
    mesh = build_mesh_1d((0.0, 1.0), 4)
    f = project_1d(lambda x: 2 * np.asarray(x) ** 2 - x + 0.25, mesh)
    x = np.linspace(0, 1, 101)
    assert f.eval_at(x) == pytest.approx(2 * x**2 - x + 0.25, abs=1e-13)


def test_weighted_projection_preserves_weighted_averages():
    # frozen dense-quadrature oracle of <u0>_j / <1>_j on [1, 3] with N = 16
    mesh = build_mesh_1d((1.0, 3.0), 16)
    f = project_1d(lambda x: np.sin(np.asarray(x) ** 2 - 1), mesh, weight=WEIGHT)
    r = VOLUME_RULE
    xq = mesh.centers[:, None] + 0.5 * mesh.h * r.nodes[None, :]
    mq = WEIGHT(xq)
    uq = f.eval_ref(r.nodes)
    ubar = ((mq * uq) @ r.weights) / (mq @ r.weights)
    oracle = {0: 0.1262216882190631, 7: 0.38870335609198498, 15: 0.94383977014572917}
    for j, val in oracle.items():
        assert ubar[j] == pytest.approx(val, rel=1e-10)


def test_projection_idempotent(rng):
    from ddgmps.fields import reproject_field_1d
    mesh = build_mesh_1d((1.0, 3.0), 8)
    f = DGField1D(mesh, rng.normal(size=(8, 3)))
    g = reproject_field_1d(f, weight=WEIGHT)
    assert np.allclose(g.coeffs, f.coeffs, atol=1e-14)


def test_point_value_interpolation_roundtrip(rng):
    for g in (-0.2, 0.0, 0.1, 0.28):
        vals = rng.normal(size=(5, 3))
        c = coeffs_from_point_values(vals, g)
        pts = np.array([-1.0, g, 1.0])
        assert np.allclose(eval_poly(c, pts), vals, atol=1e-13)


def test_project_2d_reproduces_biquadratic():
    mesh = build_mesh_2d((0, 1), (0, 2), 3, 4)
    u = lambda x, y: (1 + x + x**2) * (2 - y + 0.5 * y**2)
    f = project_2d(u, mesh)
    got = f.eval_ref(np.array([-0.3, 0.4]), np.array([0.9]))
    xg = mesh.x.centers[:, None] + 0.5 * mesh.dx * np.array([-0.3, 0.4])[None, :]
    yg = mesh.y.centers[:, None] + 0.5 * mesh.dy * np.array([0.9])[None, :]
    want = u(xg[:, None, :, None], yg[None, :, None, :])
    assert np.allclose(got, want, rtol=1e-12)


def test_project_2d_weighted_constant():
    mesh = build_mesh_2d((1, 2), (1, 2), 3, 3)
    w = lambda x, y: 1.0 + 0.5 * np.sin(np.pi * x) * np.cos(np.pi * y)
    f = project_2d(lambda x, y: np.broadcast_to(3.0, np.broadcast_shapes(np.shape(x), np.shape(y))),
                   mesh, weight=w)
    c = f.coeffs
    assert np.allclose(c[..., 0, 0], 3.0, atol=1e-12)
    mask = np.ones((3, 3), dtype=bool)
    mask[0, 0] = False
    assert np.allclose(c[:, :, mask], 0.0, atol=1e-12)


def test_restrict_2d_preserves_averages(rng):
    mesh = build_mesh_2d((0, 1), (0, 1), 6, 4)
    fine = project_2d(lambda x, y: np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y) + x * y,
                      mesh)
    coarse = restrict_2d(fine)
    assert coarse.mesh.x.n == 3 and coarse.mesh.y.n == 2
    # total integral is conserved by L2 projection
    fine_total = fine.coeffs[..., 0, 0].sum() * mesh.cell_area
    coarse_total = coarse.coeffs[..., 0, 0].sum() * coarse.mesh.cell_area
    assert coarse_total == pytest.approx(fine_total, rel=1e-12, abs=1e-13)
