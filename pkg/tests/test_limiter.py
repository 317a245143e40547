import numpy as np
import pytest

from conftest import random_positive_weight
from ddgmps.fields import DGField1D, DGField2D, basis_values, coeffs_from_point_values
from ddgmps.limiter import (Bounds, LimiterError, apply_limiter_1d,
                            apply_limiter_2d, bounds_from_initial_1d,
                            cell_average_weights_2d, mps_violation_1d,
                            mps_violation_2d, build_test_set_2d)
from ddgmps.mesh import build_mesh_1d, build_mesh_2d
from ddgmps.weights import weighted_cell_data_1d


def unit_wcd(mesh, gamma):
    return weighted_cell_data_1d(mesh).with_gamma(gamma)


def test_limiter_hand_example():
    mesh = build_mesh_1d((0.0, 1.0), 2)
    c = np.array([[0.5, 0.6, 0.0], [0.5, 0.0, 0.0]])
    out = apply_limiter_1d(DGField1D(mesh, c), Bounds(0.0, 1.0), unit_wcd(mesh, 0.0))
    assert out.coeffs[0] == pytest.approx([0.5, 0.5, 0.0])
    vals = out.coeffs[0] @ basis_values(np.array([-1.0, 0.0, 1.0])).T
    assert vals == pytest.approx([0.0, 0.5, 1.0])
    assert out.coeffs[1] == pytest.approx([0.5, 0.0, 0.0])  # untouched cell


def test_limiter_identity_when_in_bounds(rng):
    mesh = build_mesh_1d((0.0, 1.0), 6)
    vals = rng.uniform(0.2, 0.8, size=(6, 3))
    c = coeffs_from_point_values(vals, 0.1)
    out = apply_limiter_1d(DGField1D(mesh, c), Bounds(0.0, 1.0), unit_wcd(mesh, 0.1))
    assert np.array_equal(out.coeffs, c)


def test_limiter_flat_cell_guard():
    mesh = build_mesh_1d((0.0, 1.0), 2)
    c = np.array([[0.5, 0.0, 0.7], [0.25, 0.0, 0.0]])  # cell 0 flat at test points
    out = apply_limiter_1d(DGField1D(mesh, c), Bounds(0.0, 1.0), unit_wcd(mesh, 0.0))
    # values at {-1, 0, 1} are {0.5+0.7*2/3 = 0.966, 0.5-0.7/3, 0.966}: in bounds
    assert np.allclose(out.coeffs, c)


def test_limiter_average_preservation_and_bounds(rng):
    mesh = build_mesh_1d((0.0, 2.0), 10)
    for _ in range(100):
        w = random_positive_weight(rng)
        wcd = weighted_cell_data_1d(mesh, w).with_gamma(0.1)
        c = rng.normal(0.5, 1.0, size=(10, 3))
        wb = np.stack([wcd.m1, wcd.mx, wcd.mx2 - wcd.m1 / 3.0], axis=1)
        ubar = (c * wb).sum(1) / wcd.m1
        # recenter so averages are inside the box, as the scheme guarantees
        c[:, 0] += np.clip(ubar, 0.05, 0.95) - ubar
        f = DGField1D(mesh, c)
        out = apply_limiter_1d(f, Bounds(0.0, 1.0), wcd)
        before = (c * wb).sum(1)
        after = (out.coeffs * wb).sum(1)
        assert np.all(np.abs(after - before) <= 1e-13 * np.maximum(1, np.abs(before)))
        assert mps_violation_1d(out, Bounds(0.0, 1.0), 0.1) <= 1e-12
        third = apply_limiter_1d(out, Bounds(0.0, 1.0), wcd)
        assert np.allclose(third.coeffs, out.coeffs, atol=1e-14)


def test_limiter_hard_error_names_cell():
    mesh = build_mesh_1d((0.0, 1.0), 3)
    c = np.zeros((3, 3))
    c[2, 0] = 1.5  # average far outside [0, 1]
    with pytest.raises(LimiterError, match="cell 2"):
        apply_limiter_1d(DGField1D(mesh, c), Bounds(0.0, 1.0), unit_wcd(mesh, 0.1))


def test_limiter_clamp_warns_on_small_violation():
    mesh = build_mesh_1d((0.0, 1.0), 2)
    c = np.zeros((2, 3))
    c[0, 0] = 1.0 + 5e-8
    c[0, 1] = 0.3
    with pytest.warns(RuntimeWarning):
        out = apply_limiter_1d(DGField1D(mesh, c), Bounds(0.0, 1.0), unit_wcd(mesh, 0.0))
    assert mps_violation_1d(out, Bounds(0.0, 1.0), 0.0) <= 1e-7


def test_mps_violation_reference_values():
    mesh = build_mesh_1d((0.0, 1.0), 4)
    lo = np.zeros((4, 3))
    lo[:, 0] = 0.0
    assert mps_violation_1d(DGField1D(mesh, lo), Bounds(0.0, 1.0), 0.1) == pytest.approx(0.0)
    mid = np.zeros((4, 3))
    mid[:, 0] = 0.5
    assert mps_violation_1d(DGField1D(mesh, mid), Bounds(0.0, 1.0), 0.1) == pytest.approx(-0.5)


def test_bounds_from_initial_sampling():
    mesh = build_mesh_1d((0.0, 1.0), 16)
    b = bounds_from_initial_1d(lambda x: np.sin(2 * np.pi * np.asarray(x)), mesh, 0.1)
    assert b.lo == pytest.approx(-1.0, abs=1e-3)
    assert b.hi == pytest.approx(1.0, abs=1e-3)


def test_build_test_set_2d_counts():
    ts = build_test_set_2d(0.1, 0.1, 3)
    assert len(ts.points) == 14  # 9 + 9 - 4 shared corners
    assert np.all(np.abs(ts.points) <= 1.0)
    ts0 = build_test_set_2d(0.0, 0.0, 3)
    assert len(ts0.points) == 9  # the gamma line coincides with the Lobatto line
    ts5 = build_test_set_2d(0.0, 0.0, 5)
    assert len(ts5.points) == 21  # 15 + 15 - 9 shared


def test_limiter_2d_locality_and_bounds(rng):
    mesh = build_mesh_2d((0, 1), (0, 1), 4, 4)
    ts = build_test_set_2d(0.1, 0.1, 3)
    aw = cell_average_weights_2d(mesh)
    c = np.zeros((4, 4, 3, 3))
    c[..., 0, 0] = 0.5
    c[2, 1, 1, 1] = 0.9  # corner violation in one cell only
    f = DGField2D(mesh, c.copy())
    out = apply_limiter_2d(f, Bounds(0.0, 1.0), aw, ts)
    assert mps_violation_2d(out, Bounds(0.0, 1.0), ts) <= 1e-12
    changed = np.abs(out.coeffs - c).reshape(4, 4, 9).max(axis=-1) > 0
    assert changed[2, 1]
    assert changed.sum() == 1
    # averages preserved
    assert np.allclose(out.coeffs[..., 0, 0], c[..., 0, 0], atol=1e-14)


def test_limiter_2d_weighted_average_preserved(rng):
    mesh = build_mesh_2d((0, 2), (0, 2), 3, 3)
    w = lambda x, y: 2.0 + np.sin(np.pi * x) * np.cos(np.pi * y)
    aw = cell_average_weights_2d(mesh, w)
    ts = build_test_set_2d(0.1, 0.1, 3)
    for _ in range(50):
        c = rng.normal(0.5, 0.8, size=(3, 3, 9))
        ubar = (c * aw).sum(-1) / aw[..., 0]
        c[..., 0] += np.clip(ubar, 0.05, 0.95) - ubar
        f = DGField2D(mesh, c.reshape(3, 3, 3, 3).copy())
        out = apply_limiter_2d(f, Bounds(0.0, 1.0), aw, ts)
        before = (c * aw).sum(-1)
        after = (out.coeffs.reshape(3, 3, 9) * aw).sum(-1)
        assert np.all(np.abs(after - before) <= 1e-13 * np.maximum(1, np.abs(before)))
        assert mps_violation_2d(out, Bounds(0.0, 1.0), ts) <= 1e-12
        again = apply_limiter_2d(out, Bounds(0.0, 1.0), aw, ts)
        assert np.allclose(again.coeffs, out.coeffs, atol=1e-14)
