import numpy as np
import pytest

from ddgmps.mesh import build_mesh_1d, build_mesh_2d


def test_uniform_partition():
    m = build_mesh_1d((1.0, 3.0), 4)
    assert m.h == pytest.approx(0.5)
    assert m.centers == pytest.approx([1.25, 1.75, 2.25, 2.75])
    assert m.interfaces == pytest.approx([1.0, 1.5, 2.0, 2.5, 3.0])


def test_paper_scale_width():
    m = build_mesh_1d((-1.0, 1.0), 200)
    assert m.h == pytest.approx(0.01)


def test_single_cell_rejected():
    with pytest.raises(ValueError):
        build_mesh_1d((0.0, 1.0), 1)


def test_degenerate_interval_rejected():
    with pytest.raises(ValueError):
        build_mesh_1d((1.0, 1.0), 4)


def test_interfaces_monotone():
    m = build_mesh_1d((-2.0, 5.0), 37)
    assert np.all(np.diff(m.interfaces) > 0)
    assert np.allclose(np.diff(m.interfaces), m.h)


def test_mesh2d_aspect():
    m = build_mesh_2d((0, 1), (0, 2), 10, 10)
    assert m.dx == pytest.approx(0.1)
    assert m.dy == pytest.approx(0.2)
    assert m.kappa == pytest.approx(2.0)
    assert build_mesh_2d((0, 1), (0, 1), 8, 8).kappa == 1.0
