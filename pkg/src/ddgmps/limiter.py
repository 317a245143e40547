"""Test sets, the cell-average-preserving scaling limiter, and the bound monitor."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import DGField1D, DGField2D, basis_values
from .mesh import Mesh2D
from .quadrature import VOLUME_RULE, gauss_lobatto_rule
from .weights import WeightedCellData1D

_FLAT_TOL = 1e-14  # |ubar - extremum| below this counts as a flat cell


class LimiterError(RuntimeError):
    """A cell average left [c1, c2] by more than the hard tolerance."""


@dataclass(frozen=True)
class Bounds:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ConfigError(f"bounds [{self.lo}, {self.hi}] are inverted")


def bounds_from_initial_1d(u0, mesh, gamma, rule=VOLUME_RULE, oversample=32) -> Bounds:
    xi = np.unique(np.concatenate([rule.nodes, [-1.0, gamma, 1.0],
                                   np.linspace(-1, 1, oversample)]))
    x = mesh.centers[:, None] + 0.5 * mesh.h * xi[None, :]
    u = np.asarray(u0(x), dtype=float)
    return Bounds(float(u.min()), float(u.max()))


def bounds_from_initial_2d(u0, mesh: Mesh2D, gx, gy, L=3, rule=VOLUME_RULE,
                           oversample=32) -> Bounds:
    lob = gauss_lobatto_rule(L)
    xi = np.unique(np.concatenate([rule.nodes, lob.nodes, [-1.0, gx, gy, 1.0],
                                   np.linspace(-1, 1, oversample)]))
    x = mesh.x.centers[:, None] + 0.5 * mesh.dx * xi[None, :]
    y = mesh.y.centers[:, None] + 0.5 * mesh.dy * xi[None, :]
    u = np.asarray(u0(x[:, None, :, None], y[None, :, None, :]), dtype=float)
    return Bounds(float(u.min()), float(u.max()))


def check_points_1d(gamma):
    return np.array([-1.0, gamma, 1.0])


@dataclass(frozen=True)
class TestSet2D:
    """Union of (gamma-line x Lobatto) and (Lobatto x gamma-line) points."""

    points: np.ndarray      # (npts, 2) reference coordinates
    eval_matrix: np.ndarray  # (npts, 9), flattened tensor basis values


def build_test_set_2d(gx, gy, L) -> TestSet2D:
    lob = gauss_lobatto_rule(L).nodes
    pts = {}
    for xi in (-1.0, gx, 1.0):
        for eta in lob:
            pts[(round(xi, 14), round(eta, 14))] = (xi, eta)
    for xi in lob:
        for eta in (-1.0, gy, 1.0):
            pts[(round(xi, 14), round(eta, 14))] = (xi, eta)
    points = np.array(sorted(pts.values()))
    px = basis_values(points[:, 0])
    py = basis_values(points[:, 1])
    emat = np.einsum("pa,pb->pab", px, py).reshape(len(points), 9)
    return TestSet2D(points, emat)


def _theta(ubar, lo, hi, m1, m2, warn_tol, hard_tol, what):
    viol = np.maximum(lo - ubar, ubar - hi)
    worst = viol.max(initial=0.0)
    if worst > hard_tol:
        j = int(np.argmax(viol))
        raise LimiterError(
            f"{what} cell {j}: average {ubar.flat[j] if ubar.ndim else ubar[j]:.17g} "
            f"outside [{lo}, {hi}] by {worst:.3e}")
    if worst > warn_tol:
        warnings.warn(f"{what}: cell average outside bounds by {worst:.3e}; clamped",
                      RuntimeWarning, stacklevel=3)
    num_lo = np.clip(ubar - lo, 0.0, None)
    num_hi = np.clip(hi - ubar, 0.0, None)
    den_lo = ubar - m1
    den_hi = m2 - ubar
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(den_lo > _FLAT_TOL, num_lo / np.maximum(den_lo, _FLAT_TOL), np.inf)
        r2 = np.where(den_hi > _FLAT_TOL, num_hi / np.maximum(den_hi, _FLAT_TOL), np.inf)
    return np.minimum(1.0, np.minimum(r1, r2))


def apply_limiter_1d(field: DGField1D, bounds: Bounds, wcd: WeightedCellData1D,
                     warn_tol=1e-10, hard_tol=1e-6) -> DGField1D:
    """Scale every cell polynomial about its weighted average so the test-set
    values land in [c1, c2].  The weighted average is preserved exactly."""
    c = field.coeffs
    emat = basis_values(check_points_1d(wcd.gamma))   # (3, 3)
    vals = c @ emat.T
    wb = np.stack([wcd.m1, wcd.mx, wcd.mx2 - wcd.m1 / 3.0], axis=1)
    ubar = (c * wb).sum(axis=1) / wcd.m1
    theta = _theta(ubar, bounds.lo, bounds.hi, vals.min(axis=1), vals.max(axis=1),
                   warn_tol, hard_tol, "limiter-1d")
    out = theta[:, None] * c
    out[:, 0] += (1.0 - theta) * ubar
    return DGField1D(field.mesh, out)


def apply_limiter_2d(field: DGField2D, bounds: Bounds, avg_weights: np.ndarray,
                     testset: TestSet2D, warn_tol=1e-10, hard_tol=1e-6) -> DGField2D:
    """2D analogue; avg_weights is the (Nx, Ny, 9) array of M-weighted basis
    moments (first entry = <1>)."""
    nx, ny = field.coeffs.shape[:2]
    c = field.coeffs.reshape(nx, ny, 9)
    vals = c @ testset.eval_matrix.T                 # (nx, ny, npts)
    ubar = (c * avg_weights).sum(axis=-1) / avg_weights[..., 0]
    theta = _theta(ubar, bounds.lo, bounds.hi, vals.min(axis=-1), vals.max(axis=-1),
                   warn_tol, hard_tol, "limiter-2d")
    out = theta[..., None] * c
    out[..., 0] += (1.0 - theta) * ubar
    return DGField2D(field.mesh, out.reshape(nx, ny, 3, 3))


def cell_average_weights_2d(mesh: Mesh2D, weight=None, rule=VOLUME_RULE) -> np.ndarray:
    """Per-cell M-weighted basis moments <phi_a phi_b>_ij, shape (Nx, Ny, 9)."""
    nx, ny = mesh.x.n, mesh.y.n
    if weight is None:
        w = np.zeros(9)
        w[0] = 1.0
        return np.broadcast_to(w, (nx, ny, 9)).copy()
    xq = mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]
    yq = mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]
    mq = np.asarray(weight(xq[:, None, :, None], yq[None, :, None, :]), dtype=float)
    mq = np.broadcast_to(mq, (nx, ny, rule.n, rule.n))
    phi = basis_values(rule.nodes)
    bp = np.einsum("pa,qb->pqab", phi, phi).reshape(rule.n, rule.n, 9)
    return np.einsum("ijpq,p,q,pqk->ijk", mq, rule.weights, rule.weights, bp)


def mps_violation_1d(field: DGField1D, bounds: Bounds, gamma) -> float:
    vals = field.coeffs @ basis_values(check_points_1d(gamma)).T
    return float(max((bounds.lo - vals).max(), (vals - bounds.hi).max()))


def mps_violation_2d(field: DGField2D, bounds: Bounds, testset: TestSet2D) -> float:
    nx, ny = field.coeffs.shape[:2]
    vals = field.coeffs.reshape(nx, ny, 9) @ testset.eval_matrix.T
    return float(max((bounds.lo - vals).max(), (vals - bounds.hi).max()))
