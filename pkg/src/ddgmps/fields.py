"""Degree-2 modal cell polynomials, traces, and weighted L2 projection.

The per-cell basis on the reference coordinate xi in [-1, 1] is
{1, xi, xi^2 - 1/3}; it is orthogonal in the unweighted inner product, and its
tensor product spans the 2D local space.  A DG field stores one coefficient
vector (1D) or 3x3 block (2D) per cell.
"""

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh1D, Mesh2D
from .quadrature import VOLUME_RULE, QuadratureRule

NBASIS = 3
# diag of int phi_a phi_b over [-1,1] in the average convention
_DIAG_MOMENTS = np.array([1.0, 1.0 / 3.0, 4.0 / 45.0])


def basis_values(xi):
    """phi_a(xi) for the modal basis, shape (*xi.shape, 3)."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape + (NBASIS,))
    out[..., 0] = 1.0
    out[..., 1] = xi
    out[..., 2] = xi * xi - 1.0 / 3.0
    return out


def basis_derivs(xi):
    """d phi_a / d xi, shape (*xi.shape, 3)."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape + (NBASIS,))
    out[..., 0] = 0.0
    out[..., 1] = 1.0
    out[..., 2] = 2.0 * xi
    return out


# traces of the basis at the cell endpoints
PHI_L = basis_values(-1.0)
PHI_R = basis_values(1.0)
DPHI_L = basis_derivs(-1.0)
DPHI_R = basis_derivs(1.0)
DDPHI = np.array([0.0, 0.0, 2.0])  # second reference derivative, constant


def eval_poly(coeffs, xi):
    """Evaluate modal polynomials at reference points.

    coeffs has shape (..., 3); xi is scalar or (m,).  Returns (...,) for
    scalar xi and (..., m) otherwise.
    """
    coeffs = np.asarray(coeffs)
    phi = basis_values(xi)
    if phi.ndim == 1:
        return coeffs @ phi
    return coeffs @ phi.T


@dataclass
class DGField1D:
    mesh: Mesh1D
    coeffs: np.ndarray  # (N, 3)

    def copy(self) -> "DGField1D":
        return DGField1D(self.mesh, self.coeffs.copy())

    def eval_ref(self, xi):
        """Values at reference points xi within every cell, shape (N, len(xi))."""
        return eval_poly(self.coeffs, xi)

    def eval_at(self, x):
        """Point values at physical locations x (mapped to owning cells)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        m = self.mesh
        cells = np.clip(((x - m.xmin) / m.h).astype(int), 0, m.n - 1)
        xi = (x - m.centers[cells]) / (0.5 * m.h)
        return np.einsum("pa,pa->p", self.coeffs[cells], basis_values(xi))


@dataclass
class DGField2D:
    mesh: Mesh2D
    coeffs: np.ndarray  # (Nx, Ny, 3, 3)

    def copy(self) -> "DGField2D":
        return DGField2D(self.mesh, self.coeffs.copy())

    def eval_ref(self, xi, eta):
        """Values on the tensor grid of reference points, (Nx, Ny, nxi, neta)."""
        px = basis_values(np.atleast_1d(xi))
        py = basis_values(np.atleast_1d(eta))
        return np.einsum("ijab,pa,qb->ijpq", self.coeffs, px, py)


def coeffs_from_point_values(values, gamma):
    """Modal coefficients of the quadratics through values at {-1, gamma, 1}.

    values has shape (..., 3) ordered (left endpoint, gamma point, right
    endpoint).
    """
    g = float(gamma)
    vand = np.array([[1.0, -1.0, 2.0 / 3.0],
                     [1.0, g, g * g - 1.0 / 3.0],
                     [1.0, 1.0, 2.0 / 3.0]])
    return np.asarray(values) @ np.linalg.inv(vand).T


def trace_pair(field: DGField1D, k: int, order: int = 0, ghosts=None):
    """One-sided traces (minus, plus) at interface k in 0..N.

    Periodic wrap by default; `ghosts` may supply a (left, right) pair of
    ghost coefficient vectors for non-periodic boundaries.  order selects the
    solution (0) or its first/second physical derivative (1, 2).
    """
    n = field.mesh.n
    if not 0 <= k <= n:
        raise IndexError(f"interface {k} out of range 0..{n}")
    if ghosts is None:
        cl = field.coeffs[(k - 1) % n]
        cr = field.coeffs[k % n]
    else:
        cl = field.coeffs[k - 1] if k > 0 else np.asarray(ghosts[0])
        cr = field.coeffs[k] if k < n else np.asarray(ghosts[1])
    h = field.mesh.h
    if order == 0:
        return cl @ PHI_R, cr @ PHI_L
    if order == 1:
        return (cl @ DPHI_R) * 2 / h, (cr @ DPHI_L) * 2 / h
    if order == 2:
        return (cl @ DDPHI) * 4 / h**2, (cr @ DDPHI) * 4 / h**2
    raise ValueError(f"unsupported trace order {order}")


def jump_average(minus, plus):
    return plus - minus, 0.5 * (plus + minus)


def _check_weight(wq, what="weight"):
    if np.any(wq <= 0.0):
        raise ValueError(f"{what} is nonpositive at a quadrature node")


def weighted_mass_matrix_1d(mesh: Mesh1D, weight=None, rule: QuadratureRule = VOLUME_RULE):
    """Per-cell matrices int_cell M phi_a phi_b dx, shape (N, 3, 3)."""
    h = mesh.h
    if weight is None:
        return np.broadcast_to(np.diag(h * _DIAG_MOMENTS), (mesh.n, 3, 3)).copy()
    xq = mesh.centers[:, None] + 0.5 * h * rule.nodes[None, :]
    wq = np.asarray(weight(xq), dtype=float)
    _check_weight(wq)
    phi = basis_values(rule.nodes)  # (q, 3)
    return h * np.einsum("jq,q,qa,qb->jab", wq, rule.weights, phi, phi)


def weighted_mass_matrix_2d(mesh: Mesh2D, weight=None, rule: QuadratureRule = VOLUME_RULE):
    """Per-cell 9x9 matrices of the M-weighted 2D inner product (flattened ab)."""
    area = mesh.cell_area
    if weight is None:
        d = np.outer(_DIAG_MOMENTS, _DIAG_MOMENTS).reshape(9)
        return np.broadcast_to(np.diag(area * d), (mesh.x.n, mesh.y.n, 9, 9)).copy()
    xq = mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]
    yq = mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]
    wq = np.asarray(weight(xq[:, None, :, None], yq[None, :, None, :]), dtype=float)
    wq = np.broadcast_to(wq, (mesh.x.n, mesh.y.n, rule.n, rule.n))
    _check_weight(wq)
    phi = basis_values(rule.nodes)
    bp = np.einsum("pa,qb->pqab", phi, phi).reshape(rule.n, rule.n, 9)
    g = area * np.einsum("ijpq,p,q,pqk,pqm->ijkm", wq, rule.weights, rule.weights, bp, bp)
    return g


def project_1d(u0, mesh: Mesh1D, weight=None, rule: QuadratureRule = VOLUME_RULE) -> DGField1D:
    """Cell-wise L2 projection of u0, weighted by M when given."""
    xq = mesh.centers[:, None] + 0.5 * mesh.h * rule.nodes[None, :]
    uq = np.broadcast_to(np.asarray(u0(xq), dtype=float), xq.shape)
    phi = basis_values(rule.nodes)
    if weight is None:
        rhs = np.einsum("jq,q,qa->ja", uq, rule.weights, phi)
        return DGField1D(mesh, rhs / _DIAG_MOMENTS)
    wq = np.asarray(weight(xq), dtype=float)
    _check_weight(wq)
    gram = np.einsum("jq,q,qa,qb->jab", wq, rule.weights, phi, phi)
    rhs = np.einsum("jq,jq,q,qa->ja", wq, uq, rule.weights, phi)
    return DGField1D(mesh, np.linalg.solve(gram, rhs[..., None])[..., 0])


def project_2d(u0, mesh: Mesh2D, weight=None, rule: QuadratureRule = VOLUME_RULE) -> DGField2D:
    xq = mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]
    yq = mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]
    shape = (mesh.x.n, mesh.y.n, rule.n, rule.n)
    uq = np.broadcast_to(np.asarray(u0(xq[:, None, :, None], yq[None, :, None, :]), dtype=float), shape)
    phi = basis_values(rule.nodes)
    if weight is None:
        c = np.einsum("ijpq,p,q,pa,qb->ijab", uq, rule.weights, rule.weights, phi, phi)
        c /= np.outer(_DIAG_MOMENTS, _DIAG_MOMENTS)
        return DGField2D(mesh, c)
    wq = np.broadcast_to(np.asarray(weight(xq[:, None, :, None], yq[None, :, None, :]), dtype=float), shape)
    _check_weight(wq)
    bp = np.einsum("pa,qb->pqab", phi, phi).reshape(rule.n, rule.n, 9)
    gram = np.einsum("ijpq,p,q,pqk,pqm->ijkm", wq, rule.weights, rule.weights, bp, bp)
    rhs = np.einsum("ijpq,ijpq,p,q,pqk->ijk", wq, uq, rule.weights, rule.weights, bp)
    c = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return DGField2D(mesh, c.reshape(mesh.x.n, mesh.y.n, 3, 3))


def reproject_field_1d(field: DGField1D, weight=None, rule=VOLUME_RULE) -> DGField1D:
    """Project a field's own piecewise polynomial (idempotence helper)."""
    vals = field.eval_ref(rule.nodes)
    return project_1d(lambda x: vals, field.mesh, weight=weight, rule=rule)


def restrict_2d(fine: DGField2D, rule=VOLUME_RULE) -> DGField2D:
    """Unweighted L2 projection onto the 2:1 coarser mesh.

    Integrates each fine subcell separately, so the piecewise-polynomial
    integrand is handled exactly and the restriction conserves cell averages.
    """
    fm = fine.mesh
    if fm.x.n % 2 or fm.y.n % 2:
        raise ValueError("fine mesh cell counts must be even for 2:1 coarsening")
    coarse = Mesh2D(Mesh1D(fm.x.xmin, fm.x.xmax, fm.x.n // 2),
                    Mesh1D(fm.y.xmin, fm.y.xmax, fm.y.n // 2))
    vals = fine.eval_ref(rule.nodes, rule.nodes)  # (nx, ny, q, q)
    phi_half = (basis_values(0.5 * (rule.nodes - 1.0)),  # coarse basis on left half
                basis_values(0.5 * (rule.nodes + 1.0)))  # and right half
    rhs = np.zeros((coarse.x.n, coarse.y.n, 3, 3))
    for px in (0, 1):
        for py in (0, 1):
            sub = vals[px::2, py::2]
            rhs += 0.25 * np.einsum("ijpq,p,q,pa,qb->ijab", sub, rule.weights,
                                    rule.weights, phi_half[px], phi_half[py])
    return DGField2D(coarse, rhs / np.outer(_DIAG_MOMENTS, _DIAG_MOMENTS))
