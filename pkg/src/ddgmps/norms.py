"""Discrete error norms, consecutive-refinement errors, and corner exclusion."""

import numpy as np

from .fields import DGField1D, DGField2D, basis_values
from .quadrature import VOLUME_RULE


def error_norm_1d(field: DGField1D, exact, p=2, rule=VOLUME_RULE) -> float:
    """(sum_j ||u_h - u||_{L^p(I_j)}^p)^{1/p} with per-cell Gauss quadrature."""
    mesh = field.mesh
    xq = mesh.centers[:, None] + 0.5 * mesh.h * rule.nodes[None, :]
    diff = np.abs(field.eval_ref(rule.nodes) - exact(xq))
    return float((mesh.h * (diff**p @ rule.weights)).sum() ** (1.0 / p))


def error_norm_2d(field: DGField2D, exact, p=2, rule=VOLUME_RULE) -> float:
    mesh = field.mesh
    xq = mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]
    yq = mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]
    vals = field.eval_ref(rule.nodes, rule.nodes)
    ex = exact(xq[:, None, :, None], yq[None, :, None, :])
    diff = np.abs(vals - ex) ** p
    cell = np.einsum("ijpq,p,q->ij", diff, rule.weights, rule.weights)
    return float((mesh.cell_area * cell.sum()) ** (1.0 / p))


def exact_norm_2d(exact, mesh, p=2, rule=VOLUME_RULE) -> float:
    xq = mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]
    yq = mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]
    ex = np.abs(exact(xq[:, None, :, None], yq[None, :, None, :])) ** p
    cell = np.einsum("ijpq,p,q->ij", ex, rule.weights, rule.weights)
    return float((mesh.cell_area * cell.sum()) ** (1.0 / p))


def consecutive_error_1d(coarse: DGField1D, fine: DGField1D, p=1, rule=VOLUME_RULE) -> float:
    """L^p distance of the coarse field to the 2:1 finer field (fine quadrature)."""
    cm, fm = coarse.mesh, fine.mesh
    if fm.n != 2 * cm.n or (fm.xmin, fm.xmax) != (cm.xmin, cm.xmax):
        raise ValueError("meshes must be nested 2:1 over the same interval")
    fv = fine.eval_ref(rule.nodes)                    # (2N, q)
    phi_half = (basis_values(0.5 * (rule.nodes - 1.0)),
                basis_values(0.5 * (rule.nodes + 1.0)))
    diff = np.empty_like(fv)
    for half in (0, 1):
        cv = coarse.coeffs @ phi_half[half].T         # coarse values on that half
        diff[half::2] = fv[half::2] - cv
    return float((fm.h * (np.abs(diff) ** p @ rule.weights)).sum() ** (1.0 / p))


def consecutive_error_2d(coarse: DGField2D, fine: DGField2D, p=1, rule=VOLUME_RULE) -> float:
    cm, fm = coarse.mesh, fine.mesh
    if fm.x.n != 2 * cm.x.n or fm.y.n != 2 * cm.y.n:
        raise ValueError("meshes must be nested 2:1")
    fv = fine.eval_ref(rule.nodes, rule.nodes)
    phi_half = (basis_values(0.5 * (rule.nodes - 1.0)),
                basis_values(0.5 * (rule.nodes + 1.0)))
    acc = 0.0
    for hx in (0, 1):
        for hy in (0, 1):
            cv = np.einsum("ijab,pa,qb->ijpq", coarse.coeffs, phi_half[hx], phi_half[hy])
            d = np.abs(fv[hx::2, hy::2] - cv) ** p
            acc += np.einsum("ijpq,p,q->", d, rule.weights, rule.weights)
    return float((fm.cell_area * acc) ** (1.0 / p))


def corner_excluding_error_1d(field: DGField1D, exact, corners, radius, p=2,
                              rule=VOLUME_RULE) -> float:
    """Error norm over cells whose closure stays farther than `radius` from
    every listed corner location."""
    mesh = field.mesh
    if radius < 0:
        raise ValueError("negative exclusion radius")
    left = mesh.interfaces[:-1]
    right = mesh.interfaces[1:]
    keep = np.ones(mesh.n, dtype=bool)
    for xc in np.atleast_1d(corners):
        dist = np.maximum(0.0, np.maximum(left - xc, xc - right))
        keep &= dist > radius
    if not keep.any():
        raise ValueError("all cells excluded by the corner radius")
    xq = mesh.centers[:, None] + 0.5 * mesh.h * rule.nodes[None, :]
    diff = np.abs(field.eval_ref(rule.nodes) - exact(xq))
    contrib = mesh.h * (diff**p @ rule.weights)
    return float(contrib[keep].sum() ** (1.0 / p))
