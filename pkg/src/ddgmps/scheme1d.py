"""Semi-discrete 1D DDG operator for weighted convection-diffusion.

Weak form per cell (interface-corrected gradient flux):

    int M u_t v dx = int f(u) v' dx - fhat v |       (convection, optional)
                   - int A u' v' dx + A [ flux v + (u - {u}) v' ] |

with the boundary bar denoting the signed evaluation over the two cell
endpoints using the cell's own traces of v.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .fields import (DDPHI, DPHI_L, DPHI_R, PHI_L, PHI_R, DGField1D,
                     basis_derivs, basis_values, weighted_mass_matrix_1d)
from .fluxes import FluxParams, MonotoneFluxSpec, lax_friedrichs
from .mesh import Mesh1D
from .quadrature import VOLUME_RULE


@dataclass(frozen=True)
class BC1D:
    kind: str = "periodic"            # periodic | dirichlet | exact
    left: float = 0.0                 # dirichlet ghost states
    right: float = 0.0
    exact: Optional[Callable] = None  # u(t, x) for exact-solution ghosts


PERIODIC = BC1D("periodic")


class SpatialOperator1D:
    """Precomputed RHS evaluator: du/dt coefficients from a coefficient array.

    diffusion(x) or diffusion(x, u) (set diffusion_in_u); the optional
    convection is a MonotoneFluxSpec.  The plain (uncorrected) DDG variant is
    available through interface_correction=False.
    """

    def __init__(self, mesh: Mesh1D, params: FluxParams, weight=None,
                 diffusion=None, diffusion_in_u=False,
                 convection: Optional[MonotoneFluxSpec] = None,
                 bc: BC1D = PERIODIC, rule=VOLUME_RULE,
                 interface_correction=True):
        self.mesh = mesh
        self.params = params
        self.weight = weight
        self.diffusion = diffusion
        self.diffusion_in_u = diffusion_in_u
        self.convection = convection
        self.bc = bc
        self.rule = rule
        self.interface_correction = interface_correction

        h = mesh.h
        self.xq = mesh.centers[:, None] + 0.5 * h * rule.nodes[None, :]
        self.P = basis_values(rule.nodes)       # (q, 3)
        self.DP = basis_derivs(rule.nodes)
        self.wq = rule.weights
        self.xif = mesh.interfaces
        self.mass = weighted_mass_matrix_1d(mesh, weight, rule)
        self.mass_inv = np.linalg.inv(self.mass)
        if diffusion is not None and not diffusion_in_u:
            self.A_if = np.asarray(diffusion(self.xif), dtype=float)
            self.A_vol = np.broadcast_to(np.asarray(diffusion(self.xq), dtype=float),
                                         self.xq.shape)
        else:
            self.A_if = None
            self.A_vol = None
        if bc.kind == "exact" and bc.exact is None:
            raise ConfigError("exact BC requires an exact-solution callable")

    # -- ghost handling -------------------------------------------------
    def extended_coeffs(self, coeffs, t):
        n, h = self.mesh.n, self.mesh.h
        ext = np.empty((n + 2, 3))
        ext[1:-1] = coeffs
        if self.bc.kind == "periodic":
            ext[0] = coeffs[-1]
            ext[-1] = coeffs[0]
        elif self.bc.kind == "dirichlet":
            ext[0] = (self.bc.left, 0.0, 0.0)
            ext[-1] = (self.bc.right, 0.0, 0.0)
        elif self.bc.kind == "exact":
            # project the exact solution on the one-cell strips just outside
            for row, (lo, hi) in ((0, (self.mesh.xmin - h, self.mesh.xmin)),
                                  (-1, (self.mesh.xmax, self.mesh.xmax + h))):
                xg = 0.5 * (lo + hi) + 0.5 * h * self.rule.nodes
                ug = np.asarray(self.bc.exact(t, xg), dtype=float)
                if self.weight is None:
                    ext[row] = (self.P.T * self.wq) @ ug / np.array([1.0, 1 / 3.0, 4 / 45.0])
                else:
                    mg = np.asarray(self.weight(xg), dtype=float)
                    gram = np.einsum("q,qa,qb->ab", self.wq * mg, self.P, self.P)
                    rhs = (self.P.T * (self.wq * mg)) @ ug
                    ext[row] = np.linalg.solve(gram, rhs)
        else:
            raise ConfigError(f"unknown BC kind {self.bc.kind!r}")
        return ext

    # -- RHS ------------------------------------------------------------
    def rhs(self, coeffs, t=0.0):
        mesh, h = self.mesh, self.mesh.h
        prm = self.params
        ext = self.extended_coeffs(coeffs, t)
        cl, cr = ext[:-1], ext[1:]               # interface neighbors, (N+1, 3)
        um, up = cl @ PHI_R, cr @ PHI_L
        dum, dup = (cl @ DPHI_R) * 2 / h, (cr @ DPHI_L) * 2 / h
        ddum, ddup = (cl @ DDPHI) * 4 / h**2, (cr @ DDPHI) * 4 / h**2

        need_uq = self.diffusion_in_u or self.convection is not None
        uq = coeffs @ self.P.T if need_uq else None   # (N, q)

        b = np.zeros((mesh.n, 3))
        if self.diffusion is not None:
            if self.diffusion_in_u:
                a_if = 0.5 * (np.asarray(self.diffusion(self.xif, um), dtype=float)
                              + np.asarray(self.diffusion(self.xif, up), dtype=float))
                a_vol = np.broadcast_to(np.asarray(self.diffusion(self.xq, uq), dtype=float),
                                        self.xq.shape)
            else:
                a_if, a_vol = self.A_if, self.A_vol
            flux = a_if * (prm.beta0 / h * (up - um) + 0.5 * (dum + dup)
                           + prm.beta1 * h * (ddup - ddum))
            dur = coeffs @ self.DP.T
            b -= (4.0 / h) * ((self.wq * a_vol * dur) @ self.DP)
            b += np.outer(flux[1:], PHI_R) - np.outer(flux[:-1], PHI_L)
            if self.interface_correction:
                corr = a_if * 0.5 * (up - um)      # A [u]/2
                b -= (2.0 / h) * (np.outer(corr[1:], DPHI_R) + np.outer(corr[:-1], DPHI_L))
        if self.convection is not None:
            fhat = lax_friedrichs(um, up, self.convection)
            b += 2.0 * ((self.wq * self.convection.f(uq)) @ self.DP)
            b -= np.outer(fhat[1:], PHI_R) - np.outer(fhat[:-1], PHI_L)
        return np.einsum("jab,jb->ja", self.mass_inv, b)

    def average_update(self, coeffs, tau, t=0.0):
        """Weighted cell averages after one Euler step (the v = 1 component)."""
        mesh, h = self.mesh, self.mesh.h
        avg = (self.mass[:, 0, :] * coeffs).sum(axis=1) / h   # <u>_j
        rhs0 = np.einsum("ja,ja->j", self.mass[:, 0, :],
                         self.rhs(coeffs, t)) / h
        return avg + tau * rhs0


def rhs_diffusion_1d(field: DGField1D, params: FluxParams, weight=None,
                     diffusion=None, bc: BC1D = PERIODIC, t=0.0,
                     interface_correction=True):
    """One-shot weighted-diffusion RHS (du/dt modal coefficients)."""
    op = SpatialOperator1D(field.mesh, params, weight=weight, diffusion=diffusion,
                           bc=bc, interface_correction=interface_correction)
    return op.rhs(field.coeffs, t)


def rhs_convection_diffusion_1d(field: DGField1D, params: FluxParams, weight=None,
                                diffusion=None, diffusion_in_u=False,
                                convection: Optional[MonotoneFluxSpec] = None,
                                bc: BC1D = PERIODIC, t=0.0):
    op = SpatialOperator1D(field.mesh, params, weight=weight, diffusion=diffusion,
                           diffusion_in_u=diffusion_in_u, convection=convection, bc=bc)
    return op.rhs(field.coeffs, t)


def euler_step(field: DGField1D, rhs_coeffs, tau: float) -> DGField1D:
    if tau < 0:
        raise ValueError("negative time step")
    return DGField1D(field.mesh, field.coeffs + tau * np.asarray(rhs_coeffs))
