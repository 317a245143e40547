"""Semi-discrete 2D DDG operator on periodic Cartesian meshes.

Volume integrals use the 16-point Gauss rule per axis.  Edge integrals use a
Gauss-Lobatto rule with max(L, 5) points: the L-point rule of the
monotonicity analysis underintegrates the degree-4 edge pairings for L = 3,
which destroys the dissipativity of the assembled operator (it acquires
positive eigenvalues), while with at least 5 points every constant-tensor
edge integrand is integrated exactly.  The v = 1 (cell-average) component has
transverse degree <= 2, so the analysis decomposition at the given L still
reproduces the computed average update exactly (see decompose_update).
"""

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigError
from .fields import (DDPHI, DPHI_L, DPHI_R, PHI_L, PHI_R, DGField2D,
                     basis_derivs, basis_values)
from .fluxes import FluxParams, MonotoneFluxSpec, alpha_coeffs, lax_friedrichs
from .mesh import Mesh1D, Mesh2D
from .quadrature import VOLUME_RULE, gauss_lobatto_rule
from .weights import compute_omega_tilde

Entry = Union[float, Callable]


@dataclass(frozen=True)
class DiffusionTensor2D:
    """Symmetric nonnegative tensor ((a, c), (c, b)).

    Entries are constants, f(x, y), or f(x, y, u) (set depends_u).  `bounds`
    optionally supplies closed-form (min{a,b}, max{a,b}, max|c|) over the
    domain and the solution range.
    """

    a: Entry
    b: Entry
    c: Entry = 0.0
    depends_u: bool = False
    bounds: Optional[tuple] = None

    @property
    def constant(self) -> bool:
        return not (callable(self.a) or callable(self.b) or callable(self.c))

    def _entry(self, e, x, y, u):
        if not callable(e):
            return e
        return e(x, y, u) if self.depends_u else e(x, y)

    def at(self, x, y, u=None):
        return (self._entry(self.a, x, y, u),
                self._entry(self.b, x, y, u),
                self._entry(self.c, x, y, u))


def tensor_bounds(tensor: DiffusionTensor2D, mesh: Mesh2D, u_range,
                  samples: int = 1025, inflate: float = 0.05,
                  rule=VOLUME_RULE):
    """(min{a,b}, max{a,b}, max|c|) over the volume points and [c1, c2].

    Problem-supplied closed forms win; sampled bounds are widened by
    `inflate` in the conservative direction.
    """
    if tensor.bounds is not None:
        return tensor.bounds
    if tensor.constant:
        return (min(tensor.a, tensor.b), max(tensor.a, tensor.b), abs(tensor.c))
    xq = (mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]).ravel()
    yq = (mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]).ravel()
    if tensor.depends_u:
        uu = np.linspace(u_range[0], u_range[1], samples)[:, None, None]
        args = (xq[None, :, None], yq[None, None, :], uu)
    else:
        args = (xq[:, None], yq[None, :], None)
    av, bv, cv = tensor.at(*args)
    amin = min(np.min(av), np.min(bv))
    amax = max(np.max(av), np.max(bv))
    cmax = np.max(np.abs(cv))
    return (float(amin) * (1 - inflate), float(amax) * (1 + inflate),
            float(cmax) * (1 + inflate))


def _flat_products(nodes):
    """Flattened tensor-product basis matrices at a node grid."""
    p = basis_values(nodes)
    d = basis_derivs(nodes)
    n = len(nodes)
    bv = np.einsum("pa,qb->pqab", p, p).reshape(n * n, 9)
    bdx = np.einsum("pa,qb->pqab", d, p).reshape(n * n, 9)
    bdy = np.einsum("pa,qb->pqab", p, d).reshape(n * n, 9)
    return bv, bdx, bdy


class SpatialOperator2D:
    """General (quadrature-assembled) RHS evaluator on a periodic mesh."""

    def __init__(self, mesh: Mesh2D, params: FluxParams,
                 tensor: Optional[DiffusionTensor2D] = None, weight=None,
                 convection: Optional[tuple] = None, L: int = 3,
                 rule=VOLUME_RULE, check_definiteness: bool = True,
                 definiteness_action: str = "warn"):
        self.mesh = mesh
        self.params = params
        self.tensor = tensor
        self.weight = weight
        self.convection = convection
        self.L = L
        self.rule = rule
        self.definiteness_action = definiteness_action
        self._definiteness_warned = False

        nx, ny = mesh.x.n, mesh.y.n
        dx, dy = mesh.dx, mesh.dy
        self.nx, self.ny, self.dx, self.dy = nx, ny, dx, dy

        # volume machinery
        self.BV, self.BDX, self.BDY = _flat_products(rule.nodes)
        self.WVOL = np.outer(rule.weights, rule.weights).reshape(-1)
        self.xvol = mesh.x.centers[:, None] + 0.5 * dx * rule.nodes[None, :]  # (nx, q)
        self.yvol = mesh.y.centers[:, None] + 0.5 * dy * rule.nodes[None, :]
        xg = np.broadcast_to(self.xvol[:, None, :, None], (nx, ny, rule.n, rule.n))
        yg = np.broadcast_to(self.yvol[None, :, None, :], (nx, ny, rule.n, rule.n))
        self._xg = xg.reshape(nx, ny, -1)
        self._yg = yg.reshape(nx, ny, -1)

        # edge machinery: Lobatto rule exact for all constant-tensor integrands
        lob = gauss_lobatto_rule(max(L, 5))
        self.lob = lob
        lq = lob.n
        pl, dpl = basis_values(lob.nodes), basis_derivs(lob.nodes)
        # x-interfaces: value/derivative traces vs the transverse y-profile
        self.XR_v = np.einsum("a,sb->sab", PHI_R, pl).reshape(lq, 9)
        self.XL_v = np.einsum("a,sb->sab", PHI_L, pl).reshape(lq, 9)
        self.XR_dx = np.einsum("a,sb->sab", DPHI_R, pl).reshape(lq, 9)
        self.XL_dx = np.einsum("a,sb->sab", DPHI_L, pl).reshape(lq, 9)
        self.XR_dd = np.einsum("a,sb->sab", DDPHI, pl).reshape(lq, 9)
        self.XL_dd = self.XR_dd
        self.XR_dy = np.einsum("a,sb->sab", PHI_R, dpl).reshape(lq, 9)
        self.XL_dy = np.einsum("a,sb->sab", PHI_L, dpl).reshape(lq, 9)
        # y-interfaces
        self.YR_v = np.einsum("b,sa->sab", PHI_R, pl).reshape(lq, 9)
        self.YL_v = np.einsum("b,sa->sab", PHI_L, pl).reshape(lq, 9)
        self.YR_dy = np.einsum("b,sa->sab", DPHI_R, pl).reshape(lq, 9)
        self.YL_dy = np.einsum("b,sa->sab", DPHI_L, pl).reshape(lq, 9)
        self.YR_dd = np.einsum("b,sa->sab", DDPHI, pl).reshape(lq, 9)
        self.YL_dd = self.YR_dd
        self.YR_dx = np.einsum("b,sa->sab", PHI_R, dpl).reshape(lq, 9)
        self.YL_dx = np.einsum("b,sa->sab", PHI_L, dpl).reshape(lq, 9)

        # physical coordinates of interface quadrature points
        self.xe = mesh.x.interfaces[1:]                      # right edge of cell i
        self.ye = mesh.y.interfaces[1:]
        self.ylo = mesh.y.centers[:, None] + 0.5 * dy * lob.nodes[None, :]  # (ny, L)
        self.xlo = mesh.x.centers[:, None] + 0.5 * dx * lob.nodes[None, :]  # (nx, L)

        # mass matrix (weighted) or its diagonal (unweighted)
        if weight is None:
            d = np.outer(np.array([1.0, 1 / 3, 4 / 45]), np.array([1.0, 1 / 3, 4 / 45]))
            self.mass_diag = (dx * dy) * d.reshape(9)
            self.mass_inv = None
        else:
            from .fields import weighted_mass_matrix_2d
            self.mass_diag = None
            self.mass_inv = np.linalg.inv(weighted_mass_matrix_2d(mesh, weight, rule))

        # frozen tensor values when independent of u
        self._vol_t = None
        self._edge_tx = None
        self._edge_ty = None
        if tensor is not None and not tensor.depends_u:
            av, bv, cv = tensor.at(self._xg, self._yg, None)
            self._vol_t = tuple(np.broadcast_to(np.asarray(v, dtype=float),
                                                self._xg.shape) for v in (av, bv, cv))
            ax, bx2, cx = tensor.at(self.xe[:, None, None], self.ylo[None, :, :], None)
            self._edge_tx = tuple(np.broadcast_to(np.asarray(v, dtype=float),
                                                  (nx, ny, self.lob.n)) for v in (ax, bx2, cx))
            ay, by, cy = tensor.at(self.xlo[:, None, :], self.ye[None, :, None], None)
            self._edge_ty = tuple(np.broadcast_to(np.asarray(v, dtype=float),
                                                  (nx, ny, self.lob.n)) for v in (ay, by, cy))
            if check_definiteness:
                self._check_definite(*self._vol_t)

    def _check_definite(self, av, bv, cv):
        bad = (np.asarray(av) < -1e-13) | (np.asarray(bv) < -1e-13) \
            | (np.asarray(av) * np.asarray(bv) - np.asarray(cv) ** 2 < -1e-12)
        if np.any(bad):
            msg = "diffusion tensor not nonnegative definite at a quadrature point"
            if self.definiteness_action == "abort":
                raise ConfigError(msg)
            if not self._definiteness_warned:
                warnings.warn(msg, RuntimeWarning, stacklevel=3)
                self._definiteness_warned = True

    # -- RHS ------------------------------------------------------------
    def rhs(self, coeffs, t=0.0):
        nx, ny, dx, dy = self.nx, self.ny, self.dx, self.dy
        prm = self.params
        c9 = coeffs.reshape(nx, ny, 9)
        b = np.zeros((nx, ny, 9))

        need_u = (self.tensor is not None and self.tensor.depends_u) \
            or self.convection is not None
        uvol = c9 @ self.BV.T if need_u else None

        # volume terms
        if self.tensor is not None:
            uxr = c9 @ self.BDX.T
            uyr = c9 @ self.BDY.T
            ux = (2.0 / dx) * uxr
            uy = (2.0 / dy) * uyr
            if self._vol_t is not None:
                av, bv, cv = self._vol_t
            else:
                av, bv, cv = self.tensor.at(self._xg, self._yg, uvol)
                self._check_definite(av, bv, cv)
            gx = av * ux + cv * uy
            gy = cv * ux + bv * uy
            area = dx * dy
            b -= area * ((self.WVOL * gx) @ self.BDX * (2.0 / dx)
                         + (self.WVOL * gy) @ self.BDY * (2.0 / dy))
        if self.convection is not None:
            fx, fy = self.convection
            area = dx * dy
            b += area * ((self.WVOL * fx.f(uvol)) @ self.BDX * (2.0 / dx)
                         + (self.WVOL * fy.f(uvol)) @ self.BDY * (2.0 / dy))

        # x-interfaces: interface i couples cell i (minus side) and i+1 (plus)
        cl = c9
        cr = np.roll(c9, -1, axis=0)
        um = cl @ self.XR_v.T
        up = cr @ self.XL_v.T
        wq = self.lob.weights
        if self.tensor is not None:
            dxm = (2 / dx) * (cl @ self.XR_dx.T)
            dxp = (2 / dx) * (cr @ self.XL_dx.T)
            ddm = (4 / dx**2) * (cl @ self.XR_dd.T)
            ddp = (4 / dx**2) * (cr @ self.XL_dd.T)
            dym = (2 / dy) * (cl @ self.XR_dy.T)
            dyp = (2 / dy) * (cr @ self.XL_dy.T)
            if self._edge_tx is not None:
                ae, _, ce = self._edge_tx
            else:
                xa = self.xe[:, None, None]
                ya = self.ylo[None, :, :]
                am_, _, cm_ = self.tensor.at(xa, ya, um)
                ap_, _, cp_ = self.tensor.at(xa, ya, up)
                ae, ce = 0.5 * (am_ + ap_), 0.5 * (cm_ + cp_)
            flux = ae * (prm.beta0 / dx * (up - um) + 0.5 * (dxm + dxp)
                         + prm.beta1 * dx * (ddp - ddm)) \
                + ce * 0.5 * (dym + dyp)
            jmp2 = 0.5 * (up - um)
            own = dy * ((wq * flux) @ self.XR_v
                        - (wq * jmp2 * ae) @ self.XR_dx * (2 / dx)
                        - (wq * jmp2 * ce) @ self.XR_dy * (2 / dy))
            other = -dy * ((wq * flux) @ self.XL_v
                           + (wq * jmp2 * ae) @ self.XL_dx * (2 / dx)
                           + (wq * jmp2 * ce) @ self.XL_dy * (2 / dy))
            b += own
            b += np.roll(other, 1, axis=0)
        if self.convection is not None:
            fhat = lax_friedrichs(um, up, self.convection[0])
            b -= dy * (wq * fhat) @ self.XR_v
            b += np.roll(dy * (wq * fhat) @ self.XL_v, 1, axis=0)

        # y-interfaces
        cl = c9
        cr = np.roll(c9, -1, axis=1)
        um = cl @ self.YR_v.T
        up = cr @ self.YL_v.T
        if self.tensor is not None:
            dym = (2 / dy) * (cl @ self.YR_dy.T)
            dyp = (2 / dy) * (cr @ self.YL_dy.T)
            ddm = (4 / dy**2) * (cl @ self.YR_dd.T)
            ddp = (4 / dy**2) * (cr @ self.YL_dd.T)
            dxm = (2 / dx) * (cl @ self.YR_dx.T)
            dxp = (2 / dx) * (cr @ self.YL_dx.T)
            if self._edge_ty is not None:
                _, be, ce = self._edge_ty
            else:
                xa = self.xlo[:, None, :]
                ya = self.ye[None, :, None]
                _, bm_, cm_ = self.tensor.at(xa, ya, um)
                _, bp_, cp_ = self.tensor.at(xa, ya, up)
                be, ce = 0.5 * (bm_ + bp_), 0.5 * (cm_ + cp_)
            flux = be * (prm.beta0 / dy * (up - um) + 0.5 * (dym + dyp)
                         + prm.beta1 * dy * (ddp - ddm)) \
                + ce * 0.5 * (dxm + dxp)
            jmp2 = 0.5 * (up - um)
            own = dx * ((wq * flux) @ self.YR_v
                        - (wq * jmp2 * be) @ self.YR_dy * (2 / dy)
                        - (wq * jmp2 * ce) @ self.YR_dx * (2 / dx))
            other = -dx * ((wq * flux) @ self.YL_v
                           + (wq * jmp2 * be) @ self.YL_dy * (2 / dy)
                           + (wq * jmp2 * ce) @ self.YL_dx * (2 / dx))
            b += own
            b += np.roll(other, 1, axis=1)
        if self.convection is not None:
            fhat = lax_friedrichs(um, up, self.convection[1])
            b -= dx * (wq * fhat) @ self.YR_v
            b += np.roll(dx * (wq * fhat) @ self.YL_v, 1, axis=1)

        if self.mass_inv is None:
            out = b / self.mass_diag
        else:
            out = np.einsum("ijkm,ijm->ijk", self.mass_inv, b)
        return out.reshape(nx, ny, 3, 3)

    def average_update(self, coeffs, tau, avg_weights=None, t=0.0):
        """Weighted cell averages after one Euler step (v = 1 component)."""
        c9 = coeffs.reshape(self.nx, self.ny, 9)
        dc9 = self.rhs(coeffs, t).reshape(self.nx, self.ny, 9)
        if avg_weights is None:
            if self.weight is not None:
                raise ValueError("avg_weights required for weighted problems")
            return c9[..., 0] + tau * dc9[..., 0]
        return ((c9 + tau * dc9) * avg_weights).sum(-1)


def rhs_2d(field: DGField2D, params: FluxParams, tensor=None, weight=None,
           convection=None, L=3, t=0.0):
    op = SpatialOperator2D(field.mesh, params, tensor=tensor, weight=weight,
                           convection=convection, L=L)
    return op.rhs(field.coeffs, t)


class LinearRhs2D:
    """Five-point stencil form of a translation-invariant RHS operator.

    Valid when the weight is constant, the tensor entries are constants, and
    any convective flux is linear in u; built by probing a small periodic
    clone of the general operator.
    """

    def __init__(self, tc, tw, te, ts, tn):
        self.tc, self.tw, self.te, self.ts, self.tn = tc, tw, te, ts, tn

    @classmethod
    def from_general(cls, make_op, mesh: Mesh2D, tol=1e-9):
        probe_mesh = Mesh2D(Mesh1D(0.0, 5 * mesh.dx, 5), Mesh1D(0.0, 5 * mesh.dy, 5))
        op = make_op(probe_mesh)
        mats = [np.zeros((9, 9)) for _ in range(5)]
        for k in range(9):
            c = np.zeros((5, 5, 9))
            c[2, 2, k] = 1.0
            r = op.rhs(c.reshape(5, 5, 3, 3)).reshape(5, 5, 9)
            mats[0][:, k] = r[2, 2]
            mats[1][:, k] = r[3, 2]   # coupling to the west neighbor
            mats[2][:, k] = r[1, 2]   # east
            mats[3][:, k] = r[2, 3]   # south
            mats[4][:, k] = r[2, 1]   # north
            far = r.copy()
            for (i, j) in ((2, 2), (3, 2), (1, 2), (2, 3), (2, 1)):
                far[i, j] = 0.0
            scale = max(1.0, np.abs(r).max())
            if np.abs(far).max() > tol * scale:
                raise ValueError("operator is not a five-point stencil; "
                                 "linear fast path is invalid here")
        return cls(*mats)

    def rhs(self, coeffs, t=0.0):
        shp = coeffs.shape
        c9 = coeffs.reshape(shp[0], shp[1], 9)
        out = c9 @ self.tc.T
        out += np.roll(c9, 1, axis=0) @ self.tw.T
        out += np.roll(c9, -1, axis=0) @ self.te.T
        out += np.roll(c9, 1, axis=1) @ self.ts.T
        out += np.roll(c9, -1, axis=1) @ self.tn.T
        return out.reshape(shp)


def corner_term_B(field: DGField2D, tensor: DiffusionTensor2D, i: int, j: int,
                  tau: float, L: int = 3):
    """Mixed-derivative contribution B to the average update of cell (i, j).

    Constant off-diagonal entry: the signed twelve-vertex combination.
    Variable entry: Lobatto quadrature of the {c}{tangential derivative} edge
    integrals.
    """
    mesh = field.mesh
    nx, ny = mesh.x.n, mesh.y.n
    dx, dy = mesh.dx, mesh.dy
    c9 = field.coeffs

    def val(ci, cj, xi, eta):
        return float(basis_values(xi) @ c9[ci % nx, cj % ny] @ basis_values(eta))

    if not callable(tensor.c) and not tensor.depends_u:
        cc = tensor.c
        if cc == 0.0:
            return 0.0
        s = (2 * val(i, j, 1, 1) - 2 * val(i, j, 1, -1)
             - 2 * val(i, j, -1, 1) + 2 * val(i, j, -1, -1)
             + val(i + 1, j, -1, 1) + val(i, j + 1, 1, -1)
             - val(i, j - 1, 1, 1) - val(i + 1, j, -1, -1)
             + val(i, j - 1, -1, 1) + val(i - 1, j, 1, -1)
             - val(i, j + 1, -1, -1) - val(i - 1, j, 1, 1))
        return cc * tau / (2 * dx * dy) * s

    lob = gauss_lobatto_rule(max(L, 5))  # same edge rule as the operator
    pl, dpl = basis_values(lob.nodes), basis_derivs(lob.nodes)

    def edge_x(iface_cell):  # integral over J_j of {c}{du/dy} at x-interface
        cm = c9[iface_cell % nx, j % ny]
        cp = c9[(iface_cell + 1) % nx, j % ny]
        xif = mesh.x.interfaces[(iface_cell % nx) + 1]
        ypts = mesh.y.centers[j % ny] + 0.5 * dy * lob.nodes
        um = PHI_R @ cm @ pl.T
        up = PHI_L @ cp @ pl.T
        dym = (2 / dy) * (PHI_R @ cm @ dpl.T)
        dyp = (2 / dy) * (PHI_L @ cp @ dpl.T)
        cm_ = np.asarray(tensor._entry(tensor.c, xif, ypts, um), dtype=float)
        cp_ = np.asarray(tensor._entry(tensor.c, xif, ypts, up), dtype=float)
        ce = 0.5 * (cm_ + cp_)
        return dy * np.dot(lob.weights, ce * 0.5 * (dym + dyp))

    def edge_y(jface_cell):
        cm = c9[i % nx, jface_cell % ny]
        cp = c9[i % nx, (jface_cell + 1) % ny]
        yif = mesh.y.interfaces[(jface_cell % ny) + 1]
        xpts = mesh.x.centers[i % nx] + 0.5 * dx * lob.nodes
        um = pl @ cm @ PHI_R
        up = pl @ cp @ PHI_L
        dxm = (2 / dx) * (dpl @ cm @ PHI_R)
        dxp = (2 / dx) * (dpl @ cp @ PHI_L)
        cm_ = np.asarray(tensor._entry(tensor.c, xpts, yif, um), dtype=float)
        cp_ = np.asarray(tensor._entry(tensor.c, xpts, yif, up), dtype=float)
        ce = 0.5 * (cm_ + cp_)
        return dx * np.dot(lob.weights, ce * 0.5 * (dxm + dxp))

    total = (edge_x(i) - edge_x(i - 1)) + (edge_y(j) - edge_y(j - 1))
    return tau / (dx * dy) * total


class AverageUpdateDecomposition:
    """The weighted-average Euler update of one cell written as a nonnegative-
    coefficient candidate combination of solution point values."""

    def __init__(self, keys, coeffs, values):
        self.keys = keys
        self.coeffs = np.asarray(coeffs)
        self.values = np.asarray(values)

    def reassemble(self) -> float:
        return float(self.coeffs @ self.values)

    def min_coefficient(self) -> float:
        return float(self.coeffs.min())


def decompose_update(field: DGField2D, tensor: DiffusionTensor2D,
                     params: FluxParams, tau: float, i: int, j: int,
                     weight=None, L: int = 3,
                     rule=VOLUME_RULE) -> AverageUpdateDecomposition:
    """Lobatto decomposition of cell (i, j)'s weighted-average Euler update.

    Expands the update over the solution values at the per-line test points
    (endpoints and the gamma point), merging the mixed-term contributions at
    coinciding points exactly as in the weak-monotonicity grouping.  A
    variable off-diagonal entry requires both gamma offsets to coincide with
    Gauss-Lobatto nodes.
    """
    mesh = field.mesh
    nx, ny = mesh.x.n, mesh.y.n
    dx, dy = mesh.dx, mesh.dy
    mu = tau * (1.0 / dx**2 + 1.0 / dy**2)
    # mesh-only split ratios mux/mu and muy/mu (well defined also at tau = 0)
    rx = (1.0 / dx**2) / (1.0 / dx**2 + 1.0 / dy**2)
    ry = 1.0 - rx
    gX, gY = params.gx, params.gy
    lob = gauss_lobatto_rule(L)
    c9 = field.coeffs
    variable_c = callable(tensor.c) or tensor.depends_u
    if variable_c:
        for g in (gX, gY):
            if not np.any(np.abs(lob.nodes - g) < 1e-12):
                raise ConfigError("variable off-diagonal entry needs gamma at a "
                                  "Gauss-Lobatto node for the decomposition")

    terms = {}  # key -> [coefficient, exact xi, exact eta]

    def add(ci, cj, xi, eta, coeff):
        key = (ci % nx, cj % ny, round(float(xi), 12), round(float(eta), 12))
        slot = terms.setdefault(key, [0.0, float(xi), float(eta)])
        slot[0] += coeff

    def line_moments_x(ci, ypt):
        if weight is None:
            return 1.0, 0.0, 1.0 / 3.0
        xs = mesh.x.centers[ci % nx] + 0.5 * dx * rule.nodes
        mv = np.asarray(weight(xs, ypt), dtype=float)
        w = rule.weights
        return mv @ w, (mv * rule.nodes) @ w, (mv * rule.nodes**2) @ w

    def line_moments_y(cj, xpt):
        if weight is None:
            return 1.0, 0.0, 1.0 / 3.0
        ys = mesh.y.centers[cj % ny] + 0.5 * dy * rule.nodes
        mv = np.asarray(weight(xpt, ys), dtype=float)
        w = rule.weights
        return mv @ w, (mv * rule.nodes) @ w, (mv * rule.nodes**2) @ w

    a1X, a2X, a3X = alpha_coeffs(gX, params)
    m1X, m2X, m3X = alpha_coeffs(-gX, params)
    a1Y, a2Y, a3Y = alpha_coeffs(gY, params)
    m1Y, m2Y, m3Y = alpha_coeffs(-gY, params)

    # H1 lines: x-direction update along each y-Lobatto node of cell (i, j)
    for sig in range(L):
        eta = lob.nodes[sig]
        ypt = mesh.y.centers[j % ny] + 0.5 * dy * eta
        m1, mx, mx2 = line_moments_x(i, ypt)
        w1, w2, w3 = compute_omega_tilde(m1, mx, mx2, gX)
        scale = rx * lob.weights[sig]
        xm = mesh.x.interfaces[i % nx]          # left interface of cell i
        xp = mesh.x.interfaces[(i % nx) + 1]
        am = _edge_value(tensor, "a", xm, ypt, c9, mesh, (i - 1, j), "x", eta)
        ap = _edge_value(tensor, "a", xp, ypt, c9, mesh, (i, j), "x", eta)
        add(i, j, -1.0, eta, scale * (w1 - mu * (am * m3X + ap * a1X)))
        add(i, j, gX, eta, scale * (w2 - mu * (am + ap) * a2X))
        add(i, j, +1.0, eta, scale * (w3 - mu * (am * m1X + ap * a3X)))
        add(i + 1, j, -1.0, eta, scale * mu * ap * m3X)
        add(i + 1, j, gX, eta, scale * mu * ap * m2X)
        add(i + 1, j, +1.0, eta, scale * mu * ap * m1X)
        add(i - 1, j, -1.0, eta, scale * mu * am * a1X)
        add(i - 1, j, gX, eta, scale * mu * am * a2X)
        add(i - 1, j, +1.0, eta, scale * mu * am * a3X)

    # H2 lines: y-direction update along each x-Lobatto node
    for sig in range(L):
        xi = lob.nodes[sig]
        xpt = mesh.x.centers[i % nx] + 0.5 * dx * xi
        m1, mx, mx2 = line_moments_y(j, xpt)
        w1, w2, w3 = compute_omega_tilde(m1, mx, mx2, gY)
        scale = ry * lob.weights[sig]
        ym = mesh.y.interfaces[j % ny]
        yp = mesh.y.interfaces[(j % ny) + 1]
        bm = _edge_value(tensor, "b", xpt, ym, c9, mesh, (i, j - 1), "y", xi)
        bp = _edge_value(tensor, "b", xpt, yp, c9, mesh, (i, j), "y", xi)
        add(i, j, xi, -1.0, scale * (w1 - mu * (bm * m3Y + bp * a1Y)))
        add(i, j, xi, gY, scale * (w2 - mu * (bm + bp) * a2Y))
        add(i, j, xi, +1.0, scale * (w3 - mu * (bm * m1Y + bp * a3Y)))
        add(i, j + 1, xi, -1.0, scale * mu * bp * m3Y)
        add(i, j + 1, xi, gY, scale * mu * bp * m2Y)
        add(i, j + 1, xi, +1.0, scale * mu * bp * m1Y)
        add(i, j - 1, xi, -1.0, scale * mu * bm * a1Y)
        add(i, j - 1, xi, gY, scale * mu * bm * a2Y)
        add(i, j - 1, xi, +1.0, scale * mu * bm * a3Y)

    # mixed term
    if not variable_c:
        cc = float(tensor.c)
        if cc != 0.0:
            k = cc * tau / (2 * dx * dy)
            add(i, j, 1, 1, 2 * k)
            add(i, j, 1, -1, -2 * k)
            add(i, j, -1, 1, -2 * k)
            add(i, j, -1, -1, 2 * k)
            add(i + 1, j, -1, 1, k)
            add(i, j + 1, 1, -1, k)
            add(i, j - 1, 1, 1, -k)
            add(i + 1, j, -1, -1, -k)
            add(i, j - 1, -1, 1, k)
            add(i - 1, j, 1, -1, k)
            add(i, j + 1, -1, -1, -k)
            add(i - 1, j, 1, 1, -k)
    else:
        _add_variable_mixed(add, field, tensor, params, tau, i, j, L)

    keys = sorted(terms.keys())
    coeffs = np.array([terms[k][0] for k in keys])
    values = np.array([float(basis_values(terms[k][1]) @ c9[k[0], k[1]]
                             @ basis_values(terms[k][2])) for k in keys])
    return AverageUpdateDecomposition(keys, coeffs, values)


def _edge_value(tensor: DiffusionTensor2D, which: str, xpt, ypt, c9, mesh,
                left_cell, axis, transverse_ref):
    """Tensor entry on an interface point ({entry} of the two u-traces)."""
    ent = {"a": tensor.a, "b": tensor.b, "c": tensor.c}[which]
    if not callable(ent):
        return float(ent)
    if not tensor.depends_u:
        return float(ent(xpt, ypt))
    nx, ny = mesh.x.n, mesh.y.n
    ci, cj = left_cell[0] % nx, left_cell[1] % ny
    if axis == "x":
        cR = c9[(ci + 1) % nx, cj]
        um = float(basis_values(1.0) @ c9[ci, cj] @ basis_values(transverse_ref))
        up = float(basis_values(-1.0) @ cR @ basis_values(transverse_ref))
    else:
        cR = c9[ci, (cj + 1) % ny]
        um = float(basis_values(transverse_ref) @ c9[ci, cj] @ basis_values(1.0))
        up = float(basis_values(transverse_ref) @ cR @ basis_values(-1.0))
    return 0.5 * (float(ent(xpt, ypt, um)) + float(ent(xpt, ypt, up)))


def _add_variable_mixed(add, field, tensor, params, tau, i, j, L):
    """Mixed-term coefficients for a variable off-diagonal entry.

    Each edge integral of {c} {tangential derivative} is expanded through the
    interpolation derivative of the transverse quadratic at its three test
    points, evaluated with the same Lobatto rule the scheme uses.
    """
    mesh = field.mesh
    nx, ny = mesh.x.n, mesh.y.n
    dx, dy = mesh.dx, mesh.dy
    lob = gauss_lobatto_rule(max(L, 5))  # same edge rule as the operator
    c9 = field.coeffs
    gX, gY = params.gx, params.gy

    def dlagrange(g, t):
        """Derivatives of the Lagrange basis on {-1, g, 1} at points t."""
        l1 = (2 * t - 1 - g) / (2 * (1 + g))
        l2 = 2 * t / (g * g - 1)
        l3 = (2 * t + 1 - g) / (2 * (1 - g))
        return np.stack([l1, l2, l3])

    # x-interfaces of cell (i, j): right edge sign +, left edge sign -
    dw_y = dlagrange(gY, lob.nodes)          # (3, L)
    for iface, sign in ((i, +1.0), (i - 1, -1.0)):
        xif = mesh.x.interfaces[(iface % nx) + 1]
        ypts = mesh.y.centers[j % ny] + 0.5 * dy * lob.nodes
        ce = np.array([_edge_value(tensor, "c", xif, yp, c9, mesh, (iface, j), "x", e)
                       for yp, e in zip(ypts, lob.nodes)])
        # integral = dy * sum_s w_s c_s * (2/dy) * sum_m {u}(pt_m) dl[m](eta_s)
        for m, eta in enumerate((-1.0, gY, 1.0)):
            q = 2.0 * np.dot(lob.weights, ce * dw_y[m])
            coeff = sign * tau / (dx * dy) * q * 0.5
            add(iface, j, 1.0, eta, coeff)        # u from the left cell
            add(iface + 1, j, -1.0, eta, coeff)   # u from the right cell
    # y-interfaces
    dw_x = dlagrange(gX, lob.nodes)
    for jface, sign in ((j, +1.0), (j - 1, -1.0)):
        yif = mesh.y.interfaces[(jface % ny) + 1]
        xpts = mesh.x.centers[i % nx] + 0.5 * dx * lob.nodes
        ce = np.array([_edge_value(tensor, "c", xp, yif, c9, mesh, (i, jface), "y", e)
                       for xp, e in zip(xpts, lob.nodes)])
        for m, xi in enumerate((-1.0, gX, 1.0)):
            q = 2.0 * np.dot(lob.weights, ce * dw_x[m])
            coeff = sign * tau / (dx * dy) * q * 0.5
            add(i, jface, xi, 1.0, coeff)
            add(i, jface + 1, xi, -1.0, coeff)
