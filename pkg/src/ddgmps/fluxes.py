"""Diffusive (DDG) and convective (Lax-Friedrichs) numerical fluxes."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import DDPHI, DPHI_L, DPHI_R, PHI_L, PHI_R, DGField2D, basis_derivs, basis_values
from .quadrature import gauss_lobatto_rule


@dataclass(frozen=True)
class FluxParams:
    """DDG flux parameters plus the interior test-point offset(s)."""

    beta0: float
    beta1: float
    gamma: float = 0.0
    gamma_y: float | None = None  # second-axis test point (2D); defaults to gamma

    @property
    def gx(self) -> float:
        return self.gamma

    @property
    def gy(self) -> float:
        return self.gamma if self.gamma_y is None else self.gamma_y

    @property
    def gamma_max(self) -> float:
        return max(abs(self.gx), abs(self.gy))

    def validate(self):
        if not 0.125 <= self.beta1 <= 0.25:
            raise ConfigError(f"beta1 = {self.beta1} outside [1/8, 1/4]")
        if self.beta0 < 1.0:
            raise ConfigError(f"beta0 = {self.beta0} below 1")
        cap = 8.0 * self.beta1 - 1.0
        if self.gamma_max > cap + 1e-14:
            raise ConfigError(f"|gamma| = {self.gamma_max} exceeds 8*beta1 - 1 = {cap}")
        return self


def ddg_flux_1d(um, up, dum, dup, ddum, ddup, h, params: FluxParams):
    """Gradient flux (beta0/h)[u] + {du} + beta1*h*[ddu] from one-sided traces."""
    return (params.beta0 / h * (up - um)
            + 0.5 * (dum + dup)
            + params.beta1 * h * (ddup - ddum))


def alpha_coeffs(gamma, params: FluxParams):
    """Coefficients of the three-point flux representation; they sum to beta0."""
    b0, b1, g = params.beta0, params.beta1, gamma
    a1 = (8.0 * b1 - 1.0 + g) / (2.0 * (1.0 + g))
    a2 = 2.0 * (1.0 - 4.0 * b1) / (1.0 - g * g)
    a3 = b0 + (8.0 * b1 - 3.0 + g) / (2.0 * (1.0 - g))
    return a1, a2, a3


def flux_via_alpha(cl, cr, gamma, params: FluxParams, h):
    """The DDG gradient flux written on point values at {-1, gamma, 1}.

    Algebraically identical to ddg_flux_1d on the traces of the same two
    quadratics; kept as an independent path for testing the representation.
    """
    a1p, a2p, a3p = alpha_coeffs(gamma, params)
    a1m, a2m, a3m = alpha_coeffs(-gamma, params)
    cl, cr = np.asarray(cl), np.asarray(cr)
    pg = basis_values(gamma)
    right = a3m * (cr @ PHI_L) + a2m * (cr @ pg) + a1m * (cr @ PHI_R)
    left = a1p * (cl @ PHI_L) + a2p * (cl @ pg) + a3p * (cl @ PHI_R)
    return (right - left) / h


@dataclass(frozen=True)
class MonotoneFluxSpec:
    """Global Lax-Friedrichs flux data: f and its derivative bound sigma."""

    f: callable
    sigma: float

    @property
    def lipschitz(self) -> float:
        return self.sigma


def monotone_flux_spec(f, bounds, deriv_bound=None, fprime=None,
                       samples=1025, inflate=1.05) -> MonotoneFluxSpec:
    """Build the LF flux spec; sigma = max |f'| over [c1, c2].

    A problem-supplied closed-form bound wins; otherwise |f'| is sampled on an
    even grid (via fprime if given, else central differences) and inflated.
    """
    if deriv_bound is not None:
        return MonotoneFluxSpec(f, float(deriv_bound))
    c1, c2 = bounds
    u = np.linspace(c1, c2, samples)
    if fprime is not None:
        s = np.max(np.abs(fprime(u)))
    else:
        du = max(1e-7, 1e-7 * (c2 - c1))
        s = np.max(np.abs(f(u + du) - f(u - du))) / (2 * du)
    return MonotoneFluxSpec(f, float(inflate * s))


def lax_friedrichs(um, up, spec: MonotoneFluxSpec):
    """Monotone two-point flux 0.5 (f(u-) + f(u+) - sigma (u+ - u-))."""
    return 0.5 * (spec.f(um) + spec.f(up) - spec.sigma * (up - um))


def ddg_flux_2d(field: DGField2D, k: int, axis: str, params: FluxParams, L: int = 3):
    """Normal and tangential gradient-flux components on one mesh interface.

    Returns (normal, tangential), each sampled at the L Gauss-Lobatto points
    of the interface; `axis` is "x" (interface k in 0..Nx, arrays over
    (Ny, L)) or "y" (transposed roles).  Periodic neighbor lookup.
    """
    lob = gauss_lobatto_rule(L)
    pl = basis_values(lob.nodes)   # (L, 3)
    dpl = basis_derivs(lob.nodes)
    c = field.coeffs
    mesh = field.mesh
    if axis == "x":
        cl, cr = c[(k - 1) % mesh.x.n], c[k % mesh.x.n]   # (Ny, 3, 3)
        dn, dt = mesh.dx, mesh.dy
        um = np.einsum("jab,a,sb->js", cl, PHI_R, pl)
        up = np.einsum("jab,a,sb->js", cr, PHI_L, pl)
        dum = np.einsum("jab,a,sb->js", cl, DPHI_R, pl) * 2 / dn
        dup = np.einsum("jab,a,sb->js", cr, DPHI_L, pl) * 2 / dn
        ddum = np.einsum("jab,a,sb->js", cl, DDPHI, pl) * 4 / dn**2
        ddup = np.einsum("jab,a,sb->js", cr, DDPHI, pl) * 4 / dn**2
        tm = np.einsum("jab,a,sb->js", cl, PHI_R, dpl) * 2 / dt
        tp = np.einsum("jab,a,sb->js", cr, PHI_L, dpl) * 2 / dt
    elif axis == "y":
        cl, cr = c[:, (k - 1) % mesh.y.n], c[:, k % mesh.y.n]   # (Nx, 3, 3)
        dn, dt = mesh.dy, mesh.dx
        um = np.einsum("iab,b,sa->is", cl, PHI_R, pl)
        up = np.einsum("iab,b,sa->is", cr, PHI_L, pl)
        dum = np.einsum("iab,b,sa->is", cl, DPHI_R, pl) * 2 / dn
        dup = np.einsum("iab,b,sa->is", cr, DPHI_L, pl) * 2 / dn
        ddum = np.einsum("iab,b,sa->is", cl, DDPHI, pl) * 4 / dn**2
        ddup = np.einsum("iab,b,sa->is", cr, DDPHI, pl) * 4 / dn**2
        tm = np.einsum("iab,b,sa->is", cl, PHI_R, dpl) * 2 / dt
        tp = np.einsum("iab,b,sa->is", cr, PHI_L, dpl) * 2 / dt
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    normal = ddg_flux_1d(um, up, dum, dup, ddum, ddup, dn, params)
    tangential = 0.5 * (tm + tp)
    return normal, tangential
