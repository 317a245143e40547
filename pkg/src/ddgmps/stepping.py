"""CFL bounds for weak monotonicity and SSP(3,3) time stepping."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fluxes import FluxParams, alpha_coeffs
from .weights import DirectionalWeights2D, WeightedCellData1D, omega_lower_bound


@dataclass
class CFLReport:
    tau: float
    safety: float
    mu0: Optional[float] = None      # bound on tau/h^2 (tau*(dx^-2+dy^-2) in 2D)
    lambda0: Optional[float] = None  # bound on tau/h (convection)
    binding: str = "user"
    details: dict = field(default_factory=dict)


def _diffusion_min_1d(wcd: WeightedCellData1D, params: FluxParams):
    """min over cells of the three weak-monotonicity ratios (A factored out)."""
    g = params.gamma
    a1p, _, a3p = alpha_coeffs(g, params)
    a1m, _, a3m = alpha_coeffs(-g, params)
    terms = [np.min(wcd.w1 / (a3m + a1p)),
             np.min(wcd.w3 / (a3p + a1m)),
             np.min((wcd.m1 - wcd.mx2) / (4.0 * (1.0 - 4.0 * params.beta1)))]
    return float(min(terms))


def cfl_1d_diffusion(wcd: WeightedCellData1D, params: FluxParams, a_max: float) -> float:
    """Mesh-ratio bound mu0 for the weighted diffusion scheme.

    a_max is the largest diffusivity over the interfaces.  The two endpoint
    ratios use omega1(gamma) and omega3(gamma): for even weights these equal
    the omega1(+-gamma) pair.
    """
    if a_max < 0:
        raise ConfigError("negative diffusivity bound")
    if a_max == 0.0:
        return math.inf
    mu0 = _diffusion_min_1d(wcd, params) / a_max
    if mu0 <= 0:
        raise ConfigError(f"nonpositive diffusion CFL bound {mu0}")
    return mu0


def cfl_1d_convection(wcd: WeightedCellData1D, lipschitz: float) -> float:
    """Convective mesh-ratio bound lambda0 = min(omega1, omega3) / (2 L)."""
    if lipschitz < 0:
        raise ConfigError("negative Lipschitz constant")
    if lipschitz == 0.0:
        return math.inf
    return float(min(np.min(wcd.w1), np.min(wcd.w3)) / (2.0 * lipschitz))


def cfl_1d_convdiff(wcd: WeightedCellData1D, params: FluxParams,
                    ahat_max: float, lipschitz: float):
    """(lambda0, mu0) for convection-diffusion via the half/half average split.

    Each half of the split average evolves with a doubled mesh ratio, so both
    the convective and the diffusive bound carry a factor 1/2 relative to the
    pure cases.  ahat_max bounds the interface-averaged diffusivity.
    """
    lam0 = cfl_1d_convection(wcd, lipschitz)
    mu0 = 0.5 * cfl_1d_diffusion(wcd, params, ahat_max)
    return lam0, mu0


def check_beta0_2d_constant(a, b, c, params: FluxParams, kappa: float, L: int):
    """Admissibility of beta0 for a constant tensor; returns the threshold."""
    what1 = 1.0 / (L * (L - 1))
    need = 1.0 + kappa * abs(c) / (2.0 * what1 * min(a, b)) if c != 0.0 else 1.0
    if params.beta0 < need - 1e-12:
        raise ConfigError(
            f"beta0 = {params.beta0} below the anisotropy threshold {need}")
    return need


def cfl_2d_constant(a, b, c, params: FluxParams, dw: DirectionalWeights2D,
                    kappa: float, L: int) -> float:
    """Mesh-ratio bound on mu = tau (dx^-2 + dy^-2) for a constant tensor."""
    check_beta0_2d_constant(a, b, c, params, kappa, L)
    wlow = omega_lower_bound(dw, params.gx, params.gy)
    g = params.gamma_max
    what1 = 1.0 / (L * (L - 1))
    amax = max(a, b)
    t1 = what1 / (what1 * amax * (params.beta0 + (8 * params.beta1 - 2) / (1 + g))
                  + kappa * abs(c))
    t2 = (1 - g * g) / (4 * amax * (1 - 4 * params.beta1))
    mu0 = wlow * min(t1, t2)
    if mu0 <= 0:
        raise ConfigError(f"nonpositive 2D CFL bound {mu0}")
    return mu0


def check_beta0_2d_variable(amin, cmax, params: FluxParams, kappa: float, L: int):
    g = params.gamma_max
    if cmax == 0.0:
        need = 1.0
    elif amin <= 0.0:
        raise ConfigError("variable-tensor beta0 threshold needs min{a, b} > 0 "
                          "when the off-diagonal entry is nonzero")
    else:
        need = 1.0 + 2.0 * kappa * cmax * L * (L - 1) / ((1.0 - g) * amin)
    if params.beta0 < need - 1e-12:
        raise ConfigError(
            f"beta0 = {params.beta0} below the variable-tensor threshold {need}")
    return need


def cfl_2d_variable(amin, amax, cmax, params: FluxParams, kappa: float, L: int) -> float:
    """Mesh-ratio bound for the variable-tensor scheme (bounds over space and u)."""
    check_beta0_2d_variable(amin, cmax, params, kappa, L)
    g = params.gamma_max
    t1 = (1 - 3 * g) / (6 * amax * (params.beta0 + (8 * params.beta1 - 2) / (1 + g)) * (1 - g)
                        + 12 * kappa * cmax * L * (L - 1))
    t2 = 1.0 / (6 * amax * (1 - 4 * params.beta1))
    mu0 = min(t1, t2)
    if mu0 <= 0:
        raise ConfigError(f"nonpositive 2D variable-tensor CFL bound {mu0}")
    return mu0


def ssp33_step(y, rhs, tau, t=0.0, limit=None):
    """One SSP(3,3) step: convex combinations of forward-Euler substeps.

    y is a coefficient array; rhs(t, y) returns dy/dt; `limit` (when given) is
    applied to every substage input and its output replaces the stage state.
    """
    lim = limit if limit is not None else (lambda v: v)
    y0 = lim(y)
    y1 = lim(y0 + tau * rhs(t, y0))
    y2 = lim(0.75 * y0 + 0.25 * (y1 + tau * rhs(t + tau, y1)))
    return (y0 + 2.0 * (y2 + tau * rhs(t + 0.5 * tau, y2))) / 3.0
