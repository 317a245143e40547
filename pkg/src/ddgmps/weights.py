"""Weighted cell moments and the interpolation-weight machinery.

For a positive weight M the average moments <q>_j = (1/2) int M(x_j + h xi/2)
q(xi) dxi determine, per cell, the admissible interval (a_j, b_j) for the
interior test point gamma and the three interpolation weights
omega_tilde^{1,2,3} that express the weighted cell average of any quadratic
through its values at {-1, gamma, 1}.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .mesh import Mesh1D, Mesh2D
from .quadrature import VOLUME_RULE, gauss_lobatto_rule

_UNIT = (1.0, 0.0, 1.0 / 3.0)  # moments of {1, xi, xi^2} for M == 1


def weighted_moment(weight, center, h, q, rule=VOLUME_RULE):
    """Average moment (1/2) int M(center + h xi/2) q(xi) dxi on one cell."""
    xi = rule.nodes
    mvals = np.asarray(weight(center + 0.5 * h * xi), dtype=float) if weight else np.ones_like(xi)
    return np.dot(rule.weights, mvals * np.asarray(q(xi), dtype=float))


def cell_moments_1d(mesh: Mesh1D, weight=None, rule=VOLUME_RULE):
    """Per-cell moments (<1>, <xi>, <xi^2>), each shape (N,)."""
    if weight is None:
        one = np.ones(mesh.n)
        return one * _UNIT[0], one * _UNIT[1], one * _UNIT[2]
    xq = mesh.centers[:, None] + 0.5 * mesh.h * rule.nodes[None, :]
    mq = np.asarray(weight(xq), dtype=float)
    if np.any(mq <= 0.0):
        raise ConfigError("weight M is nonpositive at a quadrature node")
    w = rule.weights
    return mq @ w, (mq * rule.nodes) @ w, (mq * rule.nodes**2) @ w


def compute_ab(m1, mx, mx2):
    """Admissible gamma interval (a_j, b_j) per cell from the moments."""
    a = (mx - mx2) / (m1 - mx)
    b = (mx + mx2) / (m1 + mx)
    if np.any(a >= b):
        raise ConfigError("degenerate admissible interval (quadrature failure?)")
    return a, b


def compute_omega_tilde(m1, mx, mx2, gamma):
    """Interpolation weights (omega1, omega2, omega3) for a test point gamma.

    They sum to <1>_j identically and are all positive iff gamma lies in
    (a_j, b_j).  Negative output is legal; admissibility is the caller's job.
    """
    g = gamma
    w1 = (g * m1 - (1.0 + g) * mx + mx2) / (2.0 * (1.0 + g))
    w2 = (m1 - mx2) / (1.0 - g * g)
    w3 = (-g * m1 + (1.0 - g) * mx + mx2) / (2.0 * (1.0 - g))
    return w1, w2, w3


@dataclass
class WeightedCellData1D:
    """Per-cell moments, admissible interval, and weights for a chosen gamma."""

    mesh: Mesh1D
    m1: np.ndarray
    mx: np.ndarray
    mx2: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gamma: float = 0.0
    w1: np.ndarray = None
    w2: np.ndarray = None
    w3: np.ndarray = None

    def with_gamma(self, gamma: float) -> "WeightedCellData1D":
        w1, w2, w3 = compute_omega_tilde(self.m1, self.mx, self.mx2, gamma)
        return WeightedCellData1D(self.mesh, self.m1, self.mx, self.mx2,
                                  self.a, self.b, gamma, w1, w2, w3)

    @property
    def ubar_weights(self):
        return self.m1


def weighted_cell_data_1d(mesh: Mesh1D, weight=None, rule=VOLUME_RULE) -> WeightedCellData1D:
    m1, mx, mx2 = cell_moments_1d(mesh, weight, rule)
    a, b = compute_ab(m1, mx, mx2)
    return WeightedCellData1D(mesh, m1, mx, mx2, a, b)


def select_gamma(a, b, beta1, user_gamma=None):
    """One global gamma inside every (a_j, b_j), with |gamma| <= 8 beta1 - 1.

    Auto-selection takes the admissible value of largest magnitude, preferring
    the positive sign; a user-supplied gamma is validated instead.
    """
    cap = 8.0 * beta1 - 1.0
    if cap < 0.0:
        raise ConfigError(f"beta1 = {beta1} below 1/8 leaves no admissible gamma")
    lo, hi = float(np.max(a)), float(np.min(b))
    if user_gamma is not None:
        g = float(user_gamma)
        if abs(g) > cap + 1e-14:
            raise ConfigError(f"|gamma| = {abs(g)} exceeds 8*beta1 - 1 = {cap}")
        if not lo < g < hi:
            j = int(np.argmax(a)) if g <= lo else int(np.argmin(b))
            raise ConfigError(
                f"gamma = {g} outside the admissible interval ({lo}, {hi}) set by cell {j}")
        return g
    if not lo < hi:
        raise ConfigError(
            f"empty admissible gamma interval: max a_j = {lo} >= min b_j = {hi} "
            f"(cells {int(np.argmax(a))}, {int(np.argmin(b))})")
    eps = 1e-9 * (hi - lo)
    cands = []
    pos = min(cap, hi - eps)
    if pos > lo:
        cands.append(pos)
    neg = max(-cap, lo + eps)
    if neg < hi:
        cands.append(neg)
    if not cands:
        raise ConfigError(f"no gamma in ({lo}, {hi}) with |gamma| <= {cap}")
    return max(cands, key=lambda g: (abs(g), g))


@dataclass
class DirectionalWeights2D:
    """Line moments of M along each axis at the transverse Lobatto nodes.

    Arrays are indexed (i, j, sigma): for the x-direction sigma runs over the
    Lobatto nodes of the y-interval of cell (i, j), and vice versa.
    """

    mesh: Mesh2D
    L: int
    m1_x: np.ndarray
    mx_x: np.ndarray
    mx2_x: np.ndarray
    m1_y: np.ndarray
    mx_y: np.ndarray
    mx2_y: np.ndarray

    def ab_x(self):
        return compute_ab(self.m1_x, self.mx_x, self.mx2_x)

    def ab_y(self):
        return compute_ab(self.m1_y, self.mx_y, self.mx2_y)

    def omega_x(self, gamma_x):
        return compute_omega_tilde(self.m1_x, self.mx_x, self.mx2_x, gamma_x)

    def omega_y(self, gamma_y):
        return compute_omega_tilde(self.m1_y, self.mx_y, self.mx2_y, gamma_y)


def directional_weights_2d(mesh: Mesh2D, weight=None, L: int = 3,
                           rule=VOLUME_RULE) -> DirectionalWeights2D:
    lob = gauss_lobatto_rule(L)
    nx, ny = mesh.x.n, mesh.y.n
    if weight is None:
        shape = (nx, ny, L)
        ones = np.ones(shape)
        return DirectionalWeights2D(mesh, L, ones, 0.0 * ones, ones / 3.0,
                                    ones.copy(), 0.0 * ones, ones / 3.0)
    xq = mesh.x.centers[:, None] + 0.5 * mesh.dx * rule.nodes[None, :]   # (nx, q)
    yq = mesh.y.centers[:, None] + 0.5 * mesh.dy * rule.nodes[None, :]   # (ny, q)
    xl = mesh.x.centers[:, None] + 0.5 * mesh.dx * lob.nodes[None, :]    # (nx, L)
    yl = mesh.y.centers[:, None] + 0.5 * mesh.dy * lob.nodes[None, :]    # (ny, L)

    # x-lines: M(x_i(q), y_j(sigma)) -> (nx, ny, L, q)
    mxl = np.asarray(weight(xq[:, None, None, :], yl[None, :, :, None]), dtype=float)
    mxl = np.broadcast_to(mxl, (nx, ny, L, rule.n))
    if np.any(mxl <= 0.0):
        raise ConfigError("weight M is nonpositive at a quadrature node")
    w, t = rule.weights, rule.nodes
    m1x = mxl @ w
    mxx = (mxl * t) @ w
    mx2x = (mxl * t * t) @ w

    # y-lines: M(x_i(sigma), y_j(q)) -> (nx, ny, L, q)
    myl = np.asarray(weight(xl[:, None, :, None], yq[None, :, None, :]), dtype=float)
    myl = np.broadcast_to(myl, (nx, ny, L, rule.n))
    m1y = myl @ w
    mxy = (myl * t) @ w
    mx2y = (myl * t * t) @ w
    return DirectionalWeights2D(mesh, L, m1x, mxx, mx2x, m1y, mxy, mx2y)


def select_gamma_2d(dw: DirectionalWeights2D, beta1, user_gx=None, user_gy=None):
    """Per-axis gamma from the intersection over all cells and transverse nodes."""
    ax, bx = dw.ab_x()
    ay, by = dw.ab_y()
    gx = select_gamma(ax, bx, beta1, user_gx)
    gy = select_gamma(ay, by, beta1, user_gy)
    return gx, gy


def omega_lower_bound(dw: DirectionalWeights2D, gamma_x, gamma_y):
    """Global lower bound on the directional interpolation weights.

    Minimum over both axes, both gamma signs of the first weight, the second
    weight, all cells, and all transverse Lobatto nodes.
    """
    vals = []
    for g in (gamma_x, -gamma_x):
        w1, w2, _ = dw.omega_x(g)
        vals.append(w1.min())
    vals.append(dw.omega_x(gamma_x)[1].min())
    for g in (gamma_y, -gamma_y):
        w1, w2, _ = dw.omega_y(g)
        vals.append(w1.min())
    vals.append(dw.omega_y(gamma_y)[1].min())
    bound = float(min(vals))
    if bound <= 0.0:
        raise ConfigError(f"nonpositive directional weight bound {bound}; gamma inadmissible")
    return bound
