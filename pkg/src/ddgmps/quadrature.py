"""Gauss and Gauss-Lobatto quadrature on the reference element [-1, 1].

All rules are stored for the *average* integral (1/2) * int_{-1}^{1}, so the
weights of every rule sum to one.  Integrals over a physical cell are obtained
by multiplying by the cell measure.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights on [-1, 1], normalized so that weights sum to 1."""

    kind: str
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def average(self, values):
        """Average integral (1/2) int f dxi of nodal values along the last axis."""
        return np.asarray(values) @ self.weights


def gauss_rule(n: int) -> QuadratureRule:
    """n-point Gauss rule, exact for polynomials of degree <= 2n - 1."""
    if n < 1:
        raise ValueError(f"Gauss rule needs at least 1 point, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule("gauss", x, w / 2.0)


def _legendre_and_derivative(n: int, x: np.ndarray):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (x * p1 - p0) / (x * x - 1.0)
    ends = np.abs(np.abs(x) - 1.0) < 1e-14
    if np.any(ends):
        dp = np.where(ends, np.sign(x) ** (n + 1) * n * (n + 1) / 2.0, dp)
    return p1, dp


def gauss_lobatto_rule(L: int) -> QuadratureRule:
    """L-point Gauss-Lobatto rule including both endpoints.

    Exact for polynomials of degree <= 2L - 3; the endpoint weight equals
    1/(L(L-1)) under the unit-sum normalization.  Interior nodes are the roots
    of P'_{L-1}, found by Newton iteration from Chebyshev-Lobatto guesses.
    """
    if L < 3:
        raise ValueError(f"Gauss-Lobatto rule needs at least 3 points, got {L}")
    m = L - 1
    x = np.cos(np.pi * np.arange(1, m) / m)[::-1].copy()  # interior guesses
    for _ in range(100):
        p, dp = _legendre_and_derivative(m, x)
        # Newton on P'_m, using the ODE (1-x^2)P''_m = 2x P'_m - m(m+1)P_m
        ddp = (2 * x * dp - m * (m + 1) * p) / (1.0 - x * x)
        step = dp / ddp
        x -= step
        if np.max(np.abs(step)) < 1e-15:
            break
    nodes = np.concatenate(([-1.0], x, [1.0]))
    pL, _ = _legendre_and_derivative(m, nodes)
    weights = 1.0 / (m * L * pL**2)  # average-integral convention
    return QuadratureRule("gauss-lobatto", nodes, weights)


# 16-point Gauss rule used for every volume/moment integral in the solver.
VOLUME_RULE = gauss_rule(16)
