"""Uniform 1D interval and 2D Cartesian meshes."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mesh1D:
    xmin: float
    xmax: float
    n: int

    @property
    def h(self) -> float:
        return (self.xmax - self.xmin) / self.n

    @property
    def centers(self) -> np.ndarray:
        return self.xmin + self.h * (np.arange(self.n) + 0.5)

    @property
    def interfaces(self) -> np.ndarray:
        return self.xmin + self.h * np.arange(self.n + 1)

    def to_physical(self, cell, xi):
        """Map reference coordinates xi in [-1, 1] of `cell` to physical x."""
        return self.centers[cell] + 0.5 * self.h * np.asarray(xi)


def build_mesh_1d(endpoints, n: int) -> Mesh1D:
    a, b = float(endpoints[0]), float(endpoints[1])
    if n < 2:
        raise ValueError(f"need at least 2 cells, got {n}")
    if not b > a:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    return Mesh1D(a, b, int(n))


@dataclass(frozen=True)
class Mesh2D:
    x: Mesh1D
    y: Mesh1D

    @property
    def dx(self) -> float:
        return self.x.h

    @property
    def dy(self) -> float:
        return self.y.h

    @property
    def kappa(self) -> float:
        """Aspect bound max(dx/dy, dy/dx) >= 1."""
        return max(self.dx / self.dy, self.dy / self.dx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy


def build_mesh_2d(x_endpoints, y_endpoints, nx: int, ny: int) -> Mesh2D:
    return Mesh2D(build_mesh_1d(x_endpoints, nx), build_mesh_1d(y_endpoints, ny))
