"""Built-in problem definitions for the solver and its test drivers."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .scheme1d import BC1D, PERIODIC
from .scheme2d import DiffusionTensor2D


@dataclass(frozen=True)
class Problem1D:
    name: str
    domain: tuple
    initial: Callable
    weight: Optional[Callable] = None
    diffusion: Optional[Callable] = None
    diffusion_in_u: bool = False
    diffusion_max: Optional[float] = None    # closed-form bound over the solution range
    flux: Optional[Callable] = None
    flux_sigma: Optional[float] = None       # closed-form max |f'| over [c1, c2]
    bc: BC1D = PERIODIC
    exact: Optional[Callable] = None          # u(t, x)
    bounds: Optional[tuple] = None

    @property
    def dim(self):
        return 1


@dataclass(frozen=True)
class Problem2D:
    name: str
    domain_x: tuple
    domain_y: tuple
    initial: Callable                          # u0(x, y)
    tensor: DiffusionTensor2D = None
    weight: Optional[Callable] = None
    velocity: Optional[tuple] = None           # linear convection u * (vx, vy)
    exact: Optional[Callable] = None           # u(t, x, y)
    bounds: Optional[tuple] = None
    linear_rhs: bool = False                   # constant weight/tensor, linear flux

    @property
    def dim(self):
        return 2


def heat_weighted_1d() -> Problem1D:
    weight = lambda x: 4.0 * np.asarray(x) * np.exp(1.0 - np.asarray(x) ** 2)
    diff = lambda x: np.exp(1.0 - np.asarray(x) ** 2) / np.asarray(x)
    exact = lambda t, x: np.exp(-t) * np.sin(np.asarray(x) ** 2 - 1.0 - t)
    return Problem1D(
        name="heat_weighted_1d",
        domain=(1.0, 3.0),
        initial=lambda x: exact(0.0, x),
        weight=weight,
        diffusion=diff,
        diffusion_max=1.0,  # max of exp(1-x^2)/x on [1, 3], attained at x = 1
        bc=BC1D("exact", exact=exact),
        exact=exact,
        bounds=(-1.0, 1.0),
    )


def barenblatt(m: float):
    """Self-similar compactly supported solution of u_t = (u^m)_xx."""
    alpha = 1.0 / (m + 1.0)

    def profile(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        bracket = 1.0 - alpha * (m - 1.0) / (2.0 * m) * x**2 / t ** (2 * alpha)
        return t ** (-alpha) * np.clip(bracket, 0.0, None) ** (1.0 / (m - 1.0))

    return profile


def barenblatt_corner(m: float, t: float) -> float:
    """Support radius of the self-similar profile (location of the kinks)."""
    alpha = 1.0 / (m + 1.0)
    return float(np.sqrt(2.0 * m * t ** (2 * alpha) / (alpha * (m - 1.0))))


def porous_medium(m: int) -> Problem1D:
    # domain wide enough that the support at the final reference time stays
    # interior and the N = 200, dt = 1e-4 run sits inside the explicit
    # stability region
    prof = barenblatt(m)
    return Problem1D(
        name=f"porous_medium_m{m}",
        domain=(-8.0, 8.0),
        initial=lambda x: prof(1.0, x),
        diffusion=lambda x, u: m * u ** (m - 1),
        diffusion_in_u=True,
        diffusion_max=float(m),                # m * u^(m-1) on [0, 1]
        bc=BC1D("dirichlet", left=0.0, right=0.0),
        exact=lambda t, x: prof(1.0 + t, x),   # time-shifted self-similar reference
        bounds=(0.0, 1.0),
    )


def buckley_leverett() -> Problem1D:
    eps = 0.01

    def f(u):
        u = np.asarray(u, dtype=float)
        return u**2 / (u**2 + (1.0 - u) ** 2)

    def nu(x, u):
        u = np.asarray(u, dtype=float)
        return eps * np.where((u >= 0.0) & (u <= 1.0), 4.0 * u * (1.0 - u), 0.0)

    return Problem1D(
        name="buckley_leverett",
        domain=(0.0, 1.0),
        initial=lambda x: np.where(np.asarray(x) <= 1.0 / 3.0,
                                   np.clip(1.0 - 3.0 * np.asarray(x), 0.0, None), 0.0),
        diffusion=nu,
        diffusion_in_u=True,
        diffusion_max=eps,                     # max of eps * 4u(1-u) on [0, 1]
        flux=f,
        flux_sigma=2.0,                        # max f' on [0, 1], attained at u = 1/2
        bc=BC1D("dirichlet", left=1.0, right=0.0),
        bounds=(0.0, 1.0),
    )


ANISO_TENSORS = {
    1: np.array([[1.0, 0.0], [0.0, 1.0]]),
    2: np.array([[1.0, 0.0], [0.0, 2.0]]),
    3: np.array([[1.0, 1.0], [1.0, 2.0]]),
}


def gaussian_exact_2d(amat, velocity=(0.01, 0.01), sigma0=0.01):
    amat = np.asarray(amat, dtype=float)

    def u(t, x, y):
        s = sigma0**2 * np.eye(2) + 2.0 * amat * t
        det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
        zx = np.asarray(x) - velocity[0] * t
        zy = np.asarray(y) - velocity[1] * t
        q = (s[1, 1] * zx * zx - 2.0 * s[0, 1] * zx * zy + s[0, 0] * zy * zy) / det
        return sigma0**2 / np.sqrt(det) * np.exp(-0.5 * q)

    return u


def aniso_2d(case: int) -> Problem2D:
    if case not in ANISO_TENSORS:
        raise ConfigError(f"unknown anisotropic case {case}; choose 1, 2 or 3")
    amat = ANISO_TENSORS[case]
    exact = gaussian_exact_2d(amat)
    return Problem2D(
        name=f"aniso_2d_case{case}",
        domain_x=(-1.0, 1.0),
        domain_y=(-1.0, 1.0),
        initial=lambda x, y: exact(0.0, x, y),
        tensor=DiffusionTensor2D(float(amat[0, 0]), float(amat[1, 1]), float(amat[0, 1])),
        velocity=(0.01, 0.01),
        exact=exact,
        bounds=(0.0, 1.0),
        linear_rhs=True,
    )


def problem_library() -> dict:
    return {
        "heat_weighted_1d": heat_weighted_1d,
        "porous_medium_m2": lambda: porous_medium(2),
        "porous_medium_m5": lambda: porous_medium(5),
        "buckley_leverett": buckley_leverett,
        "aniso_2d_case1": lambda: aniso_2d(1),
        "aniso_2d_case2": lambda: aniso_2d(2),
        "aniso_2d_case3": lambda: aniso_2d(3),
    }


def get_problem(name: str):
    lib = problem_library()
    if name not in lib:
        raise ConfigError(f"unknown problem {name!r}; available: {sorted(lib)}")
    return lib[name]()
