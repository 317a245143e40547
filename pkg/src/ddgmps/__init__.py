"""Third-order bound-preserving direct DG schemes for weighted
convection-diffusion problems on 1D and 2D Cartesian meshes."""

from .driver import ConvergenceReport, RunConfig, RunReport, convergence_study, run
from .errors import BlowUpError, ConfigError
from .fields import DGField1D, DGField2D, project_1d, project_2d
from .fluxes import FluxParams, MonotoneFluxSpec
from .limiter import Bounds, apply_limiter_1d, apply_limiter_2d
from .mesh import Mesh1D, Mesh2D, build_mesh_1d, build_mesh_2d
from .problems import problem_library
from .quadrature import QuadratureRule, gauss_lobatto_rule, gauss_rule
from .scheme1d import BC1D, SpatialOperator1D
from .scheme2d import DiffusionTensor2D, SpatialOperator2D

__all__ = [
    "BC1D", "BlowUpError", "Bounds", "ConfigError", "ConvergenceReport",
    "DGField1D", "DGField2D", "DiffusionTensor2D", "FluxParams", "Mesh1D",
    "Mesh2D", "MonotoneFluxSpec", "QuadratureRule", "RunConfig", "RunReport",
    "SpatialOperator1D", "SpatialOperator2D", "apply_limiter_1d",
    "apply_limiter_2d", "build_mesh_1d", "build_mesh_2d", "convergence_study",
    "gauss_lobatto_rule", "gauss_rule", "problem_library", "project_1d",
    "project_2d", "run",
]

__version__ = "0.1.0"
