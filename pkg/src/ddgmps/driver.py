"""Run orchestration: configuration, the time loop, reports, and CSV output."""

import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import BlowUpError, ConfigError
from .fields import DGField1D, DGField2D, project_1d, project_2d
from .fluxes import FluxParams, monotone_flux_spec
from .limiter import (Bounds, apply_limiter_1d, apply_limiter_2d,
                      bounds_from_initial_1d, bounds_from_initial_2d,
                      build_test_set_2d, cell_average_weights_2d,
                      check_points_1d, mps_violation_1d, mps_violation_2d)
from .mesh import build_mesh_1d, build_mesh_2d
from .norms import (consecutive_error_1d, consecutive_error_2d,
                    corner_excluding_error_1d, error_norm_1d, error_norm_2d)
from .problems import get_problem
from .quadrature import VOLUME_RULE
from .scheme1d import SpatialOperator1D
from .scheme2d import LinearRhs2D, SpatialOperator2D, tensor_bounds
from .stepping import (CFLReport, cfl_1d_convdiff, cfl_1d_diffusion,
                       cfl_2d_constant, cfl_2d_variable, ssp33_step)
from .weights import (directional_weights_2d, select_gamma, select_gamma_2d,
                      weighted_cell_data_1d)


@dataclass
class RunConfig:
    problem: str
    nx: int
    ny: Optional[int] = None
    beta0: float = 2.0
    beta1: float = 0.16
    gamma: Union[float, str] = "auto"
    dt: Union[float, str] = "auto"
    safety: float = 0.9
    t_final: float = 0.1
    limiter: bool = True
    lobatto_points: Optional[int] = None
    out_dir: Optional[str] = None
    samples: int = 4                 # solution-dump samples per cell per axis
    snap_every: Optional[int] = None
    unweighted_projection: bool = False
    avg_warn_tol: float = 1e-10
    avg_hard_tol: Optional[float] = None  # default depends on BC kind


@dataclass
class SnapshotRow:
    t: float
    e1: float
    e2: float
    einf: float
    min_u: float
    max_u: float
    mass_drift: float


@dataclass
class RunReport:
    problem: str
    config: RunConfig
    cfl: CFLReport
    rows: list = field(default_factory=list)
    final: object = None
    blown_up: bool = False

    def row_at(self, t, tol=1e-12):
        for r in self.rows:
            if abs(r.t - t) <= tol * max(1.0, abs(t)):
                return r
        raise KeyError(f"no snapshot at t = {t}")


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


def write_report_csv(report: RunReport, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("t,e1,e2,einf,min_u,max_u,mass_drift\n")
        for r in report.rows:
            fh.write(",".join(_fmt(v) for v in
                              (r.t, r.e1, r.e2, r.einf, r.min_u, r.max_u,
                               r.mass_drift)) + "\n")


def write_solution_csv(fld, path, samples=4):
    pts = np.linspace(-1.0, 1.0, samples) if samples > 1 else np.array([0.0])
    with open(path, "w", newline="\n") as fh:
        if isinstance(fld, DGField1D):
            fh.write("x,u\n")
            mesh = fld.mesh
            vals = fld.eval_ref(pts)
            for j in range(mesh.n):
                for q, xi in enumerate(pts):
                    x = mesh.centers[j] + 0.5 * mesh.h * xi
                    fh.write(f"{_fmt(x)},{_fmt(vals[j, q])}\n")
        else:
            fh.write("x,y,u\n")
            mesh = fld.mesh
            vals = fld.eval_ref(pts, pts)
            for i in range(mesh.x.n):
                for j in range(mesh.y.n):
                    for p, xi in enumerate(pts):
                        for q, eta in enumerate(pts):
                            x = mesh.x.centers[i] + 0.5 * mesh.dx * xi
                            y = mesh.y.centers[j] + 0.5 * mesh.dy * eta
                            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(vals[i, j, p, q])}\n")


def _steps_for(dt, t_final):
    n = int(round(t_final / dt))
    if n >= 1 and abs(n * dt - t_final) <= 1e-9 * t_final:
        return n, dt
    n = max(1, int(math.ceil(t_final / dt - 1e-12)))
    return n, dt  # final step shortened inside the loop


class _Runner1D:
    def __init__(self, cfg: RunConfig, prob):
        self.cfg = cfg
        self.prob = prob
        self.mesh = build_mesh_1d(prob.domain, cfg.nx)
        wcd = weighted_cell_data_1d(self.mesh, prob.weight)
        user_gamma = None if cfg.gamma == "auto" else float(cfg.gamma)
        gamma = select_gamma(wcd.a, wcd.b, cfg.beta1, user_gamma)
        self.params = FluxParams(cfg.beta0, cfg.beta1, gamma).validate()
        self.wcd = wcd.with_gamma(gamma)
        self.bounds = Bounds(*prob.bounds) if prob.bounds else \
            bounds_from_initial_1d(prob.initial, self.mesh, gamma)
        self.conv = monotone_flux_spec(prob.flux, (self.bounds.lo, self.bounds.hi),
                                       deriv_bound=prob.flux_sigma) if prob.flux else None
        self.op = SpatialOperator1D(self.mesh, self.params, weight=prob.weight,
                                    diffusion=prob.diffusion,
                                    diffusion_in_u=prob.diffusion_in_u,
                                    convection=self.conv, bc=prob.bc)
        weight = None if cfg.unweighted_projection else prob.weight
        self.field0 = project_1d(prob.initial, self.mesh, weight=weight)
        self.hard_tol = cfg.avg_hard_tol if cfg.avg_hard_tol is not None else \
            (1e-6 if prob.bc.kind == "periodic" else 1e-3)

    def cfl(self) -> CFLReport:
        cfg, prob = self.cfg, self.prob
        if prob.diffusion_in_u:
            amax = prob.diffusion_max
            if amax is None:
                uu = np.linspace(self.bounds.lo, self.bounds.hi, 1025)
                amax = 1.05 * float(np.max(prob.diffusion(self.mesh.centers[0], uu)))
        elif prob.diffusion is not None:
            amax = float(np.max(prob.diffusion(self.mesh.interfaces)))
        else:
            amax = 0.0
        h = self.mesh.h
        if self.conv is not None:
            lam0, mu0 = cfl_1d_convdiff(self.wcd, self.params, amax, self.conv.sigma)
            tau_auto = cfg.safety * min(lam0 * h, mu0 * h * h)
            binding = "convection" if lam0 * h < mu0 * h * h else "diffusion"
        else:
            mu0 = cfl_1d_diffusion(self.wcd, self.params, amax)
            lam0 = None
            tau_auto = cfg.safety * mu0 * h * h
            binding = "diffusion"
        if cfg.dt == "auto":
            tau = tau_auto
        else:
            tau = float(cfg.dt)
            binding = "user"
        return CFLReport(tau=tau, safety=cfg.safety, mu0=mu0, lambda0=lam0,
                         binding=binding,
                         details={"a_max": amax, "gamma": self.params.gamma})

    def limit(self, coeffs):
        out = apply_limiter_1d(DGField1D(self.mesh, coeffs), self.bounds, self.wcd,
                               warn_tol=self.cfg.avg_warn_tol, hard_tol=self.hard_tol)
        return out.coeffs

    def rhs(self, t, coeffs):
        return self.op.rhs(coeffs, t)

    def row(self, t, coeffs, mass0):
        fld = DGField1D(self.mesh, coeffs)
        if self.prob.exact is not None:
            ex = self.prob.exact
            e1 = error_norm_1d(fld, lambda x: ex(t, x), p=1)
            e2 = error_norm_1d(fld, lambda x: ex(t, x), p=2)
        else:
            e1 = e2 = float("nan")
        einf = mps_violation_1d(fld, self.bounds, self.params.gamma)
        from .fields import basis_values
        vals = coeffs @ basis_values(check_points_1d(self.params.gamma)).T
        mass = float((self.op.mass[:, 0, :] * coeffs).sum())
        drift = (mass - mass0) / max(1.0, abs(mass0))
        return SnapshotRow(t, e1, e2, einf, float(vals.min()), float(vals.max()), drift)

    def mass(self, coeffs):
        return float((self.op.mass[:, 0, :] * coeffs).sum())

    def make_field(self, coeffs):
        return DGField1D(self.mesh, coeffs)


class _Runner2D:
    def __init__(self, cfg: RunConfig, prob):
        self.cfg = cfg
        self.prob = prob
        ny = cfg.ny if cfg.ny is not None else cfg.nx
        self.mesh = build_mesh_2d(prob.domain_x, prob.domain_y, cfg.nx, ny)
        tensor = prob.tensor
        self.variable_tensor = tensor is not None and not tensor.constant
        self.L = cfg.lobatto_points or (5 if self.variable_tensor else 3)
        user_gamma = None if cfg.gamma == "auto" else float(cfg.gamma)
        self.dw = directional_weights_2d(self.mesh, prob.weight, L=self.L)
        if self.variable_tensor:
            if user_gamma not in (None, 0.0):
                raise ConfigError("variable-tensor runs use gamma = 0 so the "
                                  "interior test point is a Lobatto node")
            gx = gy = 0.0
        else:
            gx, gy = select_gamma_2d(self.dw, cfg.beta1, user_gamma, user_gamma)
        self.params = FluxParams(cfg.beta0, cfg.beta1, gx, gamma_y=gy).validate()
        self.bounds = Bounds(*prob.bounds) if prob.bounds else \
            bounds_from_initial_2d(prob.initial, self.mesh, gx, gy, L=self.L)
        if prob.velocity is not None:
            vx, vy = prob.velocity
            self.conv = (monotone_flux_spec(lambda u: vx * u, (self.bounds.lo, self.bounds.hi),
                                            deriv_bound=abs(vx)),
                         monotone_flux_spec(lambda u: vy * u, (self.bounds.lo, self.bounds.hi),
                                            deriv_bound=abs(vy)))
        else:
            self.conv = None
        self.testset = build_test_set_2d(gx, gy, self.L)
        self.avg_w = cell_average_weights_2d(self.mesh, prob.weight)

        def make_op(mesh):
            return SpatialOperator2D(mesh, self.params, tensor=tensor,
                                     weight=prob.weight, convection=self.conv, L=self.L)

        self.op = make_op(self.mesh)
        self._rhs_impl = self.op.rhs
        if prob.linear_rhs and prob.weight is None:
            lin = LinearRhs2D.from_general(make_op, self.mesh)
            # one-shot verification of the stencil against the assembled form
            probe_rng = np.random.default_rng(0)
            c = probe_rng.normal(size=(self.mesh.x.n, self.mesh.y.n, 3, 3))
            ref = self.op.rhs(c)
            scale = np.abs(ref).max()
            if np.abs(lin.rhs(c) - ref).max() > 1e-10 * max(1.0, scale):
                raise RuntimeError("linear fast path disagrees with the assembled RHS")
            self._rhs_impl = lin.rhs
        weight = None if cfg.unweighted_projection else prob.weight
        self.field0 = project_2d(prob.initial, self.mesh, weight=weight)
        self.hard_tol = cfg.avg_hard_tol if cfg.avg_hard_tol is not None else 1e-6

    def cfl(self) -> CFLReport:
        cfg, prob = self.cfg, self.prob
        tensor = prob.tensor
        details = {"L": self.L, "gx": self.params.gx, "gy": self.params.gy}
        if tensor is None:
            mu0 = math.inf
        elif tensor.constant:
            mu0 = cfl_2d_constant(tensor.a, tensor.b, tensor.c, self.params,
                                  self.dw, self.mesh.kappa, self.L)
        else:
            amin, amax, cmax = tensor_bounds(tensor, self.mesh,
                                             (self.bounds.lo, self.bounds.hi))
            mu_var = cfl_2d_variable(amin, amax, cmax, self.params,
                                     self.mesh.kappa, self.L)
            if prob.weight is not None:
                # no combined theory: use the more restrictive of the two bounds
                mu_const = cfl_2d_constant(amin, amax, cmax, self.params,
                                           self.dw, self.mesh.kappa, self.L)
                mu0 = min(mu_var, mu_const)
                details["heuristic"] = "variable tensor with variable weight"
            else:
                mu0 = mu_var
        inv_h2 = 1.0 / self.mesh.dx**2 + 1.0 / self.mesh.dy**2
        tau_candidates = [mu0 / inv_h2]
        lam0 = None
        if self.conv is not None:
            # per-axis convective bound with the split factor (heuristic in 2D)
            m1 = np.minimum(self.dw.omega_x(self.params.gx)[0],
                            self.dw.omega_x(-self.params.gx)[0])
            lamx = float(m1.min()) / (2 * self.conv[0].sigma) / 2 \
                if self.conv[0].sigma > 0 else math.inf
            m1y = np.minimum(self.dw.omega_y(self.params.gy)[0],
                             self.dw.omega_y(-self.params.gy)[0])
            lamy = float(m1y.min()) / (2 * self.conv[1].sigma) / 2 \
                if self.conv[1].sigma > 0 else math.inf
            lam0 = min(lamx, lamy)
            tau_candidates += [lamx * self.mesh.dx, lamy * self.mesh.dy]
        tau_auto = cfg.safety * min(tau_candidates)
        if cfg.dt == "auto":
            tau, binding = tau_auto, "diffusion" if tau_candidates[0] == min(tau_candidates) else "convection"
        else:
            tau, binding = float(cfg.dt), "user"
        return CFLReport(tau=tau, safety=cfg.safety, mu0=mu0, lambda0=lam0,
                         binding=binding, details=details)

    def limit(self, coeffs):
        out = apply_limiter_2d(DGField2D(self.mesh, coeffs), self.bounds,
                               self.avg_w, self.testset,
                               warn_tol=self.cfg.avg_warn_tol, hard_tol=self.hard_tol)
        return out.coeffs

    def rhs(self, t, coeffs):
        return self._rhs_impl(coeffs, t)

    def row(self, t, coeffs, mass0):
        fld = DGField2D(self.mesh, coeffs)
        if self.prob.exact is not None:
            ex = self.prob.exact
            e1 = error_norm_2d(fld, lambda x, y: ex(t, x, y), p=1)
            e2 = error_norm_2d(fld, lambda x, y: ex(t, x, y), p=2)
        else:
            e1 = e2 = float("nan")
        einf = mps_violation_2d(fld, self.bounds, self.testset)
        nx, ny = self.mesh.x.n, self.mesh.y.n
        vals = coeffs.reshape(nx, ny, 9) @ self.testset.eval_matrix.T
        mass = self.mass(coeffs)
        drift = (mass - mass0) / max(1.0, abs(mass0))
        return SnapshotRow(t, e1, e2, einf, float(vals.min()), float(vals.max()), drift)

    def mass(self, coeffs):
        nx, ny = self.mesh.x.n, self.mesh.y.n
        return float(self.mesh.cell_area
                     * (coeffs.reshape(nx, ny, 9) * self.avg_w).sum())

    def make_field(self, coeffs):
        return DGField2D(self.mesh, coeffs)


def run(config: RunConfig) -> RunReport:
    """Project, select parameters, and advance to t_final with SSP(3,3).

    Snapshot rows record the state the algorithm checks (post-limiting when
    the limiter is active); blow-up raises BlowUpError carrying the partial
    report.
    """
    prob = get_problem(config.problem)
    runner = _Runner1D(config, prob) if prob.dim == 1 else _Runner2D(config, prob)
    cfl = runner.cfl()
    if not (cfl.tau > 0 and math.isfinite(cfl.tau)):
        raise ConfigError(f"unusable time step {cfl.tau}; supply dt explicitly")
    nsteps, tau = _steps_for(cfl.tau, config.t_final)
    snap_every = config.snap_every or max(1, nsteps // 200)
    report = RunReport(problem=prob.name, config=config, cfl=cfl)

    c = runner.field0.coeffs
    limit = runner.limit if config.limiter else None
    mass0 = runner.mass(c)
    t = 0.0
    for n in range(nsteps):
        if limit is not None:
            c = limit(c)
        if n % snap_every == 0:
            report.rows.append(runner.row(t, c, mass0))
        step = min(tau, config.t_final - t)
        with np.errstate(over="ignore", invalid="ignore"):
            c = ssp33_step(c, runner.rhs, step, t=t, limit=limit)
        t = min((n + 1) * tau, config.t_final)
        if not np.isfinite(c).all():
            report.blown_up = True
            _write_outputs(report, runner, c, config, final=False)
            raise BlowUpError(f"solution lost finiteness at t = {t:.6g} "
                              f"(step {n + 1})", last_t=t - step, report=report)
    if limit is not None:
        c = limit(c)
    report.rows.append(runner.row(config.t_final, c, mass0))
    report.final = runner.make_field(c)
    _write_outputs(report, runner, c, config, final=True)
    return report


def _write_outputs(report, runner, coeffs, config, final):
    if config.out_dir is None:
        return
    os.makedirs(config.out_dir, exist_ok=True)
    write_report_csv(report, os.path.join(config.out_dir, "report.csv"))
    if final:
        t = config.t_final
        name = f"solution_t{t:.6g}.csv"
        write_solution_csv(runner.make_field(coeffs),
                           os.path.join(config.out_dir, name), config.samples)


@dataclass
class ConvergenceRow:
    n: int
    e1: float
    order1: float
    e2: float
    order2: float


@dataclass
class ConvergenceReport:
    rows: list

    def orders(self, which=2):
        return [r.order2 if which == 2 else r.order1 for r in self.rows[1:]]


def convergence_study(config: RunConfig, mesh_sizes) -> ConvergenceReport:
    """Refinement study over 2:1 nested meshes.

    With an exact solution the errors are true errors at t_final; otherwise
    consecutive errors between successive refinements are reported (attached
    to the coarser mesh).
    """
    mesh_sizes = list(mesh_sizes)
    if len(mesh_sizes) < 2:
        raise ConfigError("need at least two mesh sizes")
    for a, b in zip(mesh_sizes[:-1], mesh_sizes[1:]):
        if b != 2 * a:
            raise ConfigError("mesh sizes must refine 2:1")
    prob = get_problem(config.problem)
    results = []
    for n in mesh_sizes:
        sub = replace(config, nx=n, ny=None if config.ny is None else
                      config.ny * n // config.nx, out_dir=None)
        results.append(run(sub))
    rows = []
    if prob.exact is not None:
        errs = [(r.rows[-1].e1, r.rows[-1].e2) for r in results]
        for k, n in enumerate(mesh_sizes):
            e1, e2 = errs[k]
            if k == 0:
                rows.append(ConvergenceRow(n, e1, float("nan"), e2, float("nan")))
            else:
                rows.append(ConvergenceRow(
                    n, e1, math.log2(errs[k - 1][0] / e1),
                    e2, math.log2(errs[k - 1][1] / e2)))
    else:
        cons = []
        for coarse, fine in zip(results[:-1], results[1:]):
            if prob.dim == 1:
                cons.append((consecutive_error_1d(coarse.final, fine.final, p=1),
                             consecutive_error_1d(coarse.final, fine.final, p=2)))
            else:
                cons.append((consecutive_error_2d(coarse.final, fine.final, p=1),
                             consecutive_error_2d(coarse.final, fine.final, p=2)))
        for k, (e1, e2) in enumerate(cons):
            n = mesh_sizes[k]
            if k == 0:
                rows.append(ConvergenceRow(n, e1, float("nan"), e2, float("nan")))
            else:
                rows.append(ConvergenceRow(
                    n, e1, math.log2(cons[k - 1][0] / e1),
                    e2, math.log2(cons[k - 1][1] / e2)))
    report = ConvergenceReport(rows)
    if config.out_dir is not None:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "convergence.csv"), "w",
                  newline="\n") as fh:
            fh.write("N,e1,order1,e2,order2\n")
            for r in rows:
                fh.write(",".join([str(r.n)] + [_fmt(v) for v in
                                                (r.e1, r.order1, r.e2, r.order2)]) + "\n")
    return report
