"""Experiment configuration, the self-convergence study harness, physical
rescaling, and report/trajectory serialization."""

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DomainError
from .mesh import nested_l2_diff
from .network import SinCubedEnthalpy, gaslib11, single_pipe
from .physics import AdmissibleBounds, IsothermalLaw, PhysicalParams, ScalingParams
from .solver import SolverParams, TimeStepper


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

@dataclass
class ScenarioConfig:
    """Everything one simulation needs: topology, physics, resolution, solver."""

    topo: object
    boundary: dict
    law: object
    eps: float
    tau_max: float
    solver: SolverParams
    bounds: AdmissibleBounds = None
    label: str = "scenario"
    initial_rho: object = None   # callable(x) or {edge name: callable}; None = stationary init
    initial_m: object = None

    def __post_init__(self):
        if self.eps < 0:
            raise ConfigurationError(f"eps must be >= 0, got {self.eps}")
        if not math.isclose(self.solver.tau_max, self.tau_max, rel_tol=1e-9):
            raise ConfigurationError(
                f"dt * n_steps = {self.solver.tau_max} does not match "
                f"tau_max = {self.tau_max}"
            )

    def refined(self, factor):
        """Same scenario with factor-times finer mesh and time step."""
        return replace(
            self,
            topo=self.topo.refined(factor),
            solver=replace(self.solver, dt=self.solver.dt / factor,
                           n_steps=self.solver.n_steps * factor),
        )

    def with_eps(self, eps):
        return replace(self, eps=eps)


def _experiment_bounds(eps):
    # generous box around the benchmark trajectories (classification only;
    # the network runs at eps=0 reach |w| ~ 0.70)
    return AdmissibleBounds(0.6, 1.6, 0.55, eps_bar=max(1.0, eps))


def table1_scenario(eps, cells=16, dt=1.0 / 32.0, tau_max=1.0, **solver_kw):
    """Single unit pipe, isothermal c=1, sin^3 boundary enthalpies."""
    nsteps = round(tau_max / dt)
    return ScenarioConfig(
        topo=single_pipe(cells=cells),
        boundary={"v0": SinCubedEnthalpy(0.2),
                  "v1": SinCubedEnthalpy(0.1, phase=math.pi)},
        law=IsothermalLaw(1.0),
        eps=eps,
        tau_max=tau_max,
        solver=SolverParams(dt=dt, n_steps=nsteps, **solver_kw),
        bounds=_experiment_bounds(eps),
        label="single-pipe",
    )


def gaslib11_scenario(eps, cells=16, dt=1.0 / 32.0, tau_max=1.0, **solver_kw):
    """Contracted 8-pipe benchmark network with its boundary signals."""
    topo, boundary = gaslib11(cells=cells)
    nsteps = round(tau_max / dt)
    return ScenarioConfig(
        topo=topo,
        boundary=boundary,
        law=IsothermalLaw(1.0),
        eps=eps,
        tau_max=tau_max,
        solver=SolverParams(dt=dt, n_steps=nsteps, **solver_kw),
        bounds=_experiment_bounds(eps),
        label="gaslib11",
    )


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceEntry:
    eps: float
    refinement: int
    err_rho: float
    err_m: float
    rate_rho: float = None   # None in refinement 0
    rate_m: float = None
    runtime_seconds: float = 0.0
    worst_slack: float = 0.0             # min over steps of the raw slack
    worst_slack_normalized: float = 0.0  # min over steps of slack / (1 + |H|)
    worst_mass_residual: float = 0.0
    worst_kirchhoff: float = 0.0
    admissible: bool = True


@dataclass
class ConvergenceReport:
    label: str
    entries: list = field(default_factory=list)

    def block(self, eps):
        return [e for e in self.entries if e.eps == eps]


def _nested_nodal_diff(coarse, fine):
    """Nodal-coefficient distance of nested P1 fields: the Euclidean norm of
    the nodal differences on the fine mesh, weighted by sqrt(2 h_f / 3).

    This measures the coefficient vector rather than the function (for smooth
    differences it approaches the L2 norm times sqrt(2/3)); it is the flux
    error measure the reference convergence tables are built on.
    """
    cv = coarse.values
    on_fine = np.empty(fine.grid.num_cells + 1)
    on_fine[0::2] = cv
    on_fine[1::2] = 0.5 * (cv[:-1] + cv[1:])
    d = on_fine - fine.values
    return math.sqrt(2.0 * fine.grid.h / 3.0 * float(np.dot(d, d)))


def _state_err(coarse_state, fine_state, flux_norm="nodal"):
    """Network distance of same-time states on nested meshes: exact L2 for
    the densities, `flux_norm` ('nodal' or 'l2') for the mass fluxes."""
    dr2 = 0.0
    dm2 = 0.0
    for i in range(len(coarse_state.topo.edges)):
        dr2 += nested_l2_diff(coarse_state.rho_field(i), fine_state.rho_field(i)) ** 2
        if flux_norm == "l2":
            dm2 += nested_l2_diff(coarse_state.m_field(i), fine_state.m_field(i)) ** 2
        elif flux_norm == "nodal":
            dm2 += _nested_nodal_diff(coarse_state.m_field(i), fine_state.m_field(i)) ** 2
        else:
            raise ConfigurationError(f"unknown flux_norm {flux_norm!r}; use nodal or l2")
    return math.sqrt(dr2), math.sqrt(dm2)


def _run_pair(coarse_cfg, fine_cfg, flux_norm="nodal"):
    """Lockstep coarse/fine runs; errors maximized over the coarse time grid,
    excluding tau = 0 where both initializations coincide."""
    tc = TimeStepper(coarse_cfg)
    tf = TimeStepper(fine_cfg)
    err_rho = 0.0
    err_m = 0.0
    for _ in range(coarse_cfg.solver.n_steps):
        tc.advance()
        tf.advance()
        tf.advance()
        dr, dm = _state_err(tc.state, tf.state, flux_norm=flux_norm)
        err_rho = max(err_rho, dr)
        err_m = max(err_m, dm)
    reports = tc.reports + tf.reports
    return (
        err_rho,
        err_m,
        min(r.slack for r in reports),
        min(r.slack / (1.0 + abs(r.energy)) for r in reports),
        max(r.mass_residual for r in reports),
        max(r.kirchhoff_residual for r in reports),
        all(r.admissible for r in reports),
    )


def run_convergence_study(base, refinements, eps_list, flux_norm="nodal"):
    """Self-convergence errors and rates over `refinements` levels.

    For level r the run at mesh factor 2^r is compared against the run at
    factor 2^(r+1) (half the mesh width and half the time step): the error is
    the maximum over the coarse run's time steps (excluding tau = 0) of the
    per-quantity distance, density always in the exact L2 norm, flux in the
    `flux_norm` measure ('nodal' coefficient norm by default, 'l2' for the
    exact function-space norm); rates are consecutive log2 ratios.
    """
    if refinements < 1:
        raise ConfigurationError("refinements must be >= 1")
    report = ConvergenceReport(label=base.label)
    for eps in eps_list:
        prev = None
        for r in range(refinements):
            t0 = time.perf_counter()
            coarse = base.with_eps(eps).refined(2 ** r)
            fine = base.with_eps(eps).refined(2 ** (r + 1))
            try:
                err_rho, err_m, slack, slack_norm, mass, kirch, adm = _run_pair(
                    coarse, fine, flux_norm=flux_norm
                )
            except Exception as exc:
                raise type(exc)(f"(eps={eps}, refinement={r}) {exc}") from exc
            entry = ConvergenceEntry(
                eps=eps, refinement=r, err_rho=err_rho, err_m=err_m,
                rate_rho=None if prev is None else math.log2(prev[0] / err_rho),
                rate_m=None if prev is None else math.log2(prev[1] / err_m),
                runtime_seconds=time.perf_counter() - t0,
                worst_slack=slack, worst_slack_normalized=slack_norm,
                worst_mass_residual=mass,
                worst_kirchhoff=kirch, admissible=adm,
            )
            report.entries.append(entry)
            prev = (err_rho, err_m)
    return report


# ---------------------------------------------------------------------------
# Physical rescaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RescaledSetup:
    """Dimensionless parameters plus the conversion factors of the two-stage
    rescaling: first x -> x/eps^2, t -> t/eps^2 (long pipes and times), then
    tau = eps * t, w = v / eps, lambda = 2 d gamma / eps^2."""

    scaling: ScalingParams
    diameter: float
    time_factor: float            # tau per unit once-rescaled t
    velocity_factor: float        # w per unit physical v
    length_factor: float          # rescaled x per unit physical x
    composite_time_factor: float  # tau per unit physical t

    def friction_lambda(self):
        """Invert gamma back to the physical friction factor."""
        eps = self.scaling.epsilon
        return 2.0 * self.diameter * self.scaling.gamma / eps ** 2


def rescale_physical(params: PhysicalParams, eps):
    """Map physical pipe data to the dimensionless parameters at scale `eps`.

    Undefined at eps = 0: the parabolic limit is a model limit, not a
    rescaling.
    """
    if eps <= 0:
        raise DomainError(f"rescaling requires eps > 0, got {eps}")
    gamma = params.friction_lambda * eps ** 2 / (2.0 * params.diameter)
    scaling = ScalingParams(
        epsilon=eps,
        gamma=gamma,
        area=math.pi * params.diameter ** 2 / 4.0,
        ell=eps ** 2 * params.length,
    )
    return RescaledSetup(
        scaling=scaling,
        diameter=params.diameter,
        time_factor=eps,
        velocity_factor=1.0 / eps,
        length_factor=eps ** 2,
        composite_time_factor=eps ** 3,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_REPORT_COLUMNS = (
    "eps", "refinement", "err_rho", "rate_rho", "err_m", "rate_m",
    "runtime_seconds", "worst_slack", "worst_slack_normalized",
    "worst_mass_residual", "worst_kirchhoff", "admissible",
)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report, fmt="csv"):
    """Serialize a ConvergenceReport; csv round-trips bit-exactly via
    parse_report_csv, markdown mirrors the err/rate row layout of the
    benchmark tables."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_REPORT_COLUMNS)
        for e in report.entries:
            writer.writerow([_fmt(getattr(e, c)) for c in _REPORT_COLUMNS])
        return buf.getvalue()
    if fmt == "markdown":
        lines = [f"# Convergence study: {report.label}", ""]
        eps_order = []
        for e in report.entries:
            if e.eps not in eps_order:
                eps_order.append(e.eps)
        for eps in eps_order:
            block = report.block(eps)
            header = ["eps = " + repr(eps), "quantity"] + [
                f"r={e.refinement}" for e in block
            ]
            lines.append("| " + " | ".join(header) + " |")
            lines.append("|" + "---|" * len(header))
            rows = (
                ("err_rho", [f"{e.err_rho:.2e}" for e in block]),
                ("rate", ["---" if e.rate_rho is None else f"{e.rate_rho:.2f}" for e in block]),
                ("err_m", [f"{e.err_m:.2e}" for e in block]),
                ("rate", ["---" if e.rate_m is None else f"{e.rate_m:.2f}" for e in block]),
            )
            for name, cells in rows:
                lines.append("| | " + name + " | " + " | ".join(cells) + " |")
            lines.append("")
        return "\n".join(lines)
    raise ConfigurationError(f"unknown report format {fmt!r}; use csv or markdown")


def parse_report_csv(text):
    """Inverse of emit_report(..., 'csv'); floats are restored bit-exactly."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != _REPORT_COLUMNS:
        raise ConfigurationError("not a convergence report csv")
    report = ConvergenceReport(label="parsed")
    for row in rows[1:]:
        vals = dict(zip(_REPORT_COLUMNS, row))
        report.entries.append(ConvergenceEntry(
            eps=float(vals["eps"]),
            refinement=int(vals["refinement"]),
            err_rho=float(vals["err_rho"]),
            err_m=float(vals["err_m"]),
            rate_rho=None if vals["rate_rho"] == "" else float(vals["rate_rho"]),
            rate_m=None if vals["rate_m"] == "" else float(vals["rate_m"]),
            runtime_seconds=float(vals["runtime_seconds"]),
            worst_slack=float(vals["worst_slack"]),
            worst_slack_normalized=float(vals["worst_slack_normalized"]),
            worst_mass_residual=float(vals["worst_mass_residual"]),
            worst_kirchhoff=float(vals["worst_kirchhoff"]),
            admissible=vals["admissible"] == "True",
        ))
    return report


def trajectory_csv(states, topo):
    """One record per stored step: tau, per-edge cell densities, per-edge
    nodal fluxes, junction enthalpies.  Full double precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["tau"]
    for i, e in enumerate(topo.edges):
        header += [f"rho_{e.name}_{j}" for j in range(e.cells)]
        header += [f"m_{e.name}_{j}" for j in range(e.cells + 1)]
    header += [f"hv_{v}" for v in topo.interior_vertices]
    writer.writerow(header)
    for tau, state in states:
        row = [repr(float(tau))]
        for i in range(len(topo.edges)):
            row += [repr(float(v)) for v in state.rho(i)]
            row += [repr(float(v)) for v in state.m(i)]
        row += [repr(state.hv(v)) for v in topo.interior_vertices]
        writer.writerow(row)
    return buf.getvalue()


_STEP_COLUMNS = (
    "step", "tau", "dt", "newton_iterations", "residual_norm", "energy",
    "dissipation", "boundary_power", "slack", "mass_residual",
    "kirchhoff_residual", "admissible", "bisection_level",
)


def step_reports_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_STEP_COLUMNS)
    for r in reports:
        writer.writerow([_fmt(getattr(r, c)) for c in _STEP_COLUMNS])
    return buf.getvalue()
