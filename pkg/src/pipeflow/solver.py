"""Newton solver, stationary initialization, and the implicit Euler time loop.

Every accepted step is monitored: total energy, friction dissipation,
boundary energy flux, the discrete energy-inequality slack, local mass
balance, junction flux balance, and admissibility of the new state.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .errors import (
    ConfigurationError,
    DomainError,
    InitializationError,
    SimulationError,
    StepFailure,
)
from .assembly import NetworkSystem
from .mesh import interpolate_p1, l2_project_p0
from .physics import check_admissible, dissipation, energy
from .state import DiscreteState


@dataclass(frozen=True)
class SolverParams:
    """Time step, step count, and Newton controls.

    `slope_floor` lower-bounds the friction slope in the Jacobian when the
    exact linearization is singular (all velocities exactly zero with
    eps = 0); it never changes the equations being solved.
    """

    dt: float
    n_steps: int
    newton_tol: float = 1e-11
    newton_maxit: int = 50
    line_search: bool = True
    quad_order: int = 3
    max_bisections: int = 3
    slope_floor: float = 1.0

    def __post_init__(self):
        if self.dt <= 0 or self.n_steps < 1:
            raise ConfigurationError("need dt > 0 and n_steps >= 1")
        if self.newton_tol < 0:
            raise ConfigurationError("newton_tol must be >= 0")

    @property
    def tau_max(self):
        return self.dt * self.n_steps


@dataclass(frozen=True)
class StepReport:
    """Diagnostics of one accepted implicit Euler (sub)step.

    `slack` is the margin of the discrete energy inequality,
    -(boundary_power) - (H_new - H_old)/dt - D_new, nonnegative up to solver
    tolerance; `boundary_power` is the signed enthalpy-weighted flux sum
    over boundary vertices, sum_v h_v * m_e(v) * n_e(v).
    """

    step: int
    tau: float
    dt: float
    newton_iterations: int
    residual_norm: float
    energy: float
    dissipation: float
    boundary_power: float
    slack: float
    mass_residual: float
    kirchhoff_residual: float
    admissible: bool
    bisection_level: int = 0


def _supnorm(r):
    return float(np.max(np.abs(r))) if r.size else 0.0


def _positive_density(x, dofmap):
    return all(np.all(x[sl] > 0.0) for sl in dofmap.rho_slices)


def newton_solve(system, x_old, dt, tau, params, bvals=None, stationary=False):
    """Solve one implicit step starting from x_old; returns (x, iters, resnorm).

    Backtracking line search (halving down to 1e-4 of the full step) rejects
    iterates with non-positive density or a residual 2-norm increase.  If the
    exact Jacobian is singular or its direction yields no progress, the
    iteration is retried once with the friction-slope floor.  Raises
    StepFailure when the tolerance is not reached within `newton_maxit`.
    """
    if bvals is None:
        bvals = system.boundary_values(tau)
    x = np.array(x_old, dtype=float)
    r = system.residual(x, x_old, dt, bvals, stationary=stationary)
    r2 = float(np.linalg.norm(r))
    it = 0
    while _supnorm(r) > params.newton_tol:
        if it >= params.newton_maxit:
            raise StepFailure(
                f"Newton did not reach tol {params.newton_tol} within "
                f"{params.newton_maxit} iterations (residual {_supnorm(r):.3e})",
                _supnorm(r), it,
            )
        accepted = False
        for floor in (0.0, params.slope_floor):
            try:
                lu = splu(system.jacobian(x, dt, stationary=stationary,
                                          slope_floor=floor))
            except RuntimeError:
                continue  # exactly singular factorization; retry with floor
            dx = lu.solve(-r)
            if not params.line_search:
                xt = x + dx
                if not _positive_density(xt, system.dofmap):
                    break
                rt = system.residual(xt, x_old, dt, bvals, stationary=stationary)
                x, r, r2 = xt, rt, float(np.linalg.norm(rt))
                accepted = True
                break
            s = 1.0
            while s >= 1e-4:
                xt = x + s * dx
                if _positive_density(xt, system.dofmap):
                    try:
                        rt = system.residual(xt, x_old, dt, bvals,
                                             stationary=stationary)
                    except DomainError:
                        rt = None
                    if rt is not None:
                        rt2 = float(np.linalg.norm(rt))
                        if rt2 < r2:
                            x, r, r2 = xt, rt, rt2
                            accepted = True
                            break
                s *= 0.5
            if accepted:
                break
        if not accepted:
            raise StepFailure(
                f"Newton line search failed at residual {_supnorm(r):.3e}",
                _supnorm(r), it,
            )
        it += 1
    return x, it, _supnorm(r)


def steady_state(system, params, tau=0.0):
    """Stationary solution for the boundary values at time `tau`.

    Initial guess: uniform density with P'(rho) equal to the mean boundary
    enthalpy, zero flux, junction enthalpies at the mean.  If the direct
    solve fails, the boundary data is continued from the all-equal-mean case
    to the target in 4 steps.
    """
    bvals = system.boundary_values(tau)
    hbar = sum(bvals.values()) / len(bvals)
    rho_star = system.law.potential_prime_inverse(hbar)
    x0 = DiscreteState.uniform(system.dofmap, rho_star, 0.0, hv=hbar, tau=tau).vector
    x0 = np.array(x0)
    try:
        x, _, _ = newton_solve(system, x0, 1.0, tau, params, bvals=bvals,
                               stationary=True)
        return DiscreteState(system.dofmap, x, tau=tau)
    except StepFailure:
        pass
    x = x0
    for k in range(1, 5):
        bk = {v: hbar + (k / 4.0) * (bvals[v] - hbar) for v in bvals}
        try:
            x, _, _ = newton_solve(system, x, 1.0, tau, params, bvals=bk,
                                   stationary=True)
        except StepFailure as exc:
            raise InitializationError(
                f"stationary continuation failed at stage {k}/4"
            ) from exc
    return DiscreteState(system.dofmap, x, tau=tau)


class TimeStepper:
    """Drives one simulation; exposes the current state after each advance."""

    def __init__(self, scenario):
        self.scenario = scenario
        self.params = scenario.solver
        self.system = NetworkSystem(
            scenario.topo, scenario.law, scenario.eps, scenario.boundary,
            quad_order=scenario.solver.quad_order,
        )
        self._init_state()
        self.step_index = 0
        self.reports = []

    def _init_state(self):
        sc = self.scenario
        if sc.initial_rho is None and sc.initial_m is None:
            state0 = steady_state(self.system, self.params, tau=0.0)
        else:
            state0 = self._project_initial()
        self.x = np.array(state0.vector)
        self.tau = 0.0
        self._energy = energy(state0, sc.law, sc.eps)

    def _project_initial(self):
        sc = self.scenario
        topo = sc.topo
        dofmap = self.system.dofmap
        rho_parts, m_parts = [], []
        for i, e in enumerate(topo.edges):
            grid = topo.grid(i)
            f_rho = sc.initial_rho[e.name] if isinstance(sc.initial_rho, dict) else sc.initial_rho
            f_m = sc.initial_m[e.name] if isinstance(sc.initial_m, dict) else sc.initial_m
            rho_parts.append(l2_project_p0(f_rho, grid).values if f_rho else np.ones(grid.num_cells))
            m_parts.append(interpolate_p1(f_m, grid).values if f_m else np.zeros(grid.num_cells + 1))
        bvals = self.system.boundary_values(0.0)
        hbar = sum(bvals.values()) / len(bvals)
        hv = {v: hbar for v in topo.interior_vertices}
        return DiscreteState.from_fields(dofmap, rho_parts, m_parts, hv=hv, tau=0.0)

    @property
    def state(self):
        return DiscreteState(self.system.dofmap, self.x, tau=self.tau)

    def advance(self):
        """Advance by one full time step (bisecting on Newton failure, up to
        `max_bisections` levels); returns the list of accepted sub-step reports."""
        out = []
        target = (self.step_index + 1) * self.params.dt
        self._substep(self.params.dt, 0, out)
        self.tau = target
        self.step_index += 1
        self.reports.extend(out)
        return out

    def _substep(self, dt, level, out):
        tau_new = self.tau + dt
        bvals = self.system.boundary_values(tau_new)
        try:
            x_new, iters, resnorm = newton_solve(
                self.system, self.x, dt, tau_new, self.params, bvals=bvals
            )
        except StepFailure as exc:
            if level >= self.params.max_bisections:
                raise SimulationError(
                    f"step {self.step_index + 1} failed after "
                    f"{self.params.max_bisections} time-step bisections: {exc}",
                    step=self.step_index + 1,
                ) from exc
            self._substep(dt / 2, level + 1, out)
            self._substep(dt / 2, level + 1, out)
            return
        out.append(self._report(x_new, dt, tau_new, bvals, iters, resnorm, level))
        self.x = x_new
        self.tau = tau_new

    def _report(self, x_new, dt, tau_new, bvals, iters, resnorm, level):
        sc = self.scenario
        dofmap = self.system.dofmap
        state = DiscreteState(dofmap, x_new, tau=tau_new)
        e_new = energy(state, sc.law, sc.eps)
        d_new = dissipation(state)
        bp = 0.0
        for m_dof, sign, vertex, interior in self.system._endpoints:
            if not interior:
                bp += bvals[vertex] * x_new[m_dof] * sign
        slack = -bp - (e_new - self._energy) / dt - d_new
        mass = 0.0
        kirch = 0.0
        topo = sc.topo
        for i, e in enumerate(topo.edges):
            h = topo.grid(i).h
            rs, ms = dofmap.rho_slices[i], dofmap.m_slices[i]
            m_new = x_new[ms]
            cell = e.area * h * (x_new[rs] - self.x[rs]) + dt * (m_new[1:] - m_new[:-1])
            mass = max(mass, _supnorm(cell))
        for v in topo.interior_vertices:
            s = 0.0
            for ei, n in topo.incident_edges(v):
                ms = dofmap.m_slices[ei]
                s += n * x_new[ms.start if n < 0 else ms.stop - 1]
            kirch = max(kirch, abs(s))
        admissible = bool(check_admissible(state, sc.bounds)) if sc.bounds else True
        self._energy = e_new
        return StepReport(
            step=self.step_index + 1, tau=tau_new, dt=dt,
            newton_iterations=iters, residual_norm=resnorm,
            energy=e_new, dissipation=d_new, boundary_power=bp, slack=slack,
            mass_residual=mass, kirchhoff_residual=kirch,
            admissible=admissible, bisection_level=level,
        )


@dataclass
class SimulationResult:
    reports: list
    states: list          # (tau, DiscreteState) pairs stored at the stride
    final_state: DiscreteState

    @property
    def worst_slack(self):
        return min((r.slack for r in self.reports), default=0.0)

    @property
    def all_admissible(self):
        return all(r.admissible for r in self.reports)

    @property
    def bisected(self):
        return any(r.bisection_level > 0 for r in self.reports)


def simulate(scenario, store_stride=0):
    """Run the scenario's full time horizon; optionally store every
    `store_stride`-th state (the initial state is always stored when
    storing is enabled)."""
    stepper = TimeStepper(scenario)
    stored = []
    if store_stride:
        stored.append((0.0, stepper.state))
    for n in range(scenario.solver.n_steps):
        stepper.advance()
        if store_stride and ((n + 1) % store_stride == 0 or n + 1 == scenario.solver.n_steps):
            stored.append((stepper.tau, stepper.state))
    return SimulationResult(stepper.reports, stored, stepper.state)
