"""Barotropic gas flow in pipes and pipe networks.

Mixed finite elements in space (piecewise constant density, continuous
piecewise linear mass flux), implicit Euler in time, with junction coupling
through vertex enthalpies.  The discretization inherits the energy
dissipation structure of the model and remains well defined and first-order
convergent uniformly in the scaling parameter eps, including the parabolic
limit eps = 0.
"""

from .errors import (
    ConfigurationError,
    DomainError,
    GridMismatchError,
    InitializationError,
    PipeflowError,
    SimulationError,
    StepFailure,
    TopologyError,
)
from .mesh import (
    P0Field,
    P1Field,
    PipeGrid,
    derivative_p1,
    gauss_rule,
    interpolate_p1,
    l2_project_p0,
    lp_norm,
    nested_l2_diff,
)
from .network import (
    ConstantEnthalpy,
    DofMap,
    NetworkTopology,
    PipeEdge,
    SinCubedEnthalpy,
    contract_bypass_edges,
    gaslib11,
    gaslib11_raw,
    kirchhoff_residual,
    single_pipe,
    validate,
)
from .physics import (
    AdmissibleBounds,
    BarotropicLaw,
    IsothermalLaw,
    PhysicalParams,
    ScalingParams,
    check_admissible,
    convexity_constant,
    dissipation,
    energy,
    enthalpy,
    eps_inf_norm,
    eps_norm,
    max_admissible_eps_bar,
    relative_dissipation,
    relative_energy,
    velocity,
)
from .state import DiscreteState
from .assembly import NetworkSystem, assemble_jacobian, assemble_residual
from .solver import (
    SimulationResult,
    SolverParams,
    StepReport,
    TimeStepper,
    newton_solve,
    simulate,
    steady_state,
)
from .experiments import (
    ConvergenceEntry,
    ConvergenceReport,
    ScenarioConfig,
    emit_report,
    gaslib11_scenario,
    parse_report_csv,
    rescale_physical,
    run_convergence_study,
    step_reports_csv,
    table1_scenario,
    trajectory_csv,
)
from .configfile import load_scenario, parse_scenario, scenario_text

__version__ = "0.1.0"
