"""Model, solver and simulator for a leg driven by an antagonistic torsion-spring variable-stiffness actuator."""

from .actuator import (
    BeltState,
    DeflectionLimits,
    PretensionInterval,
    VsaConfig,
    belt_state,
    deflection_limits,
    feasible_pretensions,
    joint_torque,
    linear_sea_torque,
    operating_range,
    potential_energy,
    spring_forces,
    tangent_stiffness,
)
from .errors import (
    AmbiguousRootError,
    BottomOutError,
    ConfigError,
    DomainError,
    EmptyRangeError,
    InfeasibleError,
    InstabilityError,
    LimitError,
    NoRootError,
    SimulationError,
    VsaError,
)
from .landing import (
    DropScenario,
    DropSolution,
    captured_energy,
    drop_energy,
    equilibrium_deflection,
    sensitivity,
    solve_pretension,
)
from .leg_kinematics import (
    LegParams,
    LegPose,
    cardan_foot_track,
    gravity_load_torque,
    gravity_torques,
    height_of,
    knee_angle,
    theta_of,
)
from .hop_sim import (
    ContactModel,
    MotorTrajectory,
    SimParams,
    SimState,
    SimTrace,
    TrajectoryKind,
    simulate,
    simulate_drop,
    step,
)
from .spring import (
    LinearSpringParams,
    SpanConvention,
    TorsionSpringParams,
    axial_force,
    max_half_span,
    sigma,
    stored_energy,
)

__version__ = "0.1.0"
