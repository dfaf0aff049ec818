"""Time-domain simulation of the single-DOF leg driven through the actuator.

The thigh angle ``theta`` is the only degree of freedom while the foot is on
the ground.  With hip height ``h(theta) = ground_offset + 2*L*sin(theta)`` and
the whole mass at the hip, Lagrange's equation reads::

    m*h'**2 * theta'' + m*h'*h'' * theta'**2
        = tau_spring(theta_m - theta) - m*g*h' - c*theta'

where ``theta_m`` is the effective motor angle (commanded angle plus any
accumulated belt slip).  The velocity-squared term makes the model exactly
energy conserving when ``c = 0`` and the motor is stationary.

While airborne the hip is ballistic and the massless leg simply follows the
motor.  Integration is fixed-step classical Runge-Kutta; touchdown is located
inside the step by root finding so the time grid stays uniform.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq

from . import actuator as act
from .actuator import BeltState, VsaConfig
from .errors import BottomOutError, DomainError, InstabilityError, LimitError, SimulationError
from .landing import DropScenario, equilibrium_deflection
from .leg_kinematics import HALF_PI, LegParams

CSV_COLUMNS = (
    "t",
    "motor_angle",
    "joint_angle",
    "joint_velocity",
    "height",
    "spring_torque",
    "gravity_torque",
    "belt_state",
    "span_top",
    "span_bottom",
)


class ContactModel(enum.Enum):
    #: Foot stays pinned once it touches; the leg never takes off again.
    PINNED_FOOT = "pinned_foot"
    #: Foot leaves the ground whenever the ground reaction would pull.
    FREE_FLIGHT_GROUND = "free_flight_ground"


class TrajectoryKind(enum.Enum):
    CONSTANT = "constant"
    SINE = "sine"
    SQUARE_SMOOTHED = "square_smoothed"


#: Sharpness of the smoothed square wave, ``tanh(beta*sin)/tanh(beta)``.
SQUARE_SHARPNESS = 5.0


@dataclass(frozen=True)
class MotorTrajectory:
    """Commanded motor angle ``offset + amplitude * w(2*pi*t/period)`` in rad."""

    kind: TrajectoryKind = TrajectoryKind.CONSTANT
    amplitude: float = 0.0
    period: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError(f"period must be positive, got {self.period!r}")
        if not self.amplitude >= 0:
            raise DomainError(f"amplitude must be non-negative, got {self.amplitude!r}")

    @classmethod
    def constant(cls, angle):
        return cls(TrajectoryKind.CONSTANT, 0.0, 1.0, angle)

    def angle(self, t: float) -> float:
        if self.kind is TrajectoryKind.CONSTANT or self.amplitude == 0.0:
            return self.offset
        s = math.sin(2.0 * math.pi * t / self.period)
        if self.kind is TrajectoryKind.SINE:
            return self.offset + self.amplitude * s
        b = SQUARE_SHARPNESS
        return self.offset + self.amplitude * math.tanh(b * s) / math.tanh(b)

    def rate(self, t: float) -> float:
        if self.kind is TrajectoryKind.CONSTANT or self.amplitude == 0.0:
            return 0.0
        w = 2.0 * math.pi / self.period
        c = w * math.cos(w * t)
        if self.kind is TrajectoryKind.SINE:
            return self.amplitude * c
        b = SQUARE_SHARPNESS
        s = math.sin(w * t)
        return self.amplitude * b * c / (math.cosh(b * s) ** 2 * math.tanh(b))


@dataclass(frozen=True)
class SimParams:
    """Integrator and contact settings.

    Attributes:
        dt: step, s.
        duration: simulated time, s.
        viscous_damping: joint damping ``c``, N*m*s/rad.
        contact_model: see :class:`ContactModel`.
        restitution: foot restitution flag.  With a massless leg and a
            purely vertical hip path the foot pin already transfers the hip
            velocity without loss, so elastic and inelastic touchdown coincide
            and the flag has no effect; it is kept for config compatibility.
        slip_angle: motor-angle jump per belt skip, rad.
        max_velocity: ``|theta'|`` above this raises InstabilityError, rad/s.
        theta_floor: thigh angles below this (or above ``pi/2`` minus it)
            are a kinematic bottom-out, rad.
    """

    dt: float = 1e-4
    duration: float = 1.0
    viscous_damping: float = 0.0
    contact_model: ContactModel = ContactModel.PINNED_FOOT
    restitution: bool = False
    slip_angle: float = 0.1
    max_velocity: float = 1e3
    theta_floor: float = math.radians(1.0)

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not self.duration >= self.dt:
            raise DomainError("duration must be at least dt")
        if not self.viscous_damping >= 0:
            raise DomainError("viscous_damping must be non-negative")
        if not self.slip_angle >= 0:
            raise DomainError("slip_angle must be non-negative")
        if not self.max_velocity > 0:
            raise DomainError("max_velocity must be positive")
        if not 0 < self.theta_floor < 0.25 * math.pi:
            raise DomainError("theta_floor must lie in (0, pi/4)")

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class SimState:
    """Simulator state.

    In stance ``theta``/``omega`` are the thigh angle and rate and the hip
    follows the leg; in flight ``y``/``vy`` are the hip height and velocity
    and the leg tracks the motor.
    """

    t: float
    theta: float
    omega: float
    slip: float = 0.0
    airborne: bool = False
    y: float = 0.0
    vy: float = 0.0


@dataclass
class SimTrace:
    """Sampled trajectory; one row per integration step plus the initial row."""

    t: np.ndarray
    motor_angle: np.ndarray
    joint_angle: np.ndarray
    joint_velocity: np.ndarray
    height: np.ndarray
    spring_torque: np.ndarray
    gravity_torque: np.ndarray
    belt_state: List[str]
    span_top: np.ndarray
    span_bottom: np.ndarray
    events: List[dict] = field(default_factory=list)
    final_state: Optional[SimState] = None

    def __len__(self):
        return len(self.t)

    def to_csv(self, path_or_buf=None) -> Optional[str]:
        """Write the trace as CSV with the fixed column set; returns the text if no target is given."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        cols = [
            self.t,
            self.motor_angle,
            self.joint_angle,
            self.joint_velocity,
            self.height,
            self.spring_torque,
            self.gravity_torque,
        ]
        for i in range(len(self.t)):
            row = [repr(float(c[i])) for c in cols]
            row += [self.belt_state[i], repr(float(self.span_top[i])), repr(float(self.span_bottom[i]))]
            w.writerow(row)
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return None


class _Model:
    """Pre-bound scalar dynamics for one (cfg, leg, params) triple."""

    def __init__(self, cfg, leg, params):
        self.cfg = cfg
        self.leg = leg
        self.params = params
        self.force = cfg.spring.axial_force
        self.energy = cfg.spring.energy_at
        self.s = cfg._scale
        self.r_p = cfg.r_p
        self.x_i = cfg.x_i
        self.two_l = 2.0 * leg.L
        self.m = leg.m
        self.g = leg.g
        self.c = params.viscous_damping
        self.lim = cfg.limits

    def spring_torque(self, delta):
        d = self.r_p * delta
        return self.r_p * (self.force(self.s * (self.x_i + d)) - self.force(self.s * (self.x_i - d)))

    def spring_energy(self, delta):
        d = self.r_p * delta
        s = self.s
        e = self.energy
        return (e(s * (self.x_i + d)) + e(s * (self.x_i - d)) - 2.0 * e(s * self.x_i)) / (2.0 * s)

    def height(self, theta):
        return self.leg.ground_offset + self.two_l * math.sin(theta)

    def accel(self, theta, omega, motor):
        hp = self.two_l * math.cos(theta)
        hpp = -self.two_l * math.sin(theta)
        tau = self.spring_torque(motor - theta)
        return (tau - self.m * self.g * hp - self.c * omega - self.m * hp * hpp * omega * omega) / (
            self.m * hp * hp
        )

    def grf(self, theta, omega, motor):
        """Vertical ground reaction, ``m*(g + h'')`` along the stance motion, N."""
        a = self.accel(theta, omega, motor)
        hdd = self.two_l * (math.cos(theta) * a - math.sin(theta) * omega * omega)
        return self.m * (self.g + hdd)


def _rk4(model, theta, omega, t, dt, motor_at):
    m0 = motor_at(t)
    mh = motor_at(t + 0.5 * dt)
    m1 = motor_at(t + dt)
    a = model.accel
    k1v, k1a = omega, a(theta, omega, m0)
    k2v = omega + 0.5 * dt * k1a
    k2a = a(theta + 0.5 * dt * k1v, k2v, mh)
    k3v = omega + 0.5 * dt * k2a
    k3a = a(theta + 0.5 * dt * k2v, k3v, mh)
    k4v = omega + dt * k3a
    k4a = a(theta + dt * k3v, k4v, m1)
    theta_n = theta + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    omega_n = omega + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
    return theta_n, omega_n


def total_energy(cfg: VsaConfig, leg: LegParams, state: SimState, motor_angle: float) -> float:
    """Kinetic + spring + gravitational energy of ``state`` (J); ``motor_angle`` excludes slip."""
    model = _Model(cfg, leg, SimParams())
    if state.airborne:
        return 0.5 * leg.m * state.vy ** 2 + leg.m * leg.g * state.y
    hp = model.two_l * math.cos(state.theta)
    return (
        0.5 * leg.m * (hp * state.omega) ** 2
        + model.spring_energy(motor_angle + state.slip - state.theta)
        + leg.m * leg.g * model.height(state.theta)
    )


class _Recorder:
    def __init__(self, model):
        self.model = model
        self.rows = {k: [] for k in CSV_COLUMNS}

    def add(self, state, motor, motor_rate):
        model = self.model
        r = self.rows
        if state.airborne:
            theta, omega, height = motor, motor_rate, state.y
            delta = 0.0
            grav = 0.0
        else:
            theta, omega, height = state.theta, state.omega, model.height(state.theta)
            delta = motor - theta
            grav = model.m * model.g * model.two_l * math.cos(theta)
        top, bottom = model.cfg.spans(delta)
        r["t"].append(state.t)
        r["motor_angle"].append(motor)
        r["joint_angle"].append(theta)
        r["joint_velocity"].append(omega)
        r["height"].append(height)
        r["spring_torque"].append(model.spring_torque(delta))
        r["gravity_torque"].append(grav)
        r["belt_state"].append(act.belt_state(model.cfg, delta).value)
        r["span_top"].append(top)
        r["span_bottom"].append(bottom)

    def trace(self, events, final_state):
        r = self.rows
        arr = {k: np.asarray(v, float) for k, v in r.items() if k != "belt_state"}
        return SimTrace(belt_state=list(r["belt_state"]), events=list(events), final_state=final_state, **arr)


def _check_stance(model, params, state, motor):
    theta = state.theta
    if not (math.isfinite(theta) and math.isfinite(state.omega)):
        raise InstabilityError("non-finite state; reduce dt", t=state.t)
    if abs(state.omega) > params.max_velocity:
        raise InstabilityError(
            f"|joint velocity| {abs(state.omega):.4g} rad/s exceeds {params.max_velocity:g}; reduce dt",
            t=state.t,
        )
    if theta <= params.theta_floor:
        raise BottomOutError(f"leg folded to the kinematic floor (theta={theta:.4g} rad)", t=state.t)
    if theta >= HALF_PI - params.theta_floor:
        raise BottomOutError(f"leg reached full extension (theta={theta:.4g} rad)", t=state.t)
    if not model.lim.contains(motor - theta):
        raise BottomOutError(f"deflection {motor - theta:.6g} rad reached the actuator limit", t=state.t)


def step(
    state: SimState,
    cfg: VsaConfig,
    leg: LegParams,
    motor_angle,
    params: SimParams,
    *,
    _model=None,
    events=None,
) -> SimState:
    """Advance ``state`` by ``params.dt``.

    ``motor_angle`` is either a constant commanded angle or a callable of time.
    Touchdown, liftoff and belt skips are handled here; skip events are
    appended to ``events`` when a list is supplied.
    """
    model = _model or _Model(cfg, leg, params)
    cmd = motor_angle if callable(motor_angle) else (lambda t, a=float(motor_angle): a)
    dt = params.dt
    t0 = state.t
    slip = state.slip

    def motor_at(t):
        return cmd(t) + slip

    try:
        if state.airborne:
            state, t_contact = _flight_step(model, params, state, motor_at)
            if t_contact is not None and events is not None:
                events.append({"t": t_contact, "kind": "touchdown"})
        else:
            th, om = _rk4(model, state.theta, state.omega, t0, dt, motor_at)
            state = replace(state, t=t0 + dt, theta=th, omega=om)
    except (DomainError, LimitError) as exc:
        raise BottomOutError(f"spring driven out of its domain: {exc}", t=t0) from exc
    if state.airborne:
        return state

    motor = motor_at(state.t)
    _check_stance(model, params, state, motor)

    delta = motor - state.theta
    bs = act.belt_state(cfg, delta)
    if bs is not BeltState.ENGAGED and params.slip_angle > 0 and abs(delta) >= 0.5 * params.slip_angle:
        jump = -math.copysign(params.slip_angle, delta)
        state = replace(state, slip=state.slip + jump)
        if events is not None:
            events.append({"t": state.t, "kind": bs.value, "slip": jump, "deflection": delta})

    if params.contact_model is ContactModel.FREE_FLIGHT_GROUND:
        # The foot leaves when the ground would have to pull and the unloaded
        # leg (at the motor angle) no longer reaches the ground.
        motor = motor_at(state.t) + (state.slip - slip)
        if motor - state.theta <= 0 and model.grf(state.theta, state.omega, motor) < 0:
            hp = model.two_l * math.cos(state.theta)
            state = replace(
                state, airborne=True, y=model.height(state.theta), vy=hp * state.omega
            )
            if events is not None:
                events.append({"t": state.t, "kind": "liftoff"})
    return state


def _flight_step(model, params, state, motor_at):
    dt = params.dt
    t0, y0, v0, g = state.t, state.y, state.vy, model.g

    def gap(tau):
        y = y0 + v0 * tau - 0.5 * g * tau * tau
        return y - model.height(motor_at(t0 + tau))

    if gap(dt) > 0:
        return replace(state, t=t0 + dt, y=y0 + v0 * dt - 0.5 * g * dt * dt, vy=v0 - g * dt), None
    tau = 0.0 if gap(0.0) <= 0 else brentq(gap, 0.0, dt, xtol=1e-15)
    t_c = t0 + tau
    theta = motor_at(t_c)
    # Both the hip velocity and the stance motion are vertical, so pinning
    # the foot carries the hip velocity over unchanged.
    omega = (v0 - g * tau) / (model.two_l * math.cos(theta))
    rest = dt - tau
    if rest > 0:
        theta, omega = _rk4(model, theta, omega, t_c, rest, motor_at)
    return replace(state, t=t0 + dt, theta=theta, omega=omega, airborne=False, y=0.0, vy=0.0), t_c


def simulate(
    cfg: VsaConfig,
    leg: LegParams,
    traj: MotorTrajectory,
    params: SimParams,
    initial: SimState,
) -> SimTrace:
    """Integrate for ``params.duration`` from ``initial``.

    Errors raised by :func:`step` carry the failing time and the trace up
    to that point (``exc.trace``).
    """
    model = _Model(cfg, leg, params)
    rec = _Recorder(model)
    events: List[dict] = []
    state = initial
    rec.add(state, traj.angle(state.t) + state.slip, traj.rate(state.t))
    n = params.n_steps
    t_start = initial.t
    for i in range(n):
        prev = state
        try:
            state = step(state, cfg, leg, traj.angle, params, _model=model, events=events)
        except SimulationError as exc:
            exc.trace = rec.trace(events, prev)
            raise
        # keep the time grid free of accumulated round-off
        state = replace(state, t=t_start + (i + 1) * params.dt)
        rec.add(state, traj.angle(state.t) + state.slip, traj.rate(state.t))
    return rec.trace(events, state)


def static_state(cfg: VsaConfig, leg: LegParams, motor_angle: float, t: float = 0.0) -> SimState:
    """Stance state at rest under a stationary motor at ``motor_angle``."""
    delta = equilibrium_deflection(cfg, leg, motor_angle)
    return SimState(t=t, theta=motor_angle - delta, omega=0.0)


def drop_initial_state(cfg: VsaConfig, leg: LegParams, scenario: DropScenario) -> SimState:
    """Hip at rest at ``h_g + h_drop`` with the leg hanging at the landing angle."""
    h1 = scenario.free_fall(leg)
    if not h1 >= 0:
        raise DomainError(
            f"start height {scenario.h_g + scenario.h_drop:.6g} m is below the landing pose "
            f"(free fall {h1:.6g} m)"
        )
    return SimState(t=0.0, theta=scenario.theta_i, omega=0.0, airborne=True, y=scenario.h_g + scenario.h_drop)


def simulate_drop(cfg: VsaConfig, leg: LegParams, scenario: DropScenario, params: SimParams) -> SimTrace:
    """Free fall from ``h_g + h_drop`` with the motor at ``theta_i``, then compliant landing.

    Raises BottomOutError (with the partial trace) if the leg collapses.
    """
    traj = MotorTrajectory.constant(scenario.theta_i)
    return simulate(cfg, leg, traj, params, drop_initial_state(cfg, leg, scenario))


@dataclass(frozen=True)
class DropMetrics:
    settle_height: float
    osc_amplitude: float
    crossings: int
    peak_deflection: float
    min_height: float
    touchdown_time: Optional[float]


def drop_metrics(trace: SimTrace, settle_window: float = 0.3, band: float = 2e-4) -> DropMetrics:
    """Settling height (tail mean), oscillation amplitude after the first trough and settle-line crossings.

    ``band`` is a hysteresis half-width in m: excursions smaller than this do
    not count as crossings.
    """
    t, h = trace.t, trace.height
    td = next((e["t"] for e in trace.events if e["kind"] == "touchdown"), None)
    tail = t >= t[-1] - settle_window
    settle = float(np.mean(h[tail]))
    contact = t >= (td if td is not None else t[0])
    hc = h[contact]
    i_min = int(np.argmin(hc))
    amp = float(np.max(np.abs(hc[i_min:] - settle)))
    dev = hc - settle
    s = np.where(np.abs(dev) < band, 0.0, np.sign(dev))
    s = s[s != 0]
    crossings = int(np.sum(s[1:] != s[:-1])) if s.size > 1 else 0
    with np.errstate(invalid="ignore"):
        deflection = trace.motor_angle - trace.joint_angle
    peak = float(np.nanmax(np.abs(deflection))) if np.any(np.isfinite(deflection)) else 0.0
    return DropMetrics(settle, amp, crossings, peak, float(np.min(hc)), td)
