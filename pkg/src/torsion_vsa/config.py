"""Strict JSON run configuration.

Angles are given in degrees (``*_deg`` keys) and converted to radians at this
boundary; every other quantity is SI.  Unknown keys are rejected and every
module invariant is checked at load time, with the offending field path in
the error message.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .actuator import DEFAULT_GAIN_THRESHOLD, VsaConfig
from .errors import ConfigError
from .hop_sim import ContactModel, MotorTrajectory, SimParams, TrajectoryKind
from .landing import DropScenario
from .leg_kinematics import LegParams
from .spring import SpanConvention, TorsionSpringParams


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SpringSection(_Strict):
    kappa: float = Field(gt=0, description="torsional stiffness, N*m/rad")
    r_s: float = Field(gt=0, description="spring leg length, m")


class ActuatorSection(_Strict):
    r_p: float = Field(gt=0, description="joint pulley radius, m")
    x_i: Optional[float] = Field(default=None, gt=0, description="pretension, m; defaults to 1.5*r_s")
    belt_min_tension: float = Field(default=0.5, ge=0)
    belt_max_tension: float = Field(default=200.0, gt=0)
    margin: float = Field(default=1e-6, ge=0)
    convention: Literal["half_span", "full_length"] = "half_span"
    tooth_pitch: float = Field(default=0.005, gt=0, description="belt tooth pitch, m")
    motor_pulley_radius: float = Field(default=0.025, gt=0, description="motor pulley radius, m")

    @property
    def slip_angle(self):
        """Motor-angle jump of a one-tooth skip, rad."""
        return self.tooth_pitch / self.motor_pulley_radius


class LegSection(_Strict):
    L: float = Field(gt=0)
    m: float = Field(gt=0)
    g: float = Field(default=9.81, gt=0)
    ground_offset: float = Field(default=0.0, ge=0)


class ScenarioSection(_Strict):
    h_g: float = Field(gt=0)
    h_drop: float = Field(gt=0)
    theta_i_deg: float = Field(gt=0, lt=90)


class TrajectorySection(_Strict):
    kind: Literal["constant", "sine", "square_smoothed"] = "sine"
    amplitude_deg: float = Field(default=5.0, ge=0)
    period: float = Field(default=0.35, gt=0)
    offset_deg: float = Field(default=78.0, gt=0, lt=90)

    def build(self):
        return MotorTrajectory(
            TrajectoryKind(self.kind), math.radians(self.amplitude_deg), self.period, math.radians(self.offset_deg)
        )


class SimSection(_Strict):
    dt: float = Field(default=1e-4, gt=0)
    duration: float = Field(default=3.0, gt=0)
    viscous_damping: float = Field(default=0.0, ge=0)
    contact_model: Literal["pinned_foot", "free_flight_ground"] = "pinned_foot"
    restitution: bool = False
    max_velocity: float = Field(default=1e3, gt=0)
    theta_floor_deg: float = Field(default=1.0, gt=0, lt=45)

    @model_validator(mode="after")
    def _duration(self):
        if self.duration < self.dt:
            raise ValueError("rule duration >= dt violated")
        return self


class HopSection(_Strict):
    x_i_values: List[float] = Field(default_factory=lambda: [0.075, 0.085], min_length=1)
    trajectory: TrajectorySection = Field(default_factory=TrajectorySection)
    sim: SimSection = Field(
        default_factory=lambda: SimSection(viscous_damping=0.03, contact_model="free_flight_ground")
    )


class DropSection(_Strict):
    x_i_values: List[float] = Field(default_factory=lambda: [0.06, 0.076, 0.081, 0.086])
    include_optimum: bool = True
    sim: SimSection = Field(default_factory=SimSection)


class SolverSection(_Strict):
    w_energy: float = Field(default=1.0, ge=0)
    w_torque: float = Field(default=1.0, ge=0)
    energy_bound: float = Field(default=1.0, gt=0)
    torque_bound: float = Field(default=1.0, gt=0)
    x_lo: Optional[float] = Field(default=None, gt=0)
    x_hi: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _weights(self):
        if self.w_energy == 0 and self.w_torque == 0:
            raise ValueError("rule w_energy + w_torque > 0 violated")
        if (self.x_lo is None) != (self.x_hi is None):
            raise ValueError("x_lo and x_hi must be given together")
        if self.x_lo is not None and not self.x_lo < self.x_hi:
            raise ValueError("rule x_lo < x_hi violated")
        return self

    @property
    def weights(self):
        return (self.w_energy, self.w_torque)

    @property
    def x_range(self):
        return None if self.x_lo is None else (self.x_lo, self.x_hi)


class CharacterizeSection(_Strict):
    probe_theta_deg: float = Field(default=15.0, gt=0, lt=90)
    gain_threshold: float = Field(default=DEFAULT_GAIN_THRESHOLD, gt=1)
    surface_lo: float = Field(default=0.035, gt=0)
    surface_hi: float = Field(default=0.0825, gt=0)
    pretension_step: float = Field(default=5e-4, gt=0)
    deflection_step_deg: float = Field(default=0.5, gt=0)
    deflection_pretensions: List[float] = Field(default_factory=lambda: [0.065, 0.075, 0.085], min_length=1)

    @model_validator(mode="after")
    def _range(self):
        if not self.surface_lo < self.surface_hi:
            raise ValueError("rule surface_lo < surface_hi violated")
        return self


class RunConfig(_Strict):
    spring: SpringSection
    actuator: ActuatorSection
    leg: LegSection
    scenario: Optional[ScenarioSection] = None
    solver: SolverSection = Field(default_factory=SolverSection)
    drop: DropSection = Field(default_factory=DropSection)
    hop: HopSection = Field(default_factory=HopSection)
    characterize: CharacterizeSection = Field(default_factory=CharacterizeSection)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _cross(self):
        sp, ac = self.spring, self.actuator
        if ac.r_p < sp.r_s:
            raise ValueError(f"actuator.r_p: rule r_p >= r_s violated (r_p={ac.r_p}, r_s={sp.r_s})")
        for path, x in self._pretensions():
            if not 0 < x < 2 * sp.r_s:
                raise ValueError(f"{path}: rule 0 < x_i < 2*r_s violated (x_i={x})")
        if not ac.belt_max_tension > ac.belt_min_tension:
            raise ValueError("actuator.belt_max_tension: rule belt_max_tension > belt_min_tension violated")
        if self.scenario is not None:
            u = (self.scenario.h_g - self.leg.ground_offset) / (2 * self.leg.L)
            if not 0 < u < 1:
                raise ValueError(
                    "scenario.h_g: rule ground_offset < h_g < ground_offset + 2*L violated"
                )
        return self

    def _pretensions(self):
        if self.actuator.x_i is not None:
            yield "actuator.x_i", self.actuator.x_i
        for i, x in enumerate(self.hop.x_i_values):
            yield f"hop.x_i_values[{i}]", x
        for i, x in enumerate(self.drop.x_i_values):
            yield f"drop.x_i_values[{i}]", x
        for i, x in enumerate(self.characterize.deflection_pretensions):
            yield f"characterize.deflection_pretensions[{i}]", x

    # -- builders -------------------------------------------------------

    def spring_params(self):
        return TorsionSpringParams(self.spring.kappa, self.spring.r_s)

    def vsa(self, x_i=None):
        ac = self.actuator
        if x_i is None:
            # without an explicit pretension use 3/4 of the 2*r_s maximum
            x_i = ac.x_i if ac.x_i is not None else 1.5 * self.spring.r_s
        return VsaConfig(
            self.spring_params(),
            ac.r_p,
            float(x_i),
            belt_min_tension=ac.belt_min_tension,
            belt_max_tension=ac.belt_max_tension,
            margin=ac.margin,
            convention=SpanConvention(ac.convention),
        )

    def leg_params(self):
        lg = self.leg
        return LegParams(lg.L, lg.m, lg.g, lg.ground_offset)

    def drop_scenario(self):
        if self.scenario is None:
            raise ConfigError("scenario: section required for drop subcommands")
        sc = self.scenario
        return DropScenario(sc.h_g, sc.h_drop, math.radians(sc.theta_i_deg))

    def sim_params(self, section: SimSection):
        return SimParams(
            dt=section.dt,
            duration=section.duration,
            viscous_damping=section.viscous_damping,
            contact_model=ContactModel(section.contact_model),
            restitution=section.restitution,
            slip_angle=self.actuator.slip_angle,
            max_velocity=section.max_velocity,
            theta_floor=math.radians(section.theta_floor_deg),
        )

    def effective_dict(self):
        return self.model_dump(mode="json")


def _format_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        parts.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


def parse_config(data) -> RunConfig:
    """Validate an already-decoded JSON object."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {_format_error(exc)}") from None


def load_config(path) -> RunConfig:
    """Read and validate a UTF-8 JSON config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not UTF-8") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from None
    return parse_config(data)


def default_config() -> RunConfig:
    """The packaged calibration used by the acceptance suite."""
    text = resources.files("torsion_vsa").joinpath("data/default_config.json").read_text(encoding="utf-8")
    return parse_config(json.loads(text))
