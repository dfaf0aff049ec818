"""Scripted characterisation sweeps and the drop suite, producing plain data tables."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import actuator as act
from .actuator import VsaConfig
from .errors import BottomOutError, DomainError, SimulationError, VsaError
from .hop_sim import SimParams, SimTrace, drop_metrics, simulate, simulate_drop, static_state
from .landing import DropScenario, solve_pretension
from .leg_kinematics import LegParams

#: Default pretension grid step, m.
PRETENSION_STEP = 5e-4
#: Default deflection grid step, rad.
DEFLECTION_STEP = math.radians(0.5)
DEFLECTION_PRETENSIONS = (0.065, 0.075, 0.085)
DROP_PRETENSIONS = (0.06, 0.076, 0.081, 0.086)

#: Settling within this fraction of ``h_g`` counts as on target.
SETTLE_TOLERANCE = 0.02
#: Post-contact amplitude below this fraction of ``h_drop`` counts as oscillation-less.
AMPLITUDE_TOLERANCE = 0.05


class Swept(enum.Enum):
    PRETENSION = "pretension"
    DEFLECTION = "deflection"
    BOTH = "both"


@dataclass(frozen=True)
class SweepSpec:
    """Grid description.

    ``lo``/``hi``/``step`` describe the swept pretension axis (m) for
    ``PRETENSION`` and ``BOTH``, or the deflection axis (rad) for
    ``DEFLECTION``.  For ``BOTH`` the deflection axis is symmetric,
    ``[-theta_hi, theta_hi]`` with ``theta_step``.  ``fixed`` holds the
    value of the non-swept variable (deflection in rad, or pretension in m).
    """

    swept: Swept
    lo: float
    hi: float
    step: float
    fixed: Optional[float] = None
    theta_hi: Optional[float] = None
    theta_step: float = DEFLECTION_STEP
    output: Optional[str] = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"sweep needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.step > 0 or not self.theta_step > 0:
            raise DomainError("sweep steps must be positive")
        if self.swept is not Swept.BOTH and self.fixed is None:
            raise DomainError(f"{self.swept.value} sweep needs a fixed value for the other variable")
        if self.swept is Swept.BOTH and not (self.theta_hi and self.theta_hi > 0):
            raise DomainError("grid sweep needs a positive theta_hi")

    def axis(self):
        """Primary axis values; endpoints included when ``step`` divides the span."""
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9))
        return self.lo + self.step * np.arange(n + 1)

    def theta_axis(self):
        n = int(math.floor(self.theta_hi / self.theta_step + 1e-9))
        half = self.theta_step * np.arange(1, n + 1)
        return np.concatenate([-half[::-1], [0.0], half])


@dataclass
class Table:
    """Column-oriented numeric table."""

    columns: List[str]
    data: Dict[str, np.ndarray]

    def __len__(self):
        return len(self.data[self.columns[0]])

    def to_csv(self, path=None) -> Optional[str]:
        lines = [",".join(self.columns)]
        for i in range(len(self)):
            lines.append(",".join(repr(float(self.data[c][i])) for c in self.columns))
        text = "\n".join(lines) + "\n"
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def _torque_or_nan(cfg, x_i, theta):
    try:
        return float(act.joint_torque(cfg.with_pretension(float(x_i)), float(theta)))
    except (DomainError, act.LimitError):
        return math.nan


def torque_surface(cfg: VsaConfig, grid: SweepSpec) -> Table:
    """Joint torque on a pretension x deflection grid; inadmissible cells are NaN.

    Rows are ordered pretension-major, deflection-minor.
    """
    if grid.swept is not Swept.BOTH:
        raise DomainError("torque_surface needs a grid sweep (swept=both)")
    xs, ths = grid.axis(), grid.theta_axis()
    xx, tt = np.meshgrid(xs, ths, indexing="ij")
    tau = np.array([_torque_or_nan(cfg, x, t) for x, t in zip(xx.ravel(), tt.ravel())])
    return Table(["x_i", "theta", "tau"], {"x_i": xx.ravel(), "theta": tt.ravel(), "tau": tau})


def default_surface_spec(cfg: VsaConfig, lo=0.035, hi=0.0825):
    theta_hi = cfg.with_pretension(lo).limits.theta_max
    return SweepSpec(Swept.BOTH, lo, hi, PRETENSION_STEP, theta_hi=theta_hi)


def pretension_curve(
    cfg: VsaConfig, probe_theta=math.radians(15.0), lo=0.035, hi=None, step=PRETENSION_STEP
) -> Table:
    """Torque at the probe deflection against pretension; infeasible rows are NaN."""
    if hi is None:
        hi = act.feasible_pretensions(cfg, probe_theta).hi
    spec = SweepSpec(Swept.PRETENSION, lo, hi, step, fixed=probe_theta)
    xs = spec.axis()
    tau = np.array([_torque_or_nan(cfg, x, probe_theta) for x in xs])
    return Table(["x_i", "tau"], {"x_i": xs, "tau": tau})


def deflection_curves(
    cfg: VsaConfig, pretensions: Sequence[float] = DEFLECTION_PRETENSIONS, step=DEFLECTION_STEP
) -> Dict[float, Table]:
    """Torque against deflection over each pretension's admissible interval (grid clipped to the limits)."""
    out = {}
    for x in pretensions:
        c = cfg.with_pretension(x)
        n = int(math.floor(c.limits.theta_max / step + 1e-9))
        half = step * np.arange(1, n + 1)
        ths = np.concatenate([-half[::-1], [0.0], half])
        tau = np.array([float(act.joint_torque(c, float(t))) for t in ths])
        out[float(x)] = Table(["theta", "tau"], {"theta": ths, "tau": tau})
    return out


class DropClass(enum.Enum):
    COLLAPSE = "collapse"
    BELT_SKIP = "belt-skip"
    OSCILLATION_LESS = "oscillation-less"
    SETTLES_HIGH = "settles-high"
    SETTLES_LOW = "settles-low"
    OSCILLATING = "oscillating"
    ERROR = "error"


@dataclass
class DropRun:
    x_i: float
    classification: DropClass
    settle_height: float = math.nan
    osc_amplitude: float = math.nan
    crossings: int = 0
    events: List[dict] = field(default_factory=list)
    trace: Optional[SimTrace] = None
    error: Optional[str] = None
    optimum: bool = False

    def to_dict(self):
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        d = {
            "x_i": self.x_i,
            "settle_height_m": clean(self.settle_height),
            "osc_amplitude_m": clean(self.osc_amplitude),
            "classification": self.classification.value,
            "events": [{k: clean(v) for k, v in e.items()} for e in self.events],
            "crossings": self.crossings,
            "optimum": self.optimum,
        }
        if self.error:
            d["error"] = self.error
        return d


def classify_drop(trace: SimTrace, scenario: DropScenario, x_i: float = math.nan) -> DropRun:
    """Classify a drop that ran to completion; collapses are classified by :func:`run_drop`."""
    mt = drop_metrics(trace)
    skips = [e for e in trace.events if e["kind"].startswith("skip")]
    h_g = scenario.h_g
    if skips:
        cls = DropClass.BELT_SKIP
    elif abs(mt.settle_height - h_g) <= SETTLE_TOLERANCE * h_g and mt.osc_amplitude < AMPLITUDE_TOLERANCE * scenario.h_drop:
        cls = DropClass.OSCILLATION_LESS
    elif mt.settle_height > (1 + SETTLE_TOLERANCE) * h_g:
        cls = DropClass.SETTLES_HIGH
    elif mt.settle_height < (1 - SETTLE_TOLERANCE) * h_g:
        cls = DropClass.SETTLES_LOW
    else:
        cls = DropClass.OSCILLATING
    return DropRun(
        x_i=float(x_i),
        classification=cls,
        settle_height=mt.settle_height,
        osc_amplitude=mt.osc_amplitude,
        crossings=mt.crossings,
        events=list(trace.events),
        trace=trace,
    )


def run_drop(cfg: VsaConfig, leg: LegParams, scenario: DropScenario, params: SimParams, x_i: float) -> DropRun:
    """Simulate one drop and classify it; never raises for simulation failures."""
    try:
        trace = simulate_drop(cfg.with_pretension(x_i), leg, scenario, params)
    except BottomOutError as exc:
        events = list(exc.trace.events) if exc.trace is not None else []
        events.append({"t": exc.t, "kind": "bottom_out"})
        return DropRun(float(x_i), DropClass.COLLAPSE, events=events, trace=exc.trace, error=str(exc))
    except (SimulationError, VsaError) as exc:
        return DropRun(float(x_i), DropClass.ERROR, trace=getattr(exc, "trace", None), error=str(exc))
    return classify_drop(trace, scenario, x_i)


@dataclass
class DropSuite:
    scenario: DropScenario
    runs: List[DropRun]
    solution: Optional[dict] = None

    def summary(self):
        sc = self.scenario
        return {
            "scenario": {"h_g": sc.h_g, "h_drop": sc.h_drop, "theta_i": sc.theta_i, "theta_i_deg": math.degrees(sc.theta_i)},
            "solution": self.solution,
            "runs": [r.to_dict() for r in self.runs],
        }

    def to_json(self, path=None):
        text = json.dumps(self.summary(), indent=2, sort_keys=False) + "\n"
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return None


def drop_suite(
    cfg: VsaConfig,
    leg: LegParams,
    scenario: DropScenario,
    params: SimParams,
    x_values: Sequence[float] = DROP_PRETENSIONS,
    include_optimum: bool = True,
    weights=(1.0, 1.0),
) -> DropSuite:
    """Replay drops at each pretension plus the solved optimum; per-run failures are recorded, never raised."""
    runs = []
    solution = None
    xs = [(float(x), False) for x in x_values]
    if include_optimum:
        try:
            sol = solve_pretension(scenario, cfg, leg, weights)
            solution = sol.to_dict()
            xs.append((sol.x_i, True))
        except VsaError as exc:
            solution = {"error": str(exc)}
    for x, is_opt in xs:
        run = run_drop(cfg, leg, scenario, params, x)
        run.optimum = is_opt
        runs.append(run)
    return DropSuite(scenario, runs, solution)


@dataclass(frozen=True)
class TrackingMetrics:
    """Height tracking of a hop run against the motor-implied height ``height_of(motor_angle)``.

    ``error = height - motor_height``; ``overshoot`` is the peak height minus
    the peak motor-implied height (positive means the leg rises above the
    motor's peak); ``sag`` is the mean error.
    """

    rms_error: float
    overshoot: float
    sag: float
    max_error: float
    min_error: float
    constant_sign: bool
    liftoffs: int
    skips: int

    def to_dict(self):
        return {
            "rms_error_m": self.rms_error,
            "overshoot_m": self.overshoot,
            "sag_m": self.sag,
            "max_error_m": self.max_error,
            "min_error_m": self.min_error,
            "constant_sign": self.constant_sign,
            "liftoffs": self.liftoffs,
            "skips": self.skips,
        }


def motor_implied_height(leg: LegParams, trace: SimTrace, traj) -> np.ndarray:
    """Height the leg would have with zero deflection, from the commanded motor angle."""
    cmd = np.array([traj.angle(float(t)) for t in trace.t])
    return leg.ground_offset + 2.0 * leg.L * np.sin(cmd)


def tracking_metrics(leg: LegParams, trace: SimTrace, traj) -> TrackingMetrics:
    target = motor_implied_height(leg, trace, traj)
    err = trace.height - target
    return TrackingMetrics(
        rms_error=float(np.sqrt(np.mean(err * err))),
        overshoot=float(np.max(trace.height) - np.max(target)),
        sag=float(np.mean(err)),
        max_error=float(np.max(err)),
        min_error=float(np.min(err)),
        constant_sign=bool(np.all(err < 0) or np.all(err > 0)),
        liftoffs=sum(1 for e in trace.events if e["kind"] == "liftoff"),
        skips=sum(1 for e in trace.events if e["kind"].startswith("skip")),
    )


def hop_run(cfg: VsaConfig, leg: LegParams, traj, params: SimParams, x_i: float):
    """Hop from static equilibrium under the initial motor angle; returns ``(trace, metrics)``."""
    c = cfg.with_pretension(x_i)
    trace = simulate(c, leg, traj, params, static_state(c, leg, traj.angle(0.0)))
    return trace, tracking_metrics(leg, trace, traj)
