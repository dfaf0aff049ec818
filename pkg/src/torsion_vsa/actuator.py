"""Antagonistic belt-drive actuator with two identical nonlinear springs.

Deflecting the joint by ``theta`` relative to the motor lengthens one spring
run by ``r_p*theta`` and shortens the other by the same amount.  The joint
torque is the pulley radius times the imbalance of the two tip forces::

    tau(theta) = r_p * (F(span(x_i + r_p*theta)) - F(span(x_i - r_p*theta)))

Raising the common pretension ``x_i`` moves both springs up their stiffening
force curve and so raises the joint stiffness; the motor angle is untouched.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, EmptyRangeError, LimitError
from .spring import LinearSpringParams, SpanConvention, TorsionSpringParams

Spring = Union[TorsionSpringParams, LinearSpringParams]

#: Gain over the minimum stiffness of a scan that marks the start of the
#: operating range.  Chosen so the reference spring (kappa=0.5, r_s=0.05)
#: probed at 15 degrees starts its range at 0.060 m.
DEFAULT_GAIN_THRESHOLD = 2.65
DEFAULT_PROBE_THETA = math.radians(15.0)

_EDGE = 1e-12


class BeltState(enum.Enum):
    ENGAGED = "engaged"
    SKIP_SLACK = "skip_slack"
    SKIP_OVERLOAD = "skip_overload"


class DeflectionLimits(NamedTuple):
    theta_min: float
    theta_max: float

    def contains(self, theta):
        return self.theta_min <= theta <= self.theta_max


class PretensionInterval(NamedTuple):
    lo: float
    hi: float


@dataclass(frozen=True)
class VsaConfig:
    """Actuator geometry and belt limits.

    Attributes:
        spring: element used on both belt runs.
        r_p: joint pulley radius, m.
        x_i: pretension, the full length of each spring at zero deflection, m.
        belt_min_tension: below this the slack run skips teeth, N.
        belt_max_tension: above this the tight run skips teeth, N.
        margin: half-span kept clear of both mechanical ends, m.
        convention: mapping of spring length to stiffness-function argument.
    """

    spring: Spring
    r_p: float
    x_i: float
    belt_min_tension: float = 0.5
    belt_max_tension: float = 200.0
    margin: float = 1e-6
    convention: SpanConvention = field(default=SpanConvention.HALF_SPAN)

    def __post_init__(self):
        if not self.r_p > 0:
            raise DomainError(f"r_p must be positive, got {self.r_p!r}")
        torsion = isinstance(self.spring, TorsionSpringParams)
        if torsion and self.r_p < self.spring.r_s:
            raise DomainError(
                f"rule r_p >= r_s violated: r_p={self.r_p!r} < r_s={self.spring.r_s!r}"
            )
        upper = 2.0 * self.spring.r_s if torsion else math.inf
        if not 0 < self.x_i < upper:
            raise DomainError(f"rule 0 < x_i < 2*r_s violated: x_i={self.x_i!r}")
        if not self.belt_min_tension >= 0:
            raise DomainError("belt_min_tension must be >= 0")
        if not self.belt_max_tension > self.belt_min_tension:
            raise DomainError("belt_max_tension must exceed belt_min_tension")
        if not self.margin >= 0:
            raise DomainError("margin must be >= 0")

    def with_pretension(self, x_i):
        return replace(self, x_i=float(x_i))

    @property
    def _scale(self):
        # d(span)/d(length)
        return 0.5 if self.convention is SpanConvention.HALF_SPAN else 1.0

    def spans(self, theta):
        """Stiffness-function arguments of the (top, bottom) runs."""
        s = self._scale
        d = self.r_p * theta
        return s * (self.x_i + d), s * (self.x_i - d)

    @cached_property
    def limits(self):
        return deflection_limits(self)


def deflection_limits(cfg: VsaConfig) -> DeflectionLimits:
    """Symmetric deflection interval keeping both spans inside ``[margin, r_s - margin]``."""
    s = cfg._scale
    top_cap = cfg.spring.max_half_span - cfg.margin
    theta_ext = (top_cap / s - cfg.x_i) / cfg.r_p
    theta_con = (cfg.x_i - cfg.margin / s) / cfg.r_p
    theta_max = min(theta_ext, theta_con)
    if not theta_max > 0:
        raise LimitError(
            f"no admissible deflection at x_i={cfg.x_i!r} under {cfg.convention.value}"
        )
    return DeflectionLimits(-theta_max, theta_max)


def _check_theta(cfg, theta):
    lim = cfg.limits
    if isinstance(theta, (float, int)):
        if not lim.theta_min <= theta <= lim.theta_max:
            raise LimitError(
                f"deflection {theta!r} rad outside [{lim.theta_min:.9g}, {lim.theta_max:.9g}]"
            )
    elif not np.all((lim.theta_min <= np.asarray(theta)) & (np.asarray(theta) <= lim.theta_max)):
        raise LimitError("deflection outside the admissible interval")


def spring_forces(cfg: VsaConfig, theta):
    """Tip forces (top, bottom) in N; raises LimitError outside the deflection limits."""
    _check_theta(cfg, theta)
    top, bottom = cfg.spans(theta)
    try:
        return cfg.spring.axial_force(top), cfg.spring.axial_force(bottom)
    except DomainError as exc:
        # only reachable with margin=0, exactly at a limit
        raise LimitError(f"spring span left its range at deflection {theta!r}: {exc}") from exc


def joint_torque(cfg: VsaConfig, theta):
    """Restoring joint torque in N*m for deflection ``theta`` of the joint relative to the motor."""
    f_top, f_bottom = spring_forces(cfg, theta)
    return cfg.r_p * (f_top - f_bottom)


def tangent_stiffness(cfg: VsaConfig, theta):
    """Analytic d(tau)/d(theta) in N*m/rad."""
    _check_theta(cfg, theta)
    top, bottom = cfg.spans(theta)
    k = cfg.spring.axial_force_derivative
    return cfg._scale * cfg.r_p ** 2 * (k(top) + k(bottom))


def potential_energy(cfg: VsaConfig, theta):
    """Elastic energy in J stored by the pair at ``theta`` relative to ``theta = 0``.

    Its derivative with respect to ``theta`` is ``joint_torque``.
    """
    _check_theta(cfg, theta)
    top, bottom = cfg.spans(theta)
    mid = cfg._scale * cfg.x_i
    e = cfg.spring.energy_at
    return (e(top) + e(bottom) - 2.0 * e(mid)) / (2.0 * cfg._scale)


def belt_state(cfg: VsaConfig, theta) -> BeltState:
    """Classify belt engagement at ``theta``; never raises."""
    top, bottom = cfg.spans(float(theta))
    stretched, contracted = (top, bottom) if theta >= 0 else (bottom, top)
    if contracted <= 0:
        return BeltState.SKIP_SLACK
    if cfg.spring.axial_force(contracted) < cfg.belt_min_tension:
        return BeltState.SKIP_SLACK
    cap = cfg.spring.max_half_span * (1.0 - 1e-12)
    if stretched >= cap or cfg.spring.axial_force(stretched) > cfg.belt_max_tension:
        return BeltState.SKIP_OVERLOAD
    return BeltState.ENGAGED


def linear_sea_torque(k, r, theta):
    """Joint torque ``r * k * 2*r*theta`` of a linear-spring antagonistic pair.

    ``k * 2*r*theta`` is the belt-force imbalance; multiplying by the pulley
    radius gives torque.  Common pretension cancels out of the difference.
    """
    if not (k > 0 and r > 0):
        raise DomainError("k and r must be positive")
    return 2.0 * k * r * r * theta


def feasible_pretensions(cfg: VsaConfig, theta) -> PretensionInterval:
    """Pretensions for which deflection ``|theta|`` stays inside the limits.

    The endpoints are pulled in by ``_EDGE`` so that they round-trip through
    :func:`deflection_limits` despite floating-point round-off.
    """
    s = cfg._scale
    d = cfg.r_p * abs(theta)
    lo = d + cfg.margin / s + _EDGE
    hi = (cfg.spring.max_half_span - cfg.margin) / s - d - _EDGE
    if not hi > lo:
        raise EmptyRangeError(f"no pretension admits deflection {theta!r} rad")
    return PretensionInterval(lo, hi)


def operating_range(
    cfg: VsaConfig,
    probe_theta=DEFAULT_PROBE_THETA,
    gain_threshold=DEFAULT_GAIN_THRESHOLD,
    n=2001,
) -> PretensionInterval:
    """Pretension interval over which the joint stiffness changes significantly.

    Tangent stiffness at ``probe_theta`` is scanned over every pretension that
    admits that deflection.  The range opens where the stiffness first exceeds
    ``gain_threshold`` times its scan minimum and closes at the largest
    pretension still admitting the probe deflection.  ``cfg.x_i`` is ignored.
    """
    if not gain_threshold > 1:
        raise DomainError("gain_threshold must exceed 1")
    lo, hi = feasible_pretensions(cfg, probe_theta)
    xs = np.linspace(lo, hi, n)

    def stiffness(x):
        return tangent_stiffness(cfg.with_pretension(x), float(probe_theta))

    ks = np.array([stiffness(x) for x in xs])
    target = gain_threshold * ks.min()
    above = np.nonzero(ks > target)[0]
    if above.size == 0:
        raise EmptyRangeError(
            f"stiffness never exceeds {gain_threshold}x its minimum over [{lo:.6g}, {hi:.6g}] m"
        )
    i = above[0]
    if i == 0:
        return PretensionInterval(lo, hi)
    start = brentq(lambda x: stiffness(x) - target, xs[i - 1], xs[i], xtol=1e-12)
    return PretensionInterval(start, hi)
