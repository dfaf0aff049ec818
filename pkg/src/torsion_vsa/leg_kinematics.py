"""Two-segment leg whose knee is slaved to the thigh by a cardan gear.

The thigh leaves the hip at ``theta1`` below horizontal and the cardan gear
turns the knee at twice the thigh rate, so the shank mirrors the thigh and
the foot stays on the vertical line through the hip::

    height = ground_offset + 2*L*sin(theta1)

Segments are massless; the supported mass sits at the hip.  The knee
opening past perpendicular is ``theta2 = 2*theta1 - pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class LegParams:
    """Leg geometry and load.

    ``g`` may be zero to switch gravity off in tests; everything else must be
    strictly positive (``ground_offset`` non-negative).
    """

    L: float
    m: float
    g: float = 9.81
    ground_offset: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError(f"L must be positive, got {self.L!r}")
        if not self.m > 0:
            raise DomainError(f"m must be positive, got {self.m!r}")
        if not self.g >= 0:
            raise DomainError(f"g must be non-negative, got {self.g!r}")
        if not self.ground_offset >= 0:
            raise DomainError(f"ground_offset must be non-negative, got {self.ground_offset!r}")

    @property
    def weight(self):
        return self.m * self.g


@dataclass(frozen=True)
class LegPose:
    theta1: float
    theta2: float
    height: float


def _check_angle(theta1, name="theta1"):
    if not 0 < theta1 < HALF_PI:
        raise DomainError(f"{name}={theta1!r} rad outside (0, pi/2)")


def height_of(leg: LegParams, theta1: float) -> float:
    """Hip height for thigh angle ``theta1``."""
    _check_angle(theta1)
    return leg.ground_offset + 2.0 * leg.L * math.sin(theta1)


def theta_of(leg: LegParams, height: float) -> float:
    """Thigh angle giving hip ``height``; inverse of :func:`height_of`."""
    u = (height - leg.ground_offset) / (2.0 * leg.L)
    if not 0 < u < 1:
        raise DomainError(
            f"height {height!r} m outside ({leg.ground_offset}, {leg.ground_offset + 2 * leg.L})"
        )
    return math.asin(u)


def dheight_dtheta(leg: LegParams, theta1: float) -> float:
    return 2.0 * leg.L * math.cos(theta1)


def knee_angle(theta1: float) -> float:
    """Opening between the segments past perpendicular, ``2*theta1 - pi/2``."""
    return 2.0 * theta1 - HALF_PI


def pose(leg: LegParams, theta1: float) -> LegPose:
    return LegPose(theta1, knee_angle(theta1), height_of(leg, theta1))


def cardan_foot_track(leg: LegParams, theta1: float, knee_ratio: float = 2.0) -> float:
    """Horizontal foot position relative to the hip.

    ``knee_ratio`` is the knee rotation per unit thigh rotation; the cardan
    gear fixes it at 2, where the offset cancels exactly.
    """
    _check_angle(theta1)
    if knee_ratio == 2.0:
        return 0.0
    return leg.L * (math.cos(theta1) - math.cos((knee_ratio - 1.0) * theta1))


def gravity_torques(leg: LegParams, theta1: float, theta2: float):
    """Thigh and knee gravity torques ``(tau1, tau2)`` from the rest-pose force balance.

    ``tau1 = m*g*L*sin(theta1)*cos(theta2)`` and ``tau2 = m*g*L*cos(theta1)``
    with the normal force taken equal to the weight.
    """
    _check_angle(theta1)
    if not -HALF_PI <= theta2 <= HALF_PI:
        raise DomainError(f"theta2={theta2!r} rad outside [-pi/2, pi/2]")
    f_n = leg.weight
    tau1 = f_n * leg.L * math.cos(HALF_PI - theta1) * math.cos(theta2)
    tau2 = f_n * leg.L * math.cos(theta1)
    return tau1, tau2


def gravity_load_torque(leg: LegParams, theta1: float) -> float:
    """Gravity torque the actuator must hold about the thigh, ``m*g*dh/dtheta1``.

    With the knee slaved 2:1 this is the knee torque ``tau2`` reflected
    through the cardan ratio, and it is the gradient of ``m*g*height`` so the
    simulator conserves energy with it.
    """
    _check_angle(theta1)
    return leg.weight * dheight_dtheta(leg, theta1)
