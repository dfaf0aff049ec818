"""Force law of a torsion spring stretched linearly by its leg tips.

A torsion spring of torsional constant ``kappa`` and leg length ``r_s`` is
pulled apart along the line joining its tips.  With ``x`` the half-span (half
the tip-to-tip distance) the legs open by ``2*arcsin(x/r_s)`` and the inward
tip force is::

    F(x) = kappa * arcsin(x / r_s) / sqrt(r_s**2 - x**2) = x * sigma(x)

Every function accepts a Python scalar (fast ``math`` path) or an array-like
(vectorised ``numpy`` path) and returns the matching kind.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Evaluations at or beyond ``r_s * (1 - RIGID_GUARD)`` are rejected.
RIGID_GUARD = 1e-12


class SpanConvention(enum.Enum):
    """How a spring length is mapped onto the stiffness-function argument.

    ``HALF_SPAN`` feeds half the tip-to-tip length, which keeps pretensions up
    to ``2*r_s`` in-domain.  ``FULL_LENGTH`` feeds the full length and exists
    to document that this reading leaves the domain for realistic pretensions.
    """

    HALF_SPAN = "half_span"
    FULL_LENGTH = "full_length"

    def span(self, length):
        """Return the stiffness-function argument for a full spring length."""
        if self is SpanConvention.HALF_SPAN:
            return 0.5 * length
        return length


@dataclass(frozen=True)
class TorsionSpringParams:
    """Torsion spring stretched along its tip line.

    Attributes:
        kappa: torsional stiffness, N*m/rad.
        r_s: leg length, m.
    """

    kappa: float
    r_s: float

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not (self.r_s > 0 and math.isfinite(self.r_s)):
            raise DomainError(f"r_s must be positive and finite, got {self.r_s!r}")

    @property
    def max_half_span(self):
        return self.r_s

    def axial_force(self, x):
        return axial_force(self, x)

    def axial_force_derivative(self, x):
        return axial_force_derivative(self, x)

    def stored_energy(self, x0, x1):
        return stored_energy(self, x0, x1)

    def energy_at(self, x):
        """Energy stored at half-span ``x`` relative to the closed spring."""
        _check(self, x, allow_zero=True)
        if _scalar(x):
            return self.kappa * math.asin(x / self.r_s) ** 2
        return self.kappa * np.arcsin(np.asarray(x, float) / self.r_s) ** 2


@dataclass(frozen=True)
class LinearSpringParams:
    """Constant-stiffness extension spring with zero free length.

    Used as a regression baseline: the belt force equals ``k`` times the full
    spring length, so for half-span ``x`` the force is ``2*k*x``.
    """

    k: float

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"k must be positive and finite, got {self.k!r}")

    max_half_span = math.inf

    def axial_force(self, x):
        _check_nonneg(x)
        return 2.0 * self.k * (x if _scalar(x) else np.asarray(x, float))

    def axial_force_derivative(self, x):
        _check_nonneg(x)
        if _scalar(x):
            return 2.0 * self.k
        return np.full(np.shape(x), 2.0 * self.k)

    def energy_at(self, x):
        _check_nonneg(x)
        x = x if _scalar(x) else np.asarray(x, float)
        return 2.0 * self.k * x * x

    def stored_energy(self, x0, x1):
        if np.any(np.asarray(x0) > np.asarray(x1)):
            raise DomainError("stored_energy requires x0 <= x1")
        return self.energy_at(x1) - self.energy_at(x0)


def _scalar(x):
    return isinstance(x, (float, int)) and not isinstance(x, bool)


def _check_nonneg(x):
    if _scalar(x):
        if not x >= 0:
            raise DomainError(f"negative extension {x!r} is not modelled")
    elif not np.all(np.asarray(x) >= 0):
        raise DomainError("negative extension is not modelled")


def _check(spring, x, allow_zero):
    limit = spring.r_s * (1.0 - RIGID_GUARD)
    if _scalar(x):
        low_ok = x >= 0 if allow_zero else x > 0
        if not (low_ok and x < limit):
            raise DomainError(
                f"half-span {x!r} outside {'[' if allow_zero else '('}0, r_s={spring.r_s})"
            )
        return
    arr = np.asarray(x, float)
    low_ok = arr >= 0 if allow_zero else arr > 0
    if not np.all(low_ok & (arr < limit)):
        raise DomainError(f"half-span outside the open interval below r_s={spring.r_s}")


def sigma(spring: TorsionSpringParams, x):
    """Instantaneous stiffness F(x)/x in N/m; requires ``0 < x < r_s``."""
    _check(spring, x, allow_zero=False)
    r = spring.r_s
    if _scalar(x):
        return spring.kappa * math.asin(x / r) / (x * math.sqrt(r * r - x * x))
    x = np.asarray(x, float)
    return spring.kappa * np.arcsin(x / r) / (x * np.sqrt(r * r - x * x))


def axial_force(spring: TorsionSpringParams, x):
    """Inward tip force in N at half-span ``x``; zero at ``x = 0``."""
    _check(spring, x, allow_zero=True)
    r = spring.r_s
    if _scalar(x):
        return spring.kappa * math.asin(x / r) / math.sqrt(r * r - x * x)
    x = np.asarray(x, float)
    return spring.kappa * np.arcsin(x / r) / np.sqrt(r * r - x * x)


def axial_force_derivative(spring: TorsionSpringParams, x):
    """dF/dx in N/m, the tangent stiffness of one spring in half-span units."""
    _check(spring, x, allow_zero=True)
    r = spring.r_s
    if _scalar(x):
        d = r * r - x * x
        return spring.kappa * (1.0 / d + x * math.asin(x / r) / d ** 1.5)
    x = np.asarray(x, float)
    d = r * r - x * x
    return spring.kappa * (1.0 / d + x * np.arcsin(x / r) / d ** 1.5)


def stored_energy(spring: TorsionSpringParams, x0, x1):
    """Work in J to stretch the full length from ``2*x0`` to ``2*x1``.

    Equals ``2 * integral(F, x0, x1)``, which integrates in closed form to
    ``kappa * (arcsin(x1/r_s)**2 - arcsin(x0/r_s)**2)``.
    """
    if np.any(np.asarray(x0) > np.asarray(x1)):
        raise DomainError("stored_energy requires x0 <= x1")
    return spring.energy_at(x1) - spring.energy_at(x0)


def max_half_span(spring: TorsionSpringParams):
    """Largest half-span; the legs are then 180 degrees apart and the spring is rigid."""
    return spring.r_s
