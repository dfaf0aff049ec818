"""Drop landing analysis: energy capture, rest-pose torque balance and the pretension solver.

A leg dropped from rest lands and comes to rest at height ``h_g``.  The
motor holds the landing angle ``theta_i``, so the joint deflection at rest is
fixed by geometry, ``theta_d = theta_i - theta_of(h_g)``.  Two conditions
then constrain the single unknown pretension ``x_i``:

* energy capture: the springs store the full drop energy ``m*g*h_drop``
  when deflected by ``theta_d``;
* torque balance: the spring torque at ``theta_d`` holds the leg against
  gravity at the rest pose.

Generically no pretension meets both, so :func:`solve_pretension` minimises a
weighted sum of the squared, normalised residuals and reports both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import actuator as act
from .actuator import VsaConfig
from .errors import AmbiguousRootError, DomainError, InfeasibleError, LimitError, NoRootError
from .leg_kinematics import HALF_PI, LegParams, gravity_load_torque, height_of, theta_of


@dataclass(frozen=True)
class DropScenario:
    """Rest height ``h_g`` (m), total drop ``h_drop`` (m) and landing angle ``theta_i`` (rad)."""

    h_g: float
    h_drop: float
    theta_i: float

    def __post_init__(self):
        if not self.h_g > 0:
            raise DomainError(f"h_g must be positive, got {self.h_g!r}")
        if not self.h_drop > 0:
            raise DomainError(f"h_drop must be positive, got {self.h_drop!r}")
        if not 0 < self.theta_i < HALF_PI:
            raise DomainError(f"theta_i={self.theta_i!r} rad outside (0, pi/2)")

    def rest_angle(self, leg: LegParams) -> float:
        return theta_of(leg, self.h_g)

    def rest_deflection(self, leg: LegParams) -> float:
        """Joint deflection at rest fixed by the geometry."""
        theta_d = self.theta_i - self.rest_angle(leg)
        if not theta_d > 0:
            raise DomainError(
                f"rest height {self.h_g} m is not below the landing pose of theta_i={self.theta_i} rad"
            )
        return theta_d

    def free_fall(self, leg: LegParams) -> float:
        """Height the hip falls before the foot touches, ``h1``."""
        return self.h_g + self.h_drop - height_of(leg, self.theta_i)


@dataclass(frozen=True)
class DropSolution:
    """Pretension solve result.

    Residuals are signed: ``energy_residual = captured - m*g*h_drop`` (J) and
    ``torque_residual = spring torque - gravity load`` (N*m) at ``theta_d``.
    """

    x_i: float
    theta_d: float
    x_c: float
    energy_residual: float
    torque_residual: float
    theta_f: float
    objective: float
    weights: Tuple[float, float]

    def to_dict(self):
        return {
            "x_i": self.x_i,
            "theta_d": self.theta_d,
            "theta_d_deg": math.degrees(self.theta_d),
            "x_c": self.x_c,
            "energy_residual": self.energy_residual,
            "torque_residual": self.torque_residual,
            "theta_f": self.theta_f,
            "theta_f_deg": math.degrees(self.theta_f),
            "objective": self.objective,
            "weights": {"energy": self.weights[0], "torque": self.weights[1]},
        }


def drop_energy(leg: LegParams, h_drop: float) -> float:
    """Potential energy released by a drop of ``h_drop``, J."""
    if not h_drop >= 0:
        raise DomainError(f"h_drop must be non-negative, got {h_drop!r}")
    return leg.m * leg.g * h_drop


def captured_energy(cfg: VsaConfig, x_c: float) -> float:
    """Net energy stored by the pair when one spring extends and the other contracts by ``x_c``.

    This is the joint work ``integral(tau, 0, x_c/r_p)``.  Raises LimitError
    when the deflection leaves the admissible interval (bottom-out).
    """
    return act.potential_energy(cfg, x_c / cfg.r_p)


def _balance(cfg, leg, theta_i):
    def f(delta):
        return act.joint_torque(cfg, delta) - gravity_load_torque(leg, theta_i - delta)

    return f


def equilibrium_deflection(
    cfg: VsaConfig, leg: LegParams, theta_i: float, n: int = 400, tol: float = 1e-9
) -> float:
    """Deflection at which the spring holds the leg with the motor at ``theta_i``.

    The residual ``joint_torque(d) - gravity_load_torque(theta_i - d)`` is
    scanned over the admissible deflections and each sign change refined with
    Brent's method to ``|residual| <= tol``.

    Raises:
        NoRootError: the springs cannot hold the load (the leg collapses).
        AmbiguousRootError: several rest poses exist; ``.roots`` lists them.
    """
    if not 0 < theta_i < HALF_PI:
        raise DomainError(f"theta_i={theta_i!r} rad outside (0, pi/2)")
    f = _balance(cfg, leg, theta_i)
    if f(0.0) == 0.0:
        return 0.0
    hi = min(cfg.limits.theta_max, theta_i * (1.0 - 1e-9))
    ds = np.linspace(0.0, hi, n + 1)
    vals = [f(float(d)) for d in ds]
    roots = []
    for a, b, fa, fb in zip(ds[:-1], ds[1:], vals[:-1], vals[1:]):
        if fb == 0.0:
            roots.append(float(b))
        elif fa * fb < 0:
            roots.append(brentq(f, float(a), float(b), xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if not roots:
        raise NoRootError(
            f"spring torque never balances gravity for deflections in [0, {hi:.6g}] rad; the leg collapses"
        )
    if len(roots) > 1:
        raise AmbiguousRootError(f"{len(roots)} rest deflections found", roots)
    root = roots[0]
    res = abs(f(root))
    if res > tol:
        raise NoRootError(f"balance residual {res:.3g} N*m at root exceeds tolerance {tol:g}")
    return root


def _residuals(cfg, leg, scenario, theta_d, theta_f, x_i):
    c = cfg.with_pretension(x_i)
    e = captured_energy(c, cfg.r_p * theta_d) - drop_energy(leg, scenario.h_drop)
    t = act.joint_torque(c, theta_d) - gravity_load_torque(leg, theta_f)
    return e, t


def default_pretension_range(cfg: VsaConfig, theta_d: float):
    """Operating range intersected with the pretensions admitting ``theta_d``."""
    op = act.operating_range(cfg)
    fe = act.feasible_pretensions(cfg, theta_d)
    lo, hi = max(op.lo, fe.lo), min(op.hi, fe.hi)
    if not hi > lo:
        raise InfeasibleError(
            f"operating range [{op.lo:.6g}, {op.hi:.6g}] m admits no pretension for deflection {theta_d:.6g} rad"
        )
    return lo, hi


def solve_pretension(
    scenario: DropScenario,
    cfg: VsaConfig,
    leg: LegParams,
    weights=(1.0, 1.0),
    x_range: Optional[Tuple[float, float]] = None,
    n_scan: int = 401,
    energy_bound: float = 1.0,
    torque_bound: float = 1.0,
) -> DropSolution:
    """Pretension minimising ``w_E*(e/(m*g*h_drop))**2 + w_tau*(t/(m*g*L))**2``.

    ``cfg.x_i`` is ignored; candidates come from ``x_range`` (default: the
    operating range restricted to pretensions admitting the rest deflection).
    After a scan, the best cell is refined to better than 1e-10 m: by Brent
    root finding when a single residual is targeted and it changes sign,
    otherwise by bounded scalar minimisation.

    ``energy_bound``/``torque_bound`` cap the normalised residuals that carry
    non-zero weight; exceeding either raises InfeasibleError.
    """
    w_e, w_t = (float(w) for w in weights)
    if w_e < 0 or w_t < 0 or not (w_e > 0 or w_t > 0):
        raise DomainError("weights must be non-negative and not both zero")
    theta_d = scenario.rest_deflection(leg)
    theta_f = scenario.theta_i - theta_d
    x_c = cfg.r_p * theta_d
    if x_range is None:
        lo, hi = default_pretension_range(cfg, theta_d)
    else:
        lo, hi = (float(v) for v in x_range)
        fe = act.feasible_pretensions(cfg, theta_d)
        lo, hi = max(lo, fe.lo), min(hi, fe.hi)
        if not hi > lo:
            raise InfeasibleError(f"no pretension in the requested range admits deflection {theta_d:.6g} rad")

    e_scale = drop_energy(leg, scenario.h_drop)
    t_scale = leg.m * leg.g * leg.L if leg.g > 0 else leg.m * leg.L
    if e_scale == 0:
        e_scale = 1.0

    def residuals(x):
        return _residuals(cfg, leg, scenario, theta_d, theta_f, x)

    def objective(x):
        e, t = residuals(x)
        return w_e * (e / e_scale) ** 2 + w_t * (t / t_scale) ** 2

    xs = np.linspace(lo, hi, n_scan)
    js = np.array([objective(float(x)) for x in xs])
    k = int(np.argmin(js))
    a, b = float(xs[max(k - 1, 0)]), float(xs[min(k + 1, n_scan - 1)])

    x_best = None
    if w_e == 0 or w_t == 0:
        idx = 1 if w_e == 0 else 0

        def single(x):
            return residuals(x)[idx]

        for p, q in ((a, float(xs[k])), (float(xs[k]), b)):
            fp, fq = single(p), single(q)
            if fp == 0:
                x_best = p
            elif fq == 0:
                x_best = q
            elif fp * fq < 0:
                x_best = brentq(single, p, q, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            if x_best is not None:
                break
    if x_best is None:
        res = minimize_scalar(objective, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        x_best = float(res.x) if res.fun <= js[k] else float(xs[k])

    e, t = residuals(x_best)
    sol = DropSolution(
        x_i=float(x_best),
        theta_d=theta_d,
        x_c=x_c,
        energy_residual=float(e),
        torque_residual=float(t),
        theta_f=theta_f,
        objective=float(objective(x_best)),
        weights=(w_e, w_t),
    )
    if (w_e > 0 and abs(e / e_scale) > energy_bound) or (w_t > 0 and abs(t / t_scale) > torque_bound):
        raise InfeasibleError(
            f"best pretension {x_best:.6g} m leaves normalised residuals "
            f"energy={e / e_scale:.3g}, torque={t / t_scale:.3g} above the acceptance bounds"
        )
    return sol


def sensitivity(
    scenario: DropScenario,
    cfg: VsaConfig,
    leg: LegParams,
    weights=(1.0, 1.0),
    rel_step: float = 1e-3,
    **solve_kwargs,
):
    """Central-difference sensitivities of the solved pretension, ``dx_i/dm`` (m/kg) and ``dx_i/dL`` (m/m)."""
    from dataclasses import replace

    def x_of(**changes):
        return solve_pretension(scenario, cfg, replace(leg, **changes), weights, **solve_kwargs).x_i

    hm = rel_step * leg.m
    hl = rel_step * leg.L
    try:
        dm = (x_of(m=leg.m + hm) - x_of(m=leg.m - hm)) / (2 * hm)
        dl = (x_of(L=leg.L + hl) - x_of(L=leg.L - hl)) / (2 * hl)
    except (LimitError, DomainError) as exc:
        raise InfeasibleError(f"sensitivity perturbation left the feasible region: {exc}") from exc
    return {"dx_i_dm": dm, "dx_i_dL": dl}
