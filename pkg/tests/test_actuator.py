import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torsion_vsa import actuator as act
from torsion_vsa.actuator import BeltState, VsaConfig
from torsion_vsa.errors import DomainError, EmptyRangeError, LimitError
from torsion_vsa.spring import LinearSpringParams, SpanConvention, TorsionSpringParams, axial_force

SP = TorsionSpringParams(0.5, 0.05)


def make(x_i=0.075, **kw):
    kw.setdefault("belt_min_tension", 0.0)
    kw.setdefault("belt_max_tension", 1e12)
    return VsaConfig(SP, kw.pop("r_p", 0.05), x_i, **kw)


def test_config_rules():
    with pytest.raises(DomainError, match="r_p >= r_s"):
        VsaConfig(SP, 0.04, 0.075)
    for x in (0.0, 0.1, 0.12):
        with pytest.raises(DomainError, match="0 < x_i < 2\\*r_s"):
            VsaConfig(SP, 0.05, x)
    with pytest.raises(DomainError):
        VsaConfig(SP, 0.05, 0.075, belt_min_tension=5, belt_max_tension=5)


def test_joint_torque_reference_value():
    cfg = make()
    expected = 0.05 * (axial_force(SP, 0.04) - axial_force(SP, 0.035))
    assert act.joint_torque(cfg, 0.1) == pytest.approx(expected, rel=1e-14)
    assert act.joint_torque(cfg, 0.1) == pytest.approx(0.2299, abs=1e-4)
    assert act.joint_torque(cfg, -0.1) == -act.joint_torque(cfg, 0.1)
    assert act.joint_torque(cfg, 0.0) == 0.0


def test_tangent_stiffness_reference():
    cfg = make()
    # chain rule at theta=0: 2 * r_p**2 * F'(x_i/2) / 2
    expected = 0.05 ** 2 * SP.axial_force_derivative(0.0375)
    assert act.tangent_stiffness(cfg, 0.0) == pytest.approx(expected, rel=1e-14)
    h = 1e-6
    fd = (act.joint_torque(cfg, h) - act.joint_torque(cfg, -h)) / (2 * h)
    assert act.tangent_stiffness(cfg, 0.0) == pytest.approx(fd, rel=1e-6)


def test_stiffness_higher_near_full_pretension():
    assert act.tangent_stiffness(make(0.098), 0.0) > act.tangent_stiffness(make(0.06), 0.0)


def test_stiffness_increasing_in_pretension():
    ks = [act.tangent_stiffness(make(x), 0.0) for x in np.linspace(0.06, 0.095, 71)]
    assert all(b > a for a, b in zip(ks, ks[1:]))


@pytest.mark.parametrize(
    "x_i,theta_max", [(0.05, 1.0), (0.099, 0.02)]
)
def test_deflection_limits_by_hand(x_i, theta_max):
    lim = act.deflection_limits(make(x_i, margin=0.0))
    assert lim.theta_max == pytest.approx(theta_max, rel=1e-12)
    assert lim.theta_min == -lim.theta_max


def test_deflection_limits_are_the_error_boundary():
    for x in np.linspace(0.01, 0.099, 25):
        cfg = make(float(x))
        t = cfg.limits.theta_max
        act.joint_torque(cfg, t - 1e-9)
        act.joint_torque(cfg, -(t - 1e-9))
        with pytest.raises(LimitError):
            act.joint_torque(cfg, t + 1e-9)
        with pytest.raises(LimitError):
            act.joint_torque(cfg, -t - 1e-9)


def test_margin_zero_limit_is_a_limit_error():
    cfg = make(0.099, margin=0.0)
    with pytest.raises(LimitError):
        act.joint_torque(cfg, cfg.limits.theta_max)


def test_potential_energy_is_torque_integral():
    from scipy.integrate import quad

    cfg = make()
    for th in (0.05, 0.2, 0.4):
        q, _ = quad(lambda t: act.joint_torque(cfg, t), 0.0, th, epsabs=0, epsrel=1e-13)
        assert act.potential_energy(cfg, th) == pytest.approx(q, rel=1e-10)


def test_linear_sea_torque():
    assert act.linear_sea_torque(200, 0.05, 0.1) == pytest.approx(0.1, rel=1e-14)
    assert act.linear_sea_torque(200, 0.05, 0.0) == 0.0
    with pytest.raises(DomainError):
        act.linear_sea_torque(0, 0.05, 0.1)


def test_linear_spring_substitution_is_pretension_invariant():
    k = 200.0
    for x_i in (0.02, 0.075, 0.3, 5.0):
        cfg = VsaConfig(LinearSpringParams(k), 0.05, x_i, belt_min_tension=0, belt_max_tension=1e12)
        for th in (-0.3, 0.01, 0.1, 0.3):
            assert act.joint_torque(cfg, th) == pytest.approx(act.linear_sea_torque(k, 0.05, th), rel=1e-12)


def test_belt_states():
    cfg = act.VsaConfig(SP, 0.05, 0.03, belt_min_tension=0.5, belt_max_tension=20.0)
    assert act.belt_state(cfg, 0.0) is BeltState.ENGAGED
    # contracting span driven to zero
    assert act.belt_state(cfg, 0.6) is BeltState.SKIP_SLACK
    assert act.belt_state(cfg, -0.6) is BeltState.SKIP_SLACK
    hi = act.VsaConfig(SP, 0.05, 0.09, belt_min_tension=0.5, belt_max_tension=20.0)
    assert act.belt_state(hi, 0.1) is BeltState.SKIP_OVERLOAD
    assert act.belt_state(hi, 0.3) is BeltState.SKIP_OVERLOAD  # beyond the cap: classified, no raise
    assert act.belt_state(hi, 5.0) is BeltState.SKIP_SLACK  # slack is checked first
    free = act.VsaConfig(SP, 0.05, 0.075, belt_min_tension=0.0, belt_max_tension=math.inf)
    assert act.belt_state(free, 0.0) is BeltState.ENGAGED


def test_feasible_pretensions():
    fe = act.feasible_pretensions(make(), math.radians(15))
    d = 0.05 * math.radians(15)
    assert fe.lo == pytest.approx(d, abs=1e-5)
    assert fe.hi == pytest.approx(0.1 - d, abs=1e-5)
    with pytest.raises(EmptyRangeError):
        act.feasible_pretensions(make(), 1.2)


def test_operating_range_reference():
    rng = act.operating_range(make())
    assert 0.058 <= rng.lo <= 0.062
    assert 0.084 <= rng.hi <= 0.088


def test_operating_range_invariant_to_kappa():
    a = act.operating_range(make())
    b = act.operating_range(VsaConfig(TorsionSpringParams(1.0, 0.05), 0.05, 0.075))
    assert b.lo == pytest.approx(a.lo, abs=1e-9)
    assert b.hi == pytest.approx(a.hi, abs=1e-12)


def test_operating_range_widens_as_threshold_drops():
    fe = act.feasible_pretensions(make(), math.radians(15))
    near_one = act.operating_range(make(), gain_threshold=1.0001)
    assert near_one.lo < act.operating_range(make()).lo
    assert near_one.lo - fe.lo < 1e-3
    with pytest.raises(DomainError):
        act.operating_range(make(), gain_threshold=1.0)
    with pytest.raises(EmptyRangeError):
        act.operating_range(make(), gain_threshold=1e9)


def test_full_length_convention_leaves_domain():
    cfg = VsaConfig(SP, 0.05, 0.075, convention=SpanConvention.FULL_LENGTH)
    with pytest.raises(LimitError):
        cfg.limits
    small = VsaConfig(SP, 0.05, 0.02, convention=SpanConvention.FULL_LENGTH)
    assert small.limits.theta_max == pytest.approx((0.02 - 1e-6) / 0.05)


xis = st.floats(0.005, 0.099)
fracs = st.floats(-0.999, 0.999)


@settings(max_examples=300, deadline=None)
@given(xis, fracs)
def test_torque_odd_and_monotone(x_i, frac):
    cfg = make(x_i)
    th = frac * cfg.limits.theta_max
    assert act.joint_torque(cfg, -th) == -act.joint_torque(cfg, th)
    assert act.tangent_stiffness(cfg, th) > 0
    assert act.tangent_stiffness(cfg, th) == pytest.approx(act.tangent_stiffness(cfg, -th), rel=1e-12)
    # restoring: torque has the sign of the deflection
    assert act.joint_torque(cfg, th) * th >= 0


@settings(max_examples=200, deadline=None)
@given(xis, st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_torque_strictly_increasing(x_i, a, b):
    cfg = make(x_i)
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    t = cfg.limits.theta_max
    assert act.joint_torque(cfg, lo * t) < act.joint_torque(cfg, hi * t)


@settings(max_examples=200, deadline=None)
@given(xis, st.floats(0.05, 0.95), st.sampled_from([-1.0, 1.0]))
def test_belt_state_never_raises(x_i, frac, sign):
    cfg = VsaConfig(SP, 0.05, x_i, belt_min_tension=0.5, belt_max_tension=30.0)
    st_ = act.belt_state(cfg, sign * frac * 10)
    assert isinstance(st_, BeltState)
