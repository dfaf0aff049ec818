import json
import math

import numpy as np
import pytest

from torsion_vsa import actuator as act
from torsion_vsa import experiments as ex
from torsion_vsa.actuator import VsaConfig
from torsion_vsa.errors import DomainError
from torsion_vsa.hop_sim import MotorTrajectory, SimParams, SimTrace, TrajectoryKind
from torsion_vsa.landing import DropScenario
from torsion_vsa.leg_kinematics import LegParams
from torsion_vsa.spring import TorsionSpringParams

SP = TorsionSpringParams(0.5, 0.05)
PROBE = math.radians(15)


def _tau_hand(x_i, theta, kappa=0.5, r_s=0.05, r_p=0.05):
    """Closed-form joint torque written out independently of the package."""

    def force(x):
        return kappa * math.asin(x / r_s) / math.sqrt(r_s * r_s - x * x)

    return r_p * (force(0.5 * (x_i + r_p * theta)) - force(0.5 * (x_i - r_p * theta)))


def test_sweep_axis_includes_endpoints():
    spec = ex.SweepSpec(ex.Swept.PRETENSION, 0.035, 0.0825, 5e-4, fixed=PROBE)
    ax = spec.axis()
    assert len(ax) == 96
    assert ax[0] == 0.035 and ax[-1] == pytest.approx(0.0825, abs=1e-15)
    grid = ex.SweepSpec(ex.Swept.BOTH, 0.06, 0.07, 0.005, theta_hi=math.radians(2), theta_step=math.radians(0.5))
    th = grid.theta_axis()
    assert len(th) == 9 and th[4] == 0.0
    assert np.allclose(th, -th[::-1], atol=0)


@pytest.mark.parametrize(
    "kw",
    [
        dict(swept=ex.Swept.PRETENSION, lo=0.05, hi=0.04, step=1e-3, fixed=0.1),
        dict(swept=ex.Swept.PRETENSION, lo=0.04, hi=0.05, step=0.0, fixed=0.1),
        dict(swept=ex.Swept.DEFLECTION, lo=0.0, hi=0.1, step=0.01),
        dict(swept=ex.Swept.BOTH, lo=0.04, hi=0.05, step=1e-3),
    ],
)
def test_sweep_validation(kw):
    with pytest.raises(DomainError):
        ex.SweepSpec(**kw)


def test_torque_surface_matches_closed_form_and_marks_infeasible():
    cfg = VsaConfig(SP, 0.05, 0.075)
    spec = ex.SweepSpec(ex.Swept.BOTH, 0.035, 0.0825, 2.5e-3, theta_hi=math.radians(40), theta_step=math.radians(2))
    tab = ex.torque_surface(cfg, spec)
    nx, nt = len(spec.axis()), len(spec.theta_axis())
    assert len(tab) == nx * nt
    # pretension-major ordering
    assert np.all(tab.data["x_i"][:nt] == spec.axis()[0])
    for x, th, tau in zip(tab.data["x_i"], tab.data["theta"], tab.data["tau"]):
        lim = act.deflection_limits(cfg.with_pretension(float(x)))
        if lim.contains(float(th)):
            assert tau == pytest.approx(_tau_hand(x, th), rel=1e-12, abs=1e-15)
        else:
            assert math.isnan(tau)
    assert np.isnan(tab.data["tau"]).any() and np.isfinite(tab.data["tau"]).any()
    with pytest.raises(DomainError):
        ex.torque_surface(cfg, ex.SweepSpec(ex.Swept.PRETENSION, 0.04, 0.05, 1e-3, fixed=0.1))


def test_pretension_curve_monotone_and_ratios():
    cfg = VsaConfig(SP, 0.05, 0.075)
    tab = ex.pretension_curve(cfg, PROBE)
    tau = tab.data["tau"]
    assert np.all(np.isfinite(tau))
    assert np.all(np.diff(tau) > 0)
    assert tab.data["x_i"][-1] <= act.feasible_pretensions(cfg, PROBE).hi
    low = _tau_hand(0.06, PROBE) / _tau_hand(0.035, PROBE)
    high = _tau_hand(0.086, PROBE) / _tau_hand(0.06, PROBE)
    t = lambda x: act.joint_torque(cfg.with_pretension(x), PROBE)
    assert t(0.06) / t(0.035) == pytest.approx(low, rel=1e-12)
    assert low == pytest.approx(1.874, abs=1e-3)
    # the torque grows slowly at low pretension and sharply near the limit
    assert t(0.086) / t(0.06) == pytest.approx(high, rel=1e-12)
    assert high > 5 * low


def test_deflection_curves_odd_monotone_ordered():
    cfg = VsaConfig(SP, 0.05, 0.075)
    curves = ex.deflection_curves(cfg)
    assert sorted(curves) == list(ex.DEFLECTION_PRETENSIONS)
    for x, tab in curves.items():
        th, tau = tab.data["theta"], tab.data["tau"]
        lim = act.deflection_limits(cfg.with_pretension(x))
        assert th.max() <= lim.theta_max and th.min() >= lim.theta_min
        assert np.all(np.diff(tau) > 0)
        assert np.allclose(tau, -tau[::-1], rtol=1e-12, atol=1e-15)
    # stiffer with pretension at every common deflection
    common = curves[0.085].data["theta"]
    lo = dict(zip(curves[0.065].data["theta"], curves[0.065].data["tau"]))
    for th, tau in zip(common, curves[0.085].data["tau"]):
        if th > 0 and th in lo:
            assert tau > lo[th]


def test_table_csv_round_trip(tmp_path):
    tab = ex.Table(["a", "b"], {"a": np.array([0.1, 0.2]), "b": np.array([np.nan, 1 / 3])})
    p = tmp_path / "t.csv"
    tab.to_csv(p)
    back = np.genfromtxt(p, delimiter=",", names=True)
    assert back["a"].tolist() == [0.1, 0.2]
    assert math.isnan(back["b"][0]) and back["b"][1] == 1 / 3
    assert tab.to_csv().splitlines()[0] == "a,b"


def _trace(h, events, dt=0.01):
    t = np.arange(len(h)) * dt
    z = np.zeros_like(t)
    return SimTrace(t, z, z, z, np.asarray(h, float), z, z, ["engaged"] * len(t), z, z, events=events)


SC = DropScenario(0.3, 0.1, math.radians(35))
TD = {"t": 0.0, "kind": "touchdown"}


@pytest.mark.parametrize(
    "h,events,expected",
    [
        ([0.30] * 100, [TD], ex.DropClass.OSCILLATION_LESS),
        ([0.30] * 100, [TD, {"t": 0.1, "kind": "skip_overload", "slip": -0.2}], ex.DropClass.BELT_SKIP),
        ([0.32] * 100, [TD], ex.DropClass.SETTLES_HIGH),
        ([0.28] * 100, [TD], ex.DropClass.SETTLES_LOW),
        ([0.28] * 20 + [0.31] * 20 + [0.30] * 60, [TD], ex.DropClass.OSCILLATING),
    ],
)
def test_classification_rules(h, events, expected):
    assert ex.classify_drop(_trace(h, events), SC).classification is expected


def test_run_drop_reports_collapse_without_raising(run_config):
    leg, sc = run_config.leg_params(), run_config.drop_scenario()
    params = SimParams(dt=2e-4, duration=0.8, viscous_damping=0.6, slip_angle=0.2)
    run = ex.run_drop(run_config.vsa(), leg, sc, params, 0.03)
    assert run.classification is ex.DropClass.COLLAPSE
    assert run.events[-1]["kind"] == "bottom_out"
    d = run.to_dict()
    assert d["settle_height_m"] is None and d["classification"] == "collapse"


def test_drop_suite_marks_optimum_and_serialises(run_config):
    leg, sc = run_config.leg_params(), run_config.drop_scenario()
    params = SimParams(dt=5e-4, duration=0.3, viscous_damping=0.6, slip_angle=0.2)
    suite = ex.drop_suite(run_config.vsa(), leg, sc, params, x_values=(0.076,))
    assert [r.optimum for r in suite.runs] == [False, True]
    assert suite.runs[1].x_i == pytest.approx(suite.solution["x_i"])
    doc = json.loads(suite.to_json())
    assert [r["optimum"] for r in doc["runs"]] == [False, True]
    assert doc["scenario"]["h_g"] == sc.h_g


def test_tracking_metrics_hand_computed():
    leg = LegParams(0.1, 0.5, ground_offset=0.2)
    traj = MotorTrajectory(TrajectoryKind.SINE, 0.1, 1.0, 1.0)
    t = np.linspace(0, 1, 101)
    target = leg.ground_offset + 2 * leg.L * np.sin([traj.angle(float(x)) for x in t])
    tr = _trace(target - 0.001, [{"t": 0.5, "kind": "liftoff"}])
    tr.t = t
    m = ex.tracking_metrics(leg, tr, traj)
    assert m.sag == pytest.approx(-0.001, abs=1e-15)
    assert m.rms_error == pytest.approx(0.001, abs=1e-15)
    assert m.overshoot == pytest.approx(-0.001, abs=1e-15)
    assert m.constant_sign and m.liftoffs == 1 and m.skips == 0
