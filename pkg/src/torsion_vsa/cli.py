"""Command-line entry point.

``torsion-vsa <subcommand> [--config PATH] [--out DIR] [--seed N]``

Subcommands: spring-info, characterize, drop-solve, drop-sim, hop.  Without
``--config`` the packaged calibration is used.  Every run writes
``effective_config.json`` (the config after defaults are applied) next to its
artifacts and prints a JSON summary on stdout.  Failures print a JSON error
object on stdout and exit non-zero (2 for config errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import actuator as act
from . import experiments as ex
from .config import RunConfig, default_config, load_config
from .errors import ConfigError, VsaError
from .landing import sensitivity, solve_pretension
from .spring import sigma

SUBCOMMANDS = ("spring-info", "characterize", "drop-solve", "drop-sim", "hop")


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _spring_info(cfg: RunConfig, out: Path):
    vsa = cfg.vsa()
    ch = cfg.characterize
    probe = math.radians(ch.probe_theta_deg)
    rng = act.operating_range(vsa, probe, ch.gain_threshold)
    lim = vsa.limits
    info = {
        "kappa": vsa.spring.kappa,
        "r_s": vsa.spring.r_s,
        "small_extension_stiffness": vsa.spring.kappa / vsa.spring.r_s ** 2,
        "sigma_at_half_r_s": sigma(vsa.spring, 0.5 * vsa.spring.r_s),
        "x_i": vsa.x_i,
        "deflection_limits_rad": [lim.theta_min, lim.theta_max],
        "deflection_limits_deg": [math.degrees(lim.theta_min), math.degrees(lim.theta_max)],
        "tangent_stiffness_at_zero": act.tangent_stiffness(vsa, 0.0),
        "operating_range_m": [rng.lo, rng.hi],
        "probe_theta_deg": ch.probe_theta_deg,
        "gain_threshold": ch.gain_threshold,
    }
    _write_json(out / "spring_info.json", info)
    return info, []


def _characterize(cfg: RunConfig, out: Path):
    vsa = cfg.vsa()
    ch = cfg.characterize
    probe = math.radians(ch.probe_theta_deg)
    step_th = math.radians(ch.deflection_step_deg)
    surf_spec = ex.SweepSpec(
        ex.Swept.BOTH,
        ch.surface_lo,
        ch.surface_hi,
        ch.pretension_step,
        theta_hi=vsa.with_pretension(ch.surface_lo).limits.theta_max,
        theta_step=step_th,
    )
    files = []
    ex.torque_surface(vsa, surf_spec).to_csv(out / "torque_surface.csv")
    files.append("torque_surface.csv")
    ex.pretension_curve(vsa, probe, lo=ch.surface_lo, step=ch.pretension_step).to_csv(out / "pretension_curve.csv")
    files.append("pretension_curve.csv")
    for x, table in ex.deflection_curves(vsa, ch.deflection_pretensions, step_th).items():
        name = f"deflection_curve_{x:.4f}.csv"
        table.to_csv(out / name)
        files.append(name)
    rng = act.operating_range(vsa, probe, ch.gain_threshold)
    return {"operating_range_m": [rng.lo, rng.hi], "files": files}, []


def _drop_solve(cfg: RunConfig, out: Path):
    vsa, leg, sc, so = cfg.vsa(), cfg.leg_params(), cfg.drop_scenario(), cfg.solver
    kw = dict(x_range=so.x_range, energy_bound=so.energy_bound, torque_bound=so.torque_bound)
    sol = solve_pretension(sc, vsa, leg, so.weights, **kw)
    result = {
        "solution": sol.to_dict(),
        "calibration": {"m": leg.m, "L": leg.L, "r_p": vsa.r_p, "ground_offset": leg.ground_offset},
        "free_fall_m": sc.free_fall(leg),
        "sensitivity": sensitivity(sc, vsa, leg, so.weights, **kw),
    }
    _write_json(out / "drop_solution.json", result)
    return result, []


def _drop_sim(cfg: RunConfig, out: Path):
    vsa, leg, sc = cfg.vsa(), cfg.leg_params(), cfg.drop_scenario()
    params = cfg.sim_params(cfg.drop.sim)
    suite = ex.drop_suite(
        vsa, leg, sc, params, cfg.drop.x_i_values, cfg.drop.include_optimum, cfg.solver.weights
    )
    errors = []
    for run in suite.runs:
        tag = "optimum" if run.optimum else f"{run.x_i:.5f}"
        if run.trace is not None:
            run.trace.to_csv(out / f"drop_{tag}.csv")
        if run.classification is ex.DropClass.ERROR:
            errors.append(f"x_i={run.x_i}: {run.error}")
    suite.to_json(out / "drop_summary.json")
    return suite.summary(), errors


def _hop(cfg: RunConfig, out: Path):
    vsa, leg = cfg.vsa(), cfg.leg_params()
    traj = cfg.hop.trajectory.build()
    params = cfg.sim_params(cfg.hop.sim)
    runs = []
    for x in cfg.hop.x_i_values:
        trace, metrics = ex.hop_run(vsa, leg, traj, params, x)
        name = f"hop_{x:.5f}.csv"
        trace.to_csv(out / name)
        runs.append({"x_i": x, "file": name, **metrics.to_dict(), "events": trace.events})
    summary = {"trajectory": cfg.hop.trajectory.model_dump(mode="json"), "runs": runs}
    _write_json(out / "hop_summary.json", summary)
    return summary, []


_DISPATCH = {
    "spring-info": _spring_info,
    "characterize": _characterize,
    "drop-solve": _drop_solve,
    "drop-sim": _drop_sim,
    "hop": _hop,
}


def dispatch(subcommand: str, cfg: RunConfig, out_dir) -> int:
    """Run ``subcommand`` writing artifacts under ``out_dir``; returns the exit status."""
    if subcommand not in _DISPATCH:
        raise ConfigError(f"unknown subcommand {subcommand!r}; expected one of {', '.join(SUBCOMMANDS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "effective_config.json", cfg.effective_dict())
    summary, errors = _DISPATCH[subcommand](cfg, out)
    if errors:
        _emit({"status": "error", "subcommand": subcommand, "errors": errors, "result": summary})
        return 1
    _emit({"status": "ok", "subcommand": subcommand, "out": str(out), "result": summary})
    return 0


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, default=str) + "\n")


def build_parser():
    p = argparse.ArgumentParser(prog="torsion-vsa", description="Variable-stiffness leg actuator toolkit")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON run config (default: packaged calibration)")
    p.add_argument("--out", help="output directory (default: config output_dir or ./out)")
    p.add_argument("--seed", type=int, default=0, help="reserved; all computation is deterministic")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2 ** 64:
        _emit({"status": "error", "error": "ConfigError", "message": "--seed must be an unsigned 64-bit integer"})
        return 2
    try:
        cfg = load_config(args.config) if args.config else default_config()
    except ConfigError as exc:
        _emit({"status": "error", "error": "ConfigError", "message": str(exc)})
        return 2
    out = args.out or cfg.output_dir or "out"
    try:
        return dispatch(args.subcommand, cfg, out)
    except ConfigError as exc:
        _emit({"status": "error", "error": "ConfigError", "message": str(exc)})
        return 2
    except (VsaError, OSError) as exc:
        _emit({"status": "error", "error": type(exc).__name__, "message": str(exc), "subcommand": args.subcommand})
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
