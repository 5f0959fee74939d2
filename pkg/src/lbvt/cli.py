"""Command-line front end: config loading, single solves, sweeps, calibration.

Angles are degrees at this boundary (flags and config files) and radians
inside the library; the conversion happens exactly here. Exit codes: 0 on
success, 1 for validation or solver failures, 2 for usage errors. Diagnostics
go to stderr; data goes to the requested files or stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import analysis, equilibrium
from .model import (
    CalibrationError,
    ConfigError,
    GeometryError,
    MechanismConfig,
    validate_config,
)

_ANGLE_FIELDS = ("beta", "alpha_preload", "theta_min", "theta_max")
_ANGLE_LIST_FIELDS = ("phi", "joint_open_limit")
_NUMBER_FIELDS = (
    "l1", "l2", "l3", "actuator_attach_ratio", "l_offset", "beta",
    "alpha_preload", "k_spring", "spring_arm_length", "theta_min", "theta_max",
)
_LIST_FIELDS = ("segments", "phi", "joint_open_limit")
_INT_FIELDS = ("springs_per_joint", "branch_sign")
_ALL_FIELDS = (
    "l1", "l2", "l3", "actuator_base", "actuator_attach_ratio", "l_offset",
    "beta", "segments", "phi", "alpha_preload", "k_spring",
    "springs_per_joint", "spring_arm_length", "joint_open_limit",
    "theta_min", "theta_max", "branch_sign",
)
_OPTIONAL_KEYS = ("provenance",)


def _require_number(raw, path: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {type(raw).__name__}")
    return float(raw)


def _require_int(raw, path: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{path}: expected an integer, got {type(raw).__name__}")
    return raw


def _require_number_list(raw, path: str) -> list[float]:
    if not isinstance(raw, list):
        raise ConfigError(f"{path}: expected a list of numbers, got {type(raw).__name__}")
    return [_require_number(v, f"{path}[{i}]") for i, v in enumerate(raw)]


def load_config(path) -> MechanismConfig:
    """Parse and validate a config file; angle fields convert from degrees."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level value must be an object")

    unknown = sorted(set(doc) - set(_ALL_FIELDS) - set(_OPTIONAL_KEYS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys: {', '.join(unknown)}")
    missing = sorted(set(_ALL_FIELDS) - set(doc))
    if missing:
        raise ConfigError(f"{path}: missing fields: {', '.join(missing)}")

    fields: dict = {}
    for name in _NUMBER_FIELDS:
        fields[name] = _require_number(doc[name], name)
    for name in _INT_FIELDS:
        fields[name] = _require_int(doc[name], name)
    for name in _LIST_FIELDS:
        fields[name] = _require_number_list(doc[name], name)
    base = _require_number_list(doc["actuator_base"], "actuator_base")
    if len(base) != 2:
        raise ConfigError(f"actuator_base: expected exactly two coordinates, got {len(base)}")
    fields["actuator_base"] = tuple(base)

    for name in _ANGLE_FIELDS:
        fields[name] = math.radians(fields[name])
    for name in _ANGLE_LIST_FIELDS:
        fields[name] = [math.radians(v) for v in fields[name]]
    for name in _LIST_FIELDS:
        fields[name] = tuple(fields[name])

    config = MechanismConfig(**fields)
    violations = validate_config(config)
    if violations:
        raise ConfigError(
            f"{path}: invalid config:\n" + "\n".join(f"  - {v}" for v in violations)
        )
    return config


def save_config(config: MechanismConfig, path, provenance: dict | None = None) -> int:
    """Write a config file (degrees for angle fields); returns bytes written."""
    doc: dict = {}
    if provenance is not None:
        doc["provenance"] = provenance
    for name in _ALL_FIELDS:
        value = getattr(config, name)
        if name in _ANGLE_FIELDS:
            value = math.degrees(value)
        elif name in _ANGLE_LIST_FIELDS:
            value = [math.degrees(v) for v in value]
        elif isinstance(value, tuple):
            value = list(value)
        doc[name] = value
    payload = (json.dumps(doc, indent=2) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(payload)
    return len(payload)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lbvt",
        description="Quasi-static analysis of the load-based variable transmission knee.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config file, silent on success")
    p.add_argument("config", help="config JSON path")

    p = sub.add_parser("solve", help="single equilibrium solve, report on stdout")
    p.add_argument("config", help="config JSON path")
    p.add_argument("--theta", type=float, required=True, help="knee angle in degrees")
    p.add_argument("--force", type=float, required=True, help="actuator force in N")

    p = sub.add_parser("sweep-angle", help="torque across the flexion range, CSV out")
    p.add_argument("config", help="config JSON path")
    p.add_argument("--force", type=float, required=True, help="actuator force in N")
    p.add_argument("--from", dest="start", type=float, help="start knee angle in degrees")
    p.add_argument("--to", dest="stop", type=float, help="end knee angle in degrees")
    p.add_argument("--step", type=float, default=10.0, help="angle step in degrees")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--plot", help="optional SVG output path")

    for name, help_text in (
        ("trigger", "chain diameter against force (triggering study), CSV out"),
        ("sweep-force", "torque against force with rigid baseline, CSV out"),
        ("ratio", "transmission ratio against force, CSV out"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="config JSON path")
        p.add_argument("--theta", type=float, required=True, help="knee angle in degrees")
        p.add_argument("--from", dest="start", type=float,
                       default=0.0, help="start force in N")
        p.add_argument("--to", dest="stop", type=float,
                       default=50.0 if name == "trigger" else 200.0,
                       help="end force in N")
        p.add_argument("--step", type=float, default=0.5, help="force step in N")
        p.add_argument("--out", required=True, help="CSV output path")
        p.add_argument("--plot", help="optional SVG output path")

    p = sub.add_parser("calibrate", help="meet trigger and ratio-step targets, config out")
    p.add_argument("config", help="base config JSON path")
    p.add_argument("--trigger", type=float, required=True, help="target triggering force in N")
    p.add_argument("--ratio-step", type=float, required=True,
                   help="target fractional ratio increase, e.g. 0.40")
    p.add_argument("--theta", type=float, required=True, help="calibration knee angle in degrees")
    p.add_argument("--out", required=True, help="output config JSON path")
    return parser


def _print_solve_report(result, theta_deg: float, out) -> None:
    g = lambda v: format(v, ".9g")
    print(f"theta (deg):             {g(theta_deg)}", file=out)
    print(f"f_cyl (N):               {g(result.input_force)}", file=out)
    print(f"kfe_torque (Nm):         {g(result.kfe_torque)}", file=out)
    print(f"tip_force (N):           {g(result.tip_force)}", file=out)
    print(f"transmission_ratio (m):  {g(result.transmission_ratio)}", file=out)
    print(f"l4 (m):                  {g(result.chain.l4)}", file=out)
    print(f"diameter (m):            {g(result.chain.diameter)}", file=out)
    print(f"converged:               {'yes' if result.converged else 'no'}", file=out)
    print(f"residual (Nm):           {g(result.residual)}", file=out)
    print("joint  deflection (deg)  regime", file=out)
    for i, (d, r) in enumerate(zip(result.chain.deflection, result.chain.regime), start=1):
        print(f"{i:<6d} {format(math.degrees(d), '.9g'):<17s} {r.value}", file=out)


def _cmd_solve(args) -> int:
    config = load_config(args.config)
    result = equilibrium.solve_equilibrium(config, math.radians(args.theta), args.force)
    _print_solve_report(result, args.theta, sys.stdout)
    return 0 if result.converged else 1


_PLOT_COLUMNS = {
    "sweep-angle": ("theta (deg)", ("torque_lbvt (Nm)", "torque_rigid (Nm)")),
    "trigger": ("f_cyl (N)", ("diameter (m)",)),
    "sweep-force": ("f_cyl (N)", ("torque_lbvt (Nm)", "torque_rigid (Nm)")),
    "ratio": ("f_cyl (N)", ("ratio (m)", "ratio_rigid (m)")),
}


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.command == "sweep-angle":
        start = math.radians(args.start) if args.start is not None else config.theta_min
        stop = math.radians(args.stop) if args.stop is not None else config.theta_max
        table = analysis.sweep_torque_vs_angle(
            config, args.force, start, stop, math.radians(args.step)
        )
    else:
        theta = math.radians(args.theta)
        fn = {
            "trigger": analysis.sweep_trigger,
            "sweep-force": analysis.sweep_torque_vs_force,
            "ratio": analysis.sweep_ratio_vs_force,
        }[args.command]
        table = fn(config, theta, args.start, args.stop, args.step)
    analysis.emit_csv(table, args.out)
    if args.plot:
        x_col, y_cols = _PLOT_COLUMNS[args.command]
        analysis.emit_svg_plot(table, x_col, y_cols, args.plot)
    return 0


def _cmd_calibrate(args) -> int:
    config = load_config(args.config)
    calibrated = analysis.calibrate(
        config, args.trigger, args.ratio_step, math.radians(args.theta)
    )
    provenance = {
        "source": "calibrate",
        "targets": {
            "triggering_force_N": args.trigger,
            "ratio_step": args.ratio_step,
            "theta_deg": args.theta,
        },
        "tolerances": {
            "triggering_force_N": analysis.TRIGGER_TOL,
            "ratio_step": analysis.RATIO_STEP_TOL,
        },
    }
    save_config(calibrated, args.out, provenance=provenance)
    trig = equilibrium.triggering_force(calibrated, math.radians(args.theta))
    step = analysis.ratio_step_direct(calibrated, math.radians(args.theta))
    print(
        f"calibrated: triggering force {trig:.3f} N, ratio step {step:.4f}; "
        f"wrote {args.out}",
        file=sys.stderr,
    )
    return 0


def run(argv=None) -> int:
    """Dispatch one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            load_config(args.config)
            return 0
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        return _cmd_sweep(args)
    except (ConfigError, GeometryError, CalibrationError, ValueError, OSError) as exc:
        print(f"lbvt {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
