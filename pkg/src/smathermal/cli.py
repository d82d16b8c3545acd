"""
Batch command-line front end.

    smathermal simulate paper-encapsulated.json --out runs/enc
    smathermal sweep paper-bare.json --grid paper --out runs/sweep
    smathermal budget paper-bare.json
    smathermal analyze track.csv --body-length 40.65

Each command writes a ``manifest.json`` next to its outputs. Outputs carry no
timestamps, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .actuator import build_network
from .analysis import DEFAULT_BODY_LENGTH_MM, estimate_speed, load_trajectory
from .config import (
    actuator_from_config,
    budget_from_config,
    drive_from_config,
    integrator_from_config,
    load_config,
    medium_from_config,
    resolve_config_path,
    sweep_from_config,
)
from .errors import SMAThermalError
from .power import (
    EnergyBudget,
    SweepGrid,
    instantaneous_power,
    load_current_trace,
    run_sweep,
    runtime_estimate,
    summarize_power,
    write_sweep_csv,
)
from .simulator import detect_transitions, integrate, write_trace_csv
from .thermal import ZERO_CELSIUS

OUT_ENV = "SMATHERMAL_OUT"

log = logging.getLogger("smathermal")


def _g(x: float) -> float:
    """Round to 9 significant digits for stable JSON output."""
    return float(f"{x:.9g}")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "smathermal-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(out: Path, command: str, configs: List[str], options: Dict) -> None:
    _write_json(out / "manifest.json", {
        "tool": "smathermal",
        "version": __version__,
        "command": command,
        "configs": configs,
        "options": options,
        "deterministic": True,
        "seed": None,
    })


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    spec = actuator_from_config(cfg)
    medium = medium_from_config(cfg)
    drive = drive_from_config(cfg)
    icfg = integrator_from_config(cfg, method=args.method, dt=args.dt, cycles=args.cycles)
    network = build_network(spec, medium)
    trace = integrate(network, drive, icfg)
    events = detect_transitions(trace, network.transition_temperature)

    out = _out_dir(args)
    rows = write_trace_csv(trace, out / "trace.csv")
    report = events.to_dict()
    report.update({
        "architecture": network.architecture,
        "medium": network.medium,
        "method": icfg.kind,
        "rows": rows,
        "peak_T_sma_C": _g(trace.t_sma.max() - ZERO_CELSIUS),
        "peak_T_air_C": None if trace.t_air is None else _g(trace.t_air.max() - ZERO_CELSIUS),
        "energy_in_J": _g(trace.energy_in),
        "energy_out_J": _g(trace.energy_out),
    })
    _write_json(out / "events.json", report)
    _manifest(out, "simulate", [str(resolve_config_path(args.config).name)],
              {"method": icfg.kind, "dt": icfg.dt, "sample_rate": icfg.sample_rate,
               "horizon_s": icfg.horizon_for(drive)})
    print(f"simulate: {rows} samples -> {out / 'trace.csv'}; "
          f"{len(events.up_times)} transition up-crossing(s)")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = actuator_from_config(cfg)
    medium = medium_from_config(cfg)
    drive = drive_from_config(cfg)
    icfg = integrator_from_config(cfg, method=args.method, dt=args.dt)
    opts = sweep_from_config(cfg)
    if args.grid == "paper":
        grid = SweepGrid.paper()
    else:
        grid = opts["grid"]
        if grid is None:
            raise SMAThermalError("--grid custom needs sweep.frequencies and sweep.duty_cycles in the config")
    window = args.window if args.window is not None else opts["window"]
    reps = args.repetitions if args.repetitions is not None else opts["repetitions"]
    summaries = run_sweep(spec, medium, grid, drive, icfg, window=window, repetitions=reps,
                          supply_side=opts["supply_side"], workers=args.workers)
    out = _out_dir(args)
    write_sweep_csv(summaries, out / "sweep.csv")
    _manifest(out, "sweep", [str(resolve_config_path(args.config).name)],
              {"grid": args.grid, "window_s": window, "repetitions": reps,
               "supply_side": opts["supply_side"], "method": icfg.kind,
               "sample_rate": icfg.sample_rate})
    print(f"sweep: {len(summaries)} configurations -> {out / 'sweep.csv'}")
    return 0


def budget_report(budget: EnergyBudget) -> Dict:
    runtime = runtime_estimate(budget)
    return {
        "capacity_mah": _g(budget.capacity_mah),
        "voltage_v": _g(budget.voltage),
        "usable_fraction": _g(budget.usable_fraction),
        "usable_energy_mwh": _g(budget.energy_j / 3.6),
        "loads_mw": {k: _g(v * 1e3) for k, v in budget.loads.items()},
        "total_load_mw": _g(budget.total_load * 1e3),
        "runtime_s": _g(runtime),
        "runtime_min": _g(runtime / 60.0),
    }


def cmd_budget(args) -> int:
    cfg = load_config(args.config)
    report = budget_report(budget_from_config(cfg))
    print(f"usable energy : {report['usable_energy_mwh']:.4g} mWh")
    for name, p in report["loads_mw"].items():
        print(f"  load {name:<16s}: {p:.4g} mW")
    print(f"total load    : {report['total_load_mw']:.4g} mW")
    print(f"runtime       : {report['runtime_min']:.1f} min ({report['runtime_s']:.6g} s)")
    if args.out or os.environ.get(OUT_ENV):
        out = _out_dir(args)
        _write_json(out / "budget.json", report)
        _manifest(out, "budget", [str(resolve_config_path(args.config).name)], {})
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    traj = load_trajectory(args.trajectory, body_length=args.body_length)
    speed = estimate_speed(traj, filter_window=args.window)
    report = speed.report()
    report["filter_window_s"] = _g(args.window)
    out = _out_dir(args)
    _write_json(out / "speed.json", report)
    _manifest(out, "analyze", [Path(args.trajectory).name],
              {"body_length_mm": args.body_length, "filter_window_s": args.window})
    print(f"analyze: avg {report['avg_speed_mm_s']:.4g} mm/s ({report['avg_speed_bl_s']:.2f} Bl/s), "
          f"max {report['max_speed_mm_s']:.4g} mm/s ({report['max_speed_bl_s']:.2f} Bl/s)")
    return 0


def cmd_power(args) -> int:
    cfg = load_config(args.config)
    drive = drive_from_config(cfg)
    trace = load_current_trace(args.trace, args.sidecar)
    p = instantaneous_power(trace)
    s = summarize_power(trace.time, p, drive, window=args.window, repetitions=args.repetitions)
    report = {k: _g(v) if isinstance(v, float) else v for k, v in s.to_dict().items()}
    out = _out_dir(args)
    _write_json(out / "power.json", report)
    _manifest(out, "power", [Path(args.trace).name, str(resolve_config_path(args.config).name)],
              {"window_s": args.window, "repetitions": args.repetitions})
    print(f"power: P_p {s.peak_power * 1e3:.6g} mW, P_a {s.average_power * 1e3:.6g} mW")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smathermal", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("config_pos", nargs="?", metavar="CONFIG",
                       help="JSON config path or bundled name (e.g. paper-bare.json)")
        p.add_argument("--config", dest="config_opt")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./smathermal-out)")

    def add_integrator(p):
        p.add_argument("--method", choices=["euler", "exact"])
        p.add_argument("--dt", type=float, help="Euler step size (s)")

    p = sub.add_parser("simulate", help="integrate one configuration, write trace + events")
    add_config(p)
    add_integrator(p)
    p.add_argument("--cycles", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="steady-state power over a (f, DC) grid")
    add_config(p)
    add_integrator(p)
    p.add_argument("--grid", choices=["paper", "custom"], default="paper")
    p.add_argument("--window", type=float, help="steady-state window per repetition (s)")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("budget", help="battery runtime estimate")
    add_config(p)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("analyze", help="speed statistics of a t_s,x_mm,y_mm trajectory")
    p.add_argument("trajectory")
    p.add_argument("--body-length", type=float, default=DEFAULT_BODY_LENGTH_MM, help="mm")
    p.add_argument("--window", type=float, default=1.0, help="moving-average window (s)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("power", help="P_p/P_a summary of a measured t_s,i_a current trace")
    add_config(p)
    p.add_argument("--trace", required=True)
    p.add_argument("--sidecar", help="JSON with reference_resistance (default: trace path .json)")
    p.add_argument("--window", type=float, default=30.0)
    p.add_argument("--repetitions", type=int, default=5)
    p.set_defaults(func=cmd_power)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "config_pos"):
        args.config = args.config_opt or args.config_pos
        if args.config is None:
            parser.error("a config file is required")
    try:
        return args.func(args)
    except (SMAThermalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
