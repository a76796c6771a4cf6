"""Command line front end: simulate, sweep, validate-trace."""

import argparse
import csv
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .core import TECH_LTE, TECH_MMWAVE
from .config import ConfigError, SimConfig, config_hash, load_config, parse_override
from .engine import run_campaign, sweep, summary_rows
from .metrics import SummaryRow, write_summary_csv
from .mobility import TraceFormatError, parse_trace
from . import plotting

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

_FIGURES = ("fig2", "fig3", "fig5", "fig6", "fig7")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2nsim",
        description="Monte Carlo simulator for LTE and mmWave vehicle-to-network links.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="root RNG seed")
        p.add_argument("--drops", type=int, help="Monte Carlo drops per campaign")
        p.add_argument("--out-dir", default="outputs", metavar="PATH",
                       help="directory for CSV, SVG and manifest files")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--workers", type=int,
                       help="worker processes (default: V2N_WORKERS or 1)")

    p_sim = sub.add_parser("simulate", help="run one campaign and write summary.csv")
    common(p_sim)
    p_sim.add_argument("--emit-timeseries", action="store_true",
                       help="also write the first drop's per-step series")

    p_sweep = sub.add_parser("sweep", help="run a parameter grid and plot the results")
    common(p_sweep)
    p_sweep.add_argument("--figure", metavar="NAME",
                         help=f"preset grid, one of: {', '.join(_FIGURES)}")

    p_val = sub.add_parser("validate-trace", help="check a mobility trace file")
    p_val.add_argument("trace", metavar="PATH")
    return parser


def _load(args, extra=None) -> SimConfig:
    overrides = {}
    for item in args.set:
        key, value = parse_override(item)
        overrides[key] = value
    if args.seed is not None:
        overrides["root_seed"] = args.seed
    if args.drops is not None:
        overrides["n_drops"] = args.drops
    if args.workers is not None:
        overrides["workers"] = args.workers
    elif "workers" not in overrides and "V2N_WORKERS" in os.environ:
        raw = os.environ["V2N_WORKERS"]
        try:
            overrides["workers"] = int(raw)
        except ValueError:
            raise ConfigError(f"V2N_WORKERS must be an integer, got {raw!r}") from None
    if extra:
        overrides.update(extra)
    return load_config(args.config, overrides)


def _write_manifest(out_dir, config, outputs, started_at) -> None:
    manifest = {
        "version": __version__,
        "config_hash": config_hash(config),
        "root_seed": config.root_seed,
        "outputs": sorted(outputs),
        "wall_clock_s": round(time.time() - started_at, 3),
    }
    final = os.path.join(out_dir, "manifest.json")
    tmp = final + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, final)


def _write_timeseries(path, series) -> None:
    """series: iterable of (tech_label, t, serving, snr_db, rate_bps, lost)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_s", "tech", "serving_rsu", "snr_db", "rate_bps",
                         "lost_alignment"])
        for label, t, serving, snr_db, rate, lost in series:
            for k in range(len(t)):
                sid = int(serving[k])
                writer.writerow([
                    repr(float(t[k])), label, sid if sid >= 0 else "",
                    repr(float(snr_db[k])), repr(float(rate[k])),
                    int(bool(lost[k])),
                ])


def _drop_series(drop, tech):
    t = drop.dt_s * np.arange(len(drop.lte_rate_bps))
    if tech == TECH_LTE:
        zeros = [False] * len(drop.lte_rate_bps)
        return t, drop.lte_serving, drop.lte_snr_db, drop.lte_rate_bps, zeros
    return t, drop.mmw_serving, drop.mmw_snr_db, drop.mmw_rate_bps, drop.mmw_lost


def cmd_simulate(args) -> int:
    started = time.time()
    config = _load(args, {"emit_timeseries": True} if args.emit_timeseries else None)
    os.makedirs(args.out_dir, exist_ok=True)
    campaign = run_campaign(config)
    rows = [
        SummaryRow(TECH_MMWAVE, config.lambda_mmw, config.vehicle_elements,
                   config.rsu_elements, config.t_tr_s, campaign.mmw),
        SummaryRow(TECH_LTE, 0.0, 1, 1, 0.0, campaign.lte),
    ]
    outputs = ["summary.csv"]
    write_summary_csv(rows, os.path.join(args.out_dir, "summary.csv"))
    if config.emit_timeseries:
        drop = campaign.drops[0]
        series = [(TECH_LTE, *_drop_series(drop, TECH_LTE)),
                  (TECH_MMWAVE, *_drop_series(drop, TECH_MMWAVE))]
        _write_timeseries(os.path.join(args.out_dir, "timeseries.csv"), series)
        outputs.append("timeseries.csv")
    _write_manifest(args.out_dir, config, outputs, started)
    summary = campaign.mmw
    print(f"mmwave: mean rate {summary.mean_rate_bps / 1e9:.3f} Gbit/s, "
          f"outage {summary.outage_prob:.4f}, rho {summary.rho_var:.4f}")
    print(f"lte: mean rate {campaign.lte.mean_rate_bps / 1e9:.3f} Gbit/s, "
          f"outage {campaign.lte.outage_prob:.4f}, rho {campaign.lte.rho_var:.4f}")
    return EXIT_OK


_PRESET_GRIDS = {
    "fig2": {"lambda_grid": tuple(float(v) for v in range(10, 101, 10)),
             "array_grid": ((1, 64), (4, 4), (16, 64)), "ttr_grid": (0.0,)},
    "fig5": {"lambda_grid": (10.0, 30.0, 50.0, 70.0, 90.0),
             "array_grid": ((16, 64),), "ttr_grid": (0.0,)},
    "fig7": {"lambda_grid": tuple(float(v) for v in range(10, 101, 10)),
             "array_grid": ((1, 64), (4, 4), (16, 64)), "ttr_grid": (0.0,)},
}


def _preset_timeseries(config, args, name, started) -> int:
    """Single-drop rate traces: fig3 compares arrays, fig6 tracking periods."""
    base = dataclasses.replace(config, n_drops=1)
    if name == "fig3":
        variants = [(f"mmwave_n{n}_m{m}",
                     dataclasses.replace(base, lambda_mmw=100.0, t_tr_s=0.0,
                                         vehicle_elements=n, rsu_elements=m))
                    for n, m in ((16, 64), (4, 4))]
    else:
        variants = [(f"mmwave_ttr{t:g}",
                     dataclasses.replace(base, lambda_mmw=30.0, t_tr_s=t,
                                         vehicle_elements=16, rsu_elements=64))
                    for t in (0.1, 1.0)]
    series = []
    lte_drop = None
    for label, cfg in variants:
        campaign = run_campaign(cfg)
        drop = campaign.drops[0]
        series.append((label, *_drop_series(drop, TECH_MMWAVE)))
        lte_drop = drop
    series.append((TECH_LTE, *_drop_series(lte_drop, TECH_LTE)))
    csv_name, svg_name = f"{name}.csv", f"{name}.svg"
    _write_timeseries(os.path.join(args.out_dir, csv_name), series)
    plotting.plot_timeseries(os.path.join(args.out_dir, csv_name),
                             os.path.join(args.out_dir, svg_name))
    _write_manifest(args.out_dir, config, [csv_name, svg_name], started)
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.time()
    name = args.figure
    if name is not None and name not in _FIGURES:
        raise ConfigError(f"unknown figure preset: {name}")
    config = _load(args, _PRESET_GRIDS.get(name))
    os.makedirs(args.out_dir, exist_ok=True)
    if name in ("fig3", "fig6"):
        return _preset_timeseries(config, args, name, started)

    points = sweep(config)
    base = name if name else "sweep"
    csv_name, svg_name = f"{base}.csv", f"{base}.svg"
    csv_path = os.path.join(args.out_dir, csv_name)
    write_summary_csv(summary_rows(points), csv_path)
    svg_path = os.path.join(args.out_dir, svg_name)
    if name == "fig5":
        plotting.plot_stability_vs_density(csv_path, svg_path)
    elif name == "fig7":
        plotting.plot_outage_vs_density(csv_path, svg_path)
    else:
        plotting.plot_rate_vs_density(csv_path, svg_path)
    _write_manifest(args.out_dir, config, [csv_name, svg_name], started)
    print(f"wrote {csv_path} and {svg_path}")
    return EXIT_OK


def cmd_validate_trace(args) -> int:
    try:
        trace = parse_trace(args.trace)
    except (TraceFormatError, OSError) as err:
        print(f"invalid trace: {err}", file=sys.stderr)
        return EXIT_CONFIG
    times = trace.times()
    if trace.dt_s is not None:
        duration = len(trace) * trace.dt_s
        spacing = f"uniform dt {trace.dt_s:g} s"
    else:
        duration = float(times[-1] - times[0])
        spacing = "non-uniform spacing"
    speeds = trace.speeds()
    print(f"duration {duration:.1f} s")
    print(f"{len(trace)} samples, {spacing}, vehicle {trace.vehicle_id}")
    print(f"speed max {speeds.max():.2f} m/s, mean {speeds.mean():.2f} m/s")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_validate_trace(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceFormatError as err:
        print(f"trace error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001 - surface anything else as exit 2
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
