"""Render sweep and time-series CSVs to SVG line charts."""

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .core import TECH_LTE, TECH_MMWAVE
from .metrics import read_summary_csv

_MARKERS = ("o", "s", "^", "d", "v", "*")


def _mmwave_groups(rows):
    """Group mmWave summary rows by (N, M, T_tr) and sort each by density."""
    groups = defaultdict(list)
    for row in rows:
        if row.tech == TECH_MMWAVE:
            groups[(row.n_vehicle, row.m_rsu, row.t_tr_s)].append(row)
    for key in groups:
        groups[key].sort(key=lambda r: r.lambda_mmw)
    return dict(sorted(groups.items()))


def _label(key) -> str:
    n, m, t_tr = key
    label = f"mmWave N={n}, M={m}"
    if t_tr > 0:
        label += f", T={t_tr:g} s"
    return label


def _finish(ax, xlabel, ylabel, out_path):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    ax.legend()
    ax.figure.tight_layout()
    ax.figure.savefig(out_path, format="svg")
    plt.close(ax.figure)


def _plot_metric(summary_csv, out_path, value, ylabel, logy=False):
    rows = read_summary_csv(summary_csv)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, (key, group) in enumerate(_mmwave_groups(rows).items()):
        xs = [r.lambda_mmw for r in group]
        ys = [value(r) for r in group]
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)], label=_label(key))
    lte = [r for r in rows if r.tech == TECH_LTE]
    if lte:
        ax.axhline(value(lte[0]), color="k", linestyle="--", label="LTE")
    if logy:
        ax.set_yscale("log")
    _finish(ax, "mmWave RSU density [1/km$^2$]", ylabel, out_path)


def plot_rate_vs_density(summary_csv, out_path):
    """Mean rate in Gbit/s against mmWave RSU density."""
    _plot_metric(summary_csv, out_path,
                 lambda r: r.summary.mean_rate_bps / 1e9, "Mean rate [Gbit/s]")


def plot_stability_vs_density(summary_csv, out_path):
    """Stability index (coefficient of variation) against density."""
    _plot_metric(summary_csv, out_path,
                 lambda r: r.summary.rho_var, "Stability index")


def plot_outage_vs_density(summary_csv, out_path):
    """Outage probability against density on a log scale."""
    _plot_metric(summary_csv, out_path,
                 lambda r: r.summary.outage_prob, "Outage probability", logy=True)


def plot_timeseries(timeseries_csv, out_path):
    """Rate over time, one line per tech label in the CSV."""
    series = defaultdict(lambda: ([], []))
    with open(timeseries_csv, newline="") as fh:
        for rec in csv.DictReader(fh):
            ts, ys = series[rec["tech"]]
            ts.append(float(rec["t_s"]))
            ys.append(float(rec["rate_bps"]) / 1e9)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for label in sorted(series):
        ts, ys = series[label]
        ax.plot(ts, ys, label=label, linewidth=0.9)
    _finish(ax, "Time [s]", "Rate [Gbit/s]", out_path)
