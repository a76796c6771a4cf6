"""Per-drop and campaign metrics: mean rate, stability index, outage probability."""

import csv
import math
from dataclasses import dataclass

import numpy as np

_Z95 = 1.96


@dataclass(frozen=True)
class RateSeries:
    """Rate samples of one technology over one drop."""

    tech: str
    dt_s: float
    values_bps: np.ndarray


@dataclass(frozen=True)
class MetricsSummary:
    """Campaign-level metrics of one technology with 95% half-widths."""

    tech: str
    mean_rate_bps: float
    rho_var: float
    outage_prob: float
    n_drops: int
    ci_rate: float
    ci_rho: float
    ci_outage: float


def stability_index(values_bps) -> float:
    """Coefficient of variation of a rate series: population std over mean."""
    values = np.asarray(values_bps, dtype=float)
    mean = float(values.mean())
    if mean == 0.0:
        raise ValueError("undefined stability (zero mean)")
    return float(values.std() / mean)


def outage_probability(snr_db, threshold_db) -> float:
    """Fraction of samples strictly below the threshold."""
    values = np.asarray(snr_db, dtype=float)
    if values.size == 0:
        raise ValueError("empty series")
    return float(np.mean(values < threshold_db))


def _halfwidth(per_drop) -> float:
    if len(per_drop) < 2:
        return float("nan")
    return float(_Z95 * np.std(per_drop, ddof=1) / math.sqrt(len(per_drop)))


def aggregate(rate_series, snr_series, threshold_db, tech,
              stability_mode="pooled") -> MetricsSummary:
    """Combine per-drop series into one summary.

    rate_series and snr_series are equal-length sequences of per-drop sample
    arrays. The stability index is computed over the pooled samples by
    default ("pooled"); "per-drop" averages the per-drop indices instead.
    Half-widths come from the drop-to-drop spread (normal approximation) and
    are NaN for a single drop. A pooled all-zero rate makes rho_var NaN.
    """
    if len(rate_series) == 0:
        raise ValueError("no drops to aggregate")
    if len(rate_series) != len(snr_series):
        raise ValueError("rate and SNR drop counts differ")
    if stability_mode not in ("pooled", "per-drop"):
        raise ValueError(f"unknown stability mode: {stability_mode}")

    drop_means = [float(np.mean(r)) for r in rate_series]
    drop_outages = [outage_probability(s, threshold_db) for s in snr_series]
    drop_rhos = []
    for r in rate_series:
        try:
            drop_rhos.append(stability_index(r))
        except ValueError:
            pass

    pooled = np.concatenate([np.asarray(r, dtype=float) for r in rate_series])
    if stability_mode == "pooled":
        try:
            rho = stability_index(pooled)
        except ValueError:
            rho = float("nan")
    else:
        rho = float(np.mean(drop_rhos)) if drop_rhos else float("nan")

    return MetricsSummary(
        tech=tech,
        mean_rate_bps=float(np.mean(drop_means)),
        rho_var=rho,
        outage_prob=float(np.mean(drop_outages)),
        n_drops=len(rate_series),
        ci_rate=_halfwidth(drop_means),
        ci_rho=_halfwidth(drop_rhos),
        ci_outage=_halfwidth(drop_outages),
    )


@dataclass(frozen=True)
class SummaryRow:
    """One row of the summary CSV."""

    tech: str
    lambda_mmw: float
    n_vehicle: int
    m_rsu: int
    t_tr_s: float
    summary: MetricsSummary


SUMMARY_HEADER = ("tech", "lambda_mmw", "N", "M", "T_tr_s", "mean_rate_bps",
                  "rho_var", "outage_prob", "ci_rate", "ci_outage", "n_drops")


def _fmt(x) -> str:
    return repr(float(x))


def write_summary_csv(rows, path) -> None:
    """Write summary rows with a fixed column order and stable float text."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            s = row.summary
            writer.writerow([
                row.tech, _fmt(row.lambda_mmw), row.n_vehicle, row.m_rsu,
                _fmt(row.t_tr_s), _fmt(s.mean_rate_bps), _fmt(s.rho_var),
                _fmt(s.outage_prob), _fmt(s.ci_rate), _fmt(s.ci_outage),
                s.n_drops,
            ])


def read_summary_csv(path) -> list:
    """Read rows written by write_summary_csv back into SummaryRow objects."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            summary = MetricsSummary(
                tech=rec["tech"],
                mean_rate_bps=float(rec["mean_rate_bps"]),
                rho_var=float(rec["rho_var"]),
                outage_prob=float(rec["outage_prob"]),
                n_drops=int(rec["n_drops"]),
                ci_rate=float(rec["ci_rate"]),
                ci_rho=float("nan"),
                ci_outage=float(rec["ci_outage"]),
            )
            rows.append(SummaryRow(rec["tech"], float(rec["lambda_mmw"]),
                                   int(rec["N"]), int(rec["M"]),
                                   float(rec["T_tr_s"]), summary))
    return rows
