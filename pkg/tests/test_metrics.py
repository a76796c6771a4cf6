"""Campaign statistics: stability index, outage probability, aggregation, CSV."""

import math

import numpy as np
import pytest

from v2nsim.core import TECH_LTE, TECH_MMWAVE
from v2nsim.metrics import (SUMMARY_HEADER, MetricsSummary, SummaryRow,
                            aggregate, outage_probability, read_summary_csv,
                            stability_index, write_summary_csv)


def test_stability_constant_series_is_zero():
    assert stability_index(np.full(100, 3.5)) == 0.0


def test_stability_alternating_series_is_one():
    series = np.tile([0.0, 2.0], 500)
    assert stability_index(series) == pytest.approx(1.0)


def test_stability_is_scale_invariant():
    rng = np.random.default_rng(41)
    series = rng.uniform(0.5, 2.0, size=1000)
    assert stability_index(series * 7.5) == pytest.approx(stability_index(series))


def test_stability_rejects_zero_mean():
    with pytest.raises(ValueError, match="zero mean"):
        stability_index(np.zeros(10))


def test_outage_threshold_is_strict():
    snr_db = np.array([-5.0, 0.0, 0.0, 5.0])
    assert outage_probability(snr_db, 0.0) == pytest.approx(0.25)
    assert outage_probability(snr_db, 5.0) == pytest.approx(0.75)


def test_outage_rejects_empty_series():
    with pytest.raises(ValueError, match="empty"):
        outage_probability(np.array([]), 0.0)


def test_outage_monotone_in_threshold():
    rng = np.random.default_rng(42)
    snr_db = rng.normal(10.0, 8.0, size=5000)
    thresholds = np.linspace(-10.0, 30.0, 9)
    probs = [outage_probability(snr_db, t) for t in thresholds]
    assert all(a <= b for a, b in zip(probs, probs[1:]))


def _drops(arrays):
    return [np.asarray(a, dtype=float) for a in arrays]


def test_aggregate_single_drop_has_undefined_ci():
    rates = _drops([[1e9, 2e9, 3e9]])
    snrs = _drops([[10.0, 12.0, 14.0]])
    summary = aggregate(rates, snrs, 0.0, TECH_MMWAVE)
    assert summary.n_drops == 1
    assert summary.mean_rate_bps == pytest.approx(2e9)
    assert math.isnan(summary.ci_rate)
    assert math.isnan(summary.ci_outage)


def test_aggregate_identical_drops_have_zero_ci():
    rates = _drops([[1e9, 3e9]] * 8)
    snrs = _drops([[10.0, 20.0]] * 8)
    summary = aggregate(rates, snrs, 0.0, TECH_MMWAVE)
    assert summary.ci_rate == 0.0
    assert summary.ci_outage == 0.0
    assert summary.mean_rate_bps == pytest.approx(2e9)


def test_aggregate_bernoulli_outage_and_ci_width():
    rng = np.random.default_rng(43)
    n = 10_000
    below = rng.random(n) < 0.1
    snrs = _drops([[(-10.0 if b else 10.0)] for b in below])
    rates = _drops([[1e9]] * n)
    summary = aggregate(rates, snrs, 0.0, TECH_MMWAVE)
    assert summary.outage_prob == pytest.approx(0.1, abs=0.006)
    # 1.96 * sqrt(p(1-p)/n) with p = 0.1 is about 0.0059
    assert summary.ci_outage == pytest.approx(0.0059, abs=0.001)


def test_aggregate_mean_is_order_independent():
    rng = np.random.default_rng(44)
    rates = _drops(rng.uniform(1e8, 1e9, size=(20, 50)))
    snrs = _drops(rng.uniform(0.0, 30.0, size=(20, 50)))
    forward = aggregate(rates, snrs, 0.0, TECH_MMWAVE)
    backward = aggregate(rates[::-1], snrs[::-1], 0.0, TECH_MMWAVE)
    assert forward.mean_rate_bps == pytest.approx(backward.mean_rate_bps)
    assert forward.outage_prob == pytest.approx(backward.outage_prob)
    assert forward.ci_rate == pytest.approx(backward.ci_rate)


def test_aggregate_input_validation():
    with pytest.raises(ValueError, match="no drops"):
        aggregate([], [], 0.0, TECH_MMWAVE)
    with pytest.raises(ValueError, match="drop counts differ"):
        aggregate(_drops([[1.0]]), _drops([[1.0], [2.0]]), 0.0, TECH_MMWAVE)
    with pytest.raises(ValueError, match="unknown stability mode"):
        aggregate(_drops([[1.0]]), _drops([[1.0]]), 0.0, TECH_MMWAVE,
                  stability_mode="median")


def test_aggregate_per_drop_skips_layerless_drops():
    # a drop whose rate series is identically zero (no serving RSU) must not
    # poison the per-drop stability average
    rates = _drops([[0.0, 0.0, 0.0], [1e9, 3e9, 1e9, 3e9]])
    snrs = _drops([[-200.0] * 3, [10.0, 20.0, 10.0, 20.0]])
    summary = aggregate(rates, snrs, 0.0, TECH_MMWAVE, stability_mode="per-drop")
    expected = stability_index(np.array([1e9, 3e9, 1e9, 3e9]))
    assert summary.rho_var == pytest.approx(expected)


def test_aggregate_pooled_all_zero_is_nan():
    rates = _drops([[0.0, 0.0], [0.0, 0.0]])
    snrs = _drops([[-200.0] * 2] * 2)
    summary = aggregate(rates, snrs, 0.0, TECH_MMWAVE, stability_mode="pooled")
    assert math.isnan(summary.rho_var)


def test_aggregate_pooled_and_per_drop_disagree_on_between_drop_spread():
    # two internally constant drops at different levels: per-drop sees zero
    # variation, pooled sees the spread between the drops
    rates = _drops([[1.0] * 4, [3.0] * 4])
    snrs = _drops([[10.0] * 4] * 2)
    per_drop = aggregate(rates, snrs, 0.0, TECH_MMWAVE, stability_mode="per-drop")
    pooled = aggregate(rates, snrs, 0.0, TECH_MMWAVE, stability_mode="pooled")
    assert per_drop.rho_var == pytest.approx(0.0)
    assert pooled.rho_var == pytest.approx(0.5)


def test_summary_csv_round_trip(tmp_path):
    mmw = MetricsSummary(tech=TECH_MMWAVE, mean_rate_bps=9.129e9,
                         rho_var=0.493, outage_prob=0.012, n_drops=200,
                         ci_rate=1.2e8, ci_rho=0.01, ci_outage=0.002)
    lte = MetricsSummary(tech=TECH_LTE, mean_rate_bps=2.18e8, rho_var=0.403,
                         outage_prob=0.0068, n_drops=200, ci_rate=5.0e6,
                         ci_rho=0.008, ci_outage=0.001)
    rows = [
        SummaryRow(TECH_MMWAVE, 50.0, 16, 64, 0.1, mmw),
        SummaryRow(TECH_LTE, 0.0, 1, 1, 0.0, lte),
    ]
    path = tmp_path / "summary.csv"
    write_summary_csv(rows, path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(SUMMARY_HEADER)
    back = read_summary_csv(path)
    assert len(back) == 2
    for want, got in zip(rows, back):
        assert got.tech == want.tech
        assert got.lambda_mmw == want.lambda_mmw
        assert got.n_vehicle == want.n_vehicle
        assert got.m_rsu == want.m_rsu
        assert got.t_tr_s == want.t_tr_s
        assert got.summary.mean_rate_bps == want.summary.mean_rate_bps
        assert got.summary.rho_var == want.summary.rho_var
        assert got.summary.outage_prob == want.summary.outage_prob
        assert got.summary.ci_rate == want.summary.ci_rate
        assert got.summary.ci_outage == want.summary.ci_outage
        assert got.summary.n_drops == want.summary.n_drops
        # drop-level rho spread is not stored in the CSV
        assert math.isnan(got.summary.ci_rho)
