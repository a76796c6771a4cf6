"""Link budget, SNR/SINR, Shannon rate, and serving-RSU selection."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RadioParams:
    """Transmit-side and receiver-noise constants of one technology."""

    tx_power_dbm: float
    bandwidth_hz: float
    carrier_hz: float
    noise_figure_db: float
    outage_threshold_db: float


@dataclass(frozen=True)
class LinkSample:
    """One time step of the serving link of one technology."""

    t_s: float
    tech: str
    serving_rsu: int  # None when no RSU of this technology exists
    snr_db: float
    rate_bps: float
    lost_alignment: bool


def received_power(tx_power_dbm, gain_tx_db, gain_rx_db, path_loss_db,
                   fading_linear):
    """Received power in dBm; fading enters as 10*log10 of the power gain.

    Zero fading gives -inf dBm. Accepts arrays.
    """
    with np.errstate(divide="ignore"):
        fading_db = 10.0 * np.log10(fading_linear)
    return tx_power_dbm + gain_tx_db + gain_rx_db - path_loss_db + fading_db


def noise_power(bandwidth_hz, noise_figure_db) -> float:
    """Thermal noise floor in dBm: -174 dBm/Hz plus bandwidth and noise figure."""
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_hz}")
    return -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def snr(rx_power_dbm, noise_dbm):
    """SNR in dB; -inf received power propagates to -inf SNR."""
    return rx_power_dbm - noise_dbm


def sinr(rx_power_dbm, noise_dbm, interferer_dbm):
    """SINR in dB given a sequence (or array) of interferer powers in dBm.

    With no interferers this reduces exactly to the SNR.
    """
    signal_mw = 10.0 ** (np.asarray(rx_power_dbm, dtype=float) / 10.0)
    noise_mw = 10.0 ** (noise_dbm / 10.0)
    interference_mw = np.sum(10.0 ** (np.asarray(interferer_dbm, dtype=float) / 10.0))
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(signal_mw / (noise_mw + interference_mw))
    return float(out) if np.ndim(rx_power_dbm) == 0 else out


def shannon_rate(bandwidth_hz, snr_db):
    """Achievable rate W * log2(1 + SNR) in bit/s; -inf SNR gives 0."""
    gamma = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    rate = bandwidth_hz * np.log2(1.0 + gamma)
    return float(rate) if np.ndim(snr_db) == 0 else rate


def associate(rsus, link_states) -> int:
    """Pick the serving RSU: highest fading-averaged received power.

    The score per candidate is -(path_loss_db + shadow_db) from its current
    LinkState; transmit power and boresight antenna gains are common to all
    candidates and drop out. Ties go to the lowest id. Returns None when the
    layer is empty. States must already reflect the current vehicle position.
    """
    best_id = None
    best_score = None
    for rsu in sorted(rsus, key=lambda r: r.id):
        state = link_states[rsu.id]
        score = -(state.path_loss_db + state.shadow_db)
        if best_score is None or score > best_score:
            best_id = rsu.id
            best_score = score
    return best_id
