"""Monte Carlo drop engine: trace x deployment -> per-step SNR and rate series.

Each drop samples a deployment and channel realization on top of a mobility
trace and walks the whole trace with array arithmetic. Large-scale channel
state follows the decorrelation schedule of the scalar evolve_link_state
contract; mmWave association and beam alignment change only at tracking-slot
boundaries, while LTE re-associates every step.
"""

import dataclasses
import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import RngStream, TECH_LTE, TECH_MMWAVE
from .deployment import Deployment, build_deployment
from .mobility import MobilityTrace, parse_trace, resample, synth_randomtrip_trace
from .channel import (ChannelParams, lte_los_probability, lte_path_loss,
                      mmwave_los_probability, mmwave_path_loss)
from .antenna import make_array
from .link import noise_power
from .metrics import MetricsSummary, SummaryRow, aggregate
from .config import SimConfig


@dataclass(eq=False)
class DropResult:
    """Per-step series of one drop, one array per technology."""

    drop_index: int
    dt_s: float
    lte_rate_bps: np.ndarray
    mmw_rate_bps: np.ndarray
    lte_snr_db: np.ndarray
    mmw_snr_db: np.ndarray
    lte_serving: np.ndarray
    mmw_serving: np.ndarray
    mmw_lost: np.ndarray
    loss_event_steps: np.ndarray
    deployment_digest: str

    def loss_event_count(self) -> int:
        return int(len(self.loss_event_steps))


@dataclass(eq=False)
class CampaignResult:
    """All drops of one configuration plus the aggregated summaries."""

    config: SimConfig
    drops: list
    lte: MetricsSummary
    mmw: MetricsSummary


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a sweep with its finished campaign."""

    lambda_mmw: float
    n_vehicle: int
    m_rsu: int
    t_tr_s: float
    campaign: CampaignResult


def _wrap(angles):
    return (angles + np.pi) % (2.0 * np.pi) - np.pi


def build_trace(config: SimConfig, drop_index: int) -> MobilityTrace:
    """Trace for one drop: parsed from file or synthesized on the street grid.

    With per_drop_trace off, every drop shares the trace of index 0.
    """
    index = drop_index if config.per_drop_trace else 0
    if config.trace_path is not None:
        trace = parse_trace(config.trace_path)
        return resample(trace, config.dt_s)
    rng = RngStream(config.root_seed).derive("trace", index).generator()
    # center the street grid in the deployment area to keep the drive clear
    # of layout boundary effects
    margin = (config.area_side_m - config.grid_blocks * config.block_m) / 2.0
    return synth_randomtrip_trace(
        config.grid_blocks, config.block_m, config.duration_s, config.v_max_mps,
        config.stop_prob, config.stop_time_s, rng,
        dt_s=config.dt_s, accel_mps2=config.accel_mps2,
        origin_xy=(margin, margin))


def _corr_event_steps(pxy: np.ndarray, corr_m: float) -> np.ndarray:
    """Steps where the vehicle has covered the decorrelation distance.

    Step 0 is always an event; corr_m = 0 makes every step an event.
    """
    n = len(pxy)
    if corr_m <= 0:
        return np.arange(n)
    events = [0]
    last = pxy[0]
    for t in range(1, n):
        dx = pxy[t, 0] - last[0]
        dy = pxy[t, 1] - last[1]
        if dx * dx + dy * dy >= corr_m * corr_m:
            events.append(t)
            last = pxy[t]
    return np.asarray(events)


def _expand_segments(event_steps: np.ndarray, per_event: np.ndarray,
                     n_steps: int) -> np.ndarray:
    """Repeat each event row until the next event."""
    seg = np.searchsorted(event_steps, np.arange(n_steps), side="right") - 1
    return per_event[seg]


def _realize_channel(tech: str, pxy: np.ndarray, rsu_xy: np.ndarray,
                     params: ChannelParams, config: SimConfig, drop_rng: RngStream):
    """Sample LOS, shadowing, fading, and path loss matrices of shape (steps, RSUs)."""
    n = len(pxy)
    m = len(rsu_xy)
    if m == 0:
        empty = np.zeros((n, 0))
        return empty, empty.copy(), empty.copy(), np.zeros((n, 0), dtype=bool)

    dist = np.hypot(pxy[:, 0:1] - rsu_xy[None, :, 0], pxy[:, 1:2] - rsu_xy[None, :, 1])

    los_steps = _corr_event_steps(pxy, params.los_corr_m)
    if config.force_los == "los":
        los = np.ones((n, m), dtype=bool)
    elif config.force_los == "nlos":
        los = np.zeros((n, m), dtype=bool)
    else:
        if tech == TECH_LTE:
            p_los = lte_los_probability(dist[los_steps], params)
        else:
            p_los = mmwave_los_probability(dist[los_steps], params)
        draws = drop_rng.derive(f"{tech}-los").generator().random((len(los_steps), m))
        los = _expand_segments(los_steps, draws < p_los, n)

    if tech == TECH_MMWAVE:
        if params.shadow_corr_m == params.los_corr_m:
            shadow_steps = los_steps
        else:
            extra = _corr_event_steps(pxy, params.shadow_corr_m)
            shadow_steps = np.union1d(los_steps, extra)
        sigma = np.where(los[shadow_steps], params.sigma_los_db, params.sigma_nlos_db)
        gauss = drop_rng.derive("mmwave-shadow").generator().standard_normal(
            (len(shadow_steps), m))
        shadow = _expand_segments(shadow_steps, gauss * sigma, n)
        path_loss = mmwave_path_loss(dist, los, 0.0, params)
    else:
        shadow = np.zeros((n, m))
        path_loss = lte_path_loss(dist, los, params)

    fading_rng = drop_rng.derive(f"{tech}-fading").generator()
    if tech == TECH_MMWAVE and not config.mmw_fading:
        fading = np.ones((n, m))
    else:
        fading = fading_rng.exponential(1.0, size=(n, m))

    return path_loss, shadow, fading, los


def _fading_db(fading: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(fading)


def _simulate_lte(config, pxy, path_loss, shadow, fading):
    """Per-step association on fading-averaged power, omni antennas."""
    n = len(pxy)
    radio = config.lte_radio()
    noise_dbm = noise_power(radio.bandwidth_hz, radio.noise_figure_db)
    if path_loss.shape[1] == 0:
        return np.full(n, -np.inf), np.full(n, -1, dtype=np.int64)
    serving = np.argmin(path_loss + shadow, axis=1)
    rows = np.arange(n)
    rx = (radio.tx_power_dbm - path_loss[rows, serving]
          + _fading_db(fading[rows, serving]))
    return rx - noise_dbm, serving.astype(np.int64)


def _simulate_mmwave(config, pxy, path_loss, shadow, fading, rsu_xy, drop_rng):
    """Slotted association and beam tracking; returns SNR, serving, lost, events.

    Within a slot the serving RSU and both boresights are frozen at the
    geometry of the slot's first step. Each sample is evaluated with the
    misalignment accumulated by the end of its own step, so a tracking
    period equal to the step still shows one step of drift. Alignment loss
    is sticky until the next slot boundary.
    """
    n = len(pxy)
    radio = config.mmw_radio()
    noise_dbm = noise_power(radio.bandwidth_hz, radio.noise_figure_db)
    if path_loss.shape[1] == 0:
        snr = np.full(n, -np.inf)
        serving = np.full(n, -1, dtype=np.int64)
        return snr, serving, np.zeros(n, dtype=bool), np.empty(0, dtype=np.int64)

    vehicle_array = make_array(config.vehicle_elements, config.side_lobe_drop_db,
                               config.side_lobe_floor_dbi, config.beamwidth_scale_deg)
    rsu_array = make_array(config.rsu_elements, config.side_lobe_drop_db,
                           config.side_lobe_floor_dbi, config.beamwidth_scale_deg)
    main_gain = vehicle_array.main_gain_db + rsu_array.main_gain_db
    side_gain = vehicle_array.side_gain_db + rsu_array.side_gain_db
    half_width = min(vehicle_array.beamwidth_rad, rsu_array.beamwidth_rad) / 2.0

    score = -(path_loss + shadow)
    lost = np.zeros(n, dtype=bool)
    events = []

    if config.t_tr_s == 0:
        serving = np.argmax(score, axis=1)
        slot_starts = np.arange(n)
        slot_of_step = np.arange(n)
        boresight = np.arctan2(rsu_xy[serving, 1] - pxy[:, 1],
                               rsu_xy[serving, 0] - pxy[:, 0])
    else:
        slot_len = int(round(config.t_tr_s / config.dt_s))
        slot_starts = np.arange(0, n, slot_len)
        slot_of_step = np.arange(n) // slot_len
        serving_per_slot = np.argmax(score[slot_starts], axis=1)
        serving = serving_per_slot[slot_of_step]
        boresight_per_slot = np.arctan2(
            rsu_xy[serving_per_slot, 1] - pxy[slot_starts, 1],
            rsu_xy[serving_per_slot, 0] - pxy[slot_starts, 0])
        boresight = boresight_per_slot[slot_of_step]
        # misalignment at the end of each step: geometry one step ahead
        ahead = np.minimum(np.arange(n) + 1, n - 1)
        theta = np.arctan2(rsu_xy[serving, 1] - pxy[ahead, 1],
                           rsu_xy[serving, 0] - pxy[ahead, 0])
        # both ends of the link drift by the same angle in the plane
        exceeded = np.abs(_wrap(theta - boresight)) > half_width
        for k, b in enumerate(slot_starts):
            e = min(b + slot_len, n)
            slot_lost = np.maximum.accumulate(exceeded[b:e])
            lost[b:e] = slot_lost
            if slot_lost[-1]:
                events.append(b + int(np.argmax(slot_lost)))

    gain = np.where(lost, side_gain, main_gain)
    rows = np.arange(n)
    rx = (radio.tx_power_dbm + gain - path_loss[rows, serving]
          - shadow[rows, serving] + _fading_db(fading[rows, serving]))

    if config.sinr_mode:
        snr_db = _mmwave_sinr(config, pxy, path_loss, shadow, fading, rsu_xy,
                              serving, boresight, slot_of_step, len(slot_starts),
                              vehicle_array, rsu_array, rx, noise_dbm, drop_rng)
    else:
        snr_db = rx - noise_dbm

    return (snr_db, serving.astype(np.int64), lost,
            np.asarray(events, dtype=np.int64))


def _pattern_gain_matrix(array, offsets):
    half = array.beamwidth_rad / 2.0
    return np.where(np.abs(_wrap(offsets)) <= half,
                    array.main_gain_db, array.side_gain_db)


def _mmwave_sinr(config, pxy, path_loss, shadow, fading, rsu_xy, serving,
                 vehicle_boresight, slot_of_step, n_slots, vehicle_array,
                 rsu_array, rx_serving_dbm, noise_dbm, drop_rng):
    """Other-cell interference with per-slot random boresights at non-serving RSUs."""
    n, m = path_loss.shape
    radio = config.mmw_radio()
    interferer_bore = drop_rng.derive("interferers").generator().uniform(
        0.0, 2.0 * np.pi, size=(n_slots, m))
    bore_per_step = interferer_bore[slot_of_step]
    to_rsu = np.arctan2(rsu_xy[None, :, 1] - pxy[:, 1:2],
                        rsu_xy[None, :, 0] - pxy[:, 0:1])
    vehicle_gain = _pattern_gain_matrix(vehicle_array,
                                        to_rsu - vehicle_boresight[:, None])
    rsu_gain = _pattern_gain_matrix(rsu_array, (to_rsu + np.pi) - bore_per_step)
    rx_all = (radio.tx_power_dbm + vehicle_gain + rsu_gain - path_loss - shadow
              + _fading_db(fading))
    rx_lin = 10.0 ** (rx_all / 10.0)
    rows = np.arange(n)
    rx_lin[rows, serving] = 0.0
    interference_mw = rx_lin.sum(axis=1)
    signal_mw = 10.0 ** (rx_serving_dbm / 10.0)
    noise_mw = 10.0 ** (noise_dbm / 10.0)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(signal_mw / (noise_mw + interference_mw))


def _shannon(bandwidth_hz, snr_db):
    return bandwidth_hz * np.log2(1.0 + 10.0 ** (snr_db / 10.0))


def _deployment_digest(deployment: Deployment) -> str:
    h = hashlib.sha256()
    for rsu in deployment.lte_rsus + deployment.mmw_rsus:
        h.update(np.float64(rsu.position.x).tobytes())
        h.update(np.float64(rsu.position.y).tobytes())
    return h.hexdigest()[:12]


def run_drop(config: SimConfig, drop_index: int, trace: MobilityTrace = None,
             deployment: Deployment = None) -> DropResult:
    """Simulate one drop. trace and deployment override the sampled ones."""
    if trace is None:
        trace = build_trace(config, drop_index)
    root = RngStream(config.root_seed)
    drop_rng = root.derive("drop", drop_index)
    if deployment is None:
        lte_rng = root.derive("lte-layout") if config.fixed_lte_layout else None
        deployment = build_deployment(config.area_side_m, config.lambda_lte,
                                      config.lambda_mmw, drop_rng.derive("deploy"),
                                      lte_rng=lte_rng)
    params = config.channel_params()
    pxy = trace.positions_xy()

    lte_xy = np.array([(r.position.x, r.position.y) for r in deployment.lte_rsus])
    lte_xy = lte_xy.reshape(-1, 2)
    mmw_xy = np.array([(r.position.x, r.position.y) for r in deployment.mmw_rsus])
    mmw_xy = mmw_xy.reshape(-1, 2)

    lte_pl, lte_sh, lte_fad, _ = _realize_channel(TECH_LTE, pxy, lte_xy, params,
                                                  config, drop_rng)
    mmw_pl, mmw_sh, mmw_fad, _ = _realize_channel(TECH_MMWAVE, pxy, mmw_xy, params,
                                                  config, drop_rng)

    lte_snr, lte_serving = _simulate_lte(config, pxy, lte_pl, lte_sh, lte_fad)
    mmw_snr, mmw_serving, mmw_lost, events = _simulate_mmwave(
        config, pxy, mmw_pl, mmw_sh, mmw_fad, mmw_xy, drop_rng)

    # map layer-local column indices to deployment-wide RSU ids
    lte_ids = np.array([r.id for r in deployment.lte_rsus], dtype=np.int64)
    mmw_ids = np.array([r.id for r in deployment.mmw_rsus], dtype=np.int64)
    lte_serving = np.where(lte_serving >= 0, lte_ids[lte_serving]
                           if len(lte_ids) else lte_serving, -1)
    mmw_serving = np.where(mmw_serving >= 0, mmw_ids[mmw_serving]
                           if len(mmw_ids) else mmw_serving, -1)

    return DropResult(
        drop_index=drop_index,
        dt_s=trace.dt_s,
        lte_rate_bps=_shannon(config.bandwidth_lte_hz, lte_snr),
        mmw_rate_bps=_shannon(config.bandwidth_mmw_hz, mmw_snr),
        lte_snr_db=lte_snr,
        mmw_snr_db=mmw_snr,
        lte_serving=lte_serving,
        mmw_serving=mmw_serving,
        mmw_lost=mmw_lost,
        loss_event_steps=events,
        deployment_digest=_deployment_digest(deployment),
    )


def _drop_task(args):
    config, trace, index = args
    return run_drop(config, index, trace=trace)


def run_campaign(config: SimConfig) -> CampaignResult:
    """Run n_drops independent drops and aggregate both technologies.

    Results are keyed by (root_seed, drop index) alone, so any worker count
    produces identical numbers.
    """
    shared_trace = None if config.per_drop_trace else build_trace(config, 0)
    tasks = [(config, shared_trace, i) for i in range(config.n_drops)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunk = max(1, config.n_drops // (config.workers * 4))
            drops = list(pool.map(_drop_task, tasks, chunksize=chunk))
    else:
        drops = [_drop_task(t) for t in tasks]

    threshold = config.outage_threshold_db
    lte = aggregate([d.lte_rate_bps for d in drops], [d.lte_snr_db for d in drops],
                    threshold, TECH_LTE, config.stability_mode)
    mmw = aggregate([d.mmw_rate_bps for d in drops], [d.mmw_snr_db for d in drops],
                    threshold, TECH_MMWAVE, config.stability_mode)
    return CampaignResult(config, drops, lte, mmw)


def sweep(config: SimConfig) -> list:
    """Run a campaign per (lambda_mmw, array pair, tracking period) grid point."""
    points = []
    for lam in config.lambda_grid:
        for n_vehicle, m_rsu in config.array_grid:
            for t_tr in config.ttr_grid:
                point_config = dataclasses.replace(
                    config, lambda_mmw=lam, vehicle_elements=n_vehicle,
                    rsu_elements=m_rsu, t_tr_s=t_tr)
                points.append(SweepPoint(lam, n_vehicle, m_rsu, t_tr,
                                         run_campaign(point_config)))
    return points


def summary_rows(points) -> list:
    """Sweep points as CSV rows: one per mmWave grid point plus one LTE row.

    LTE does not depend on any swept parameter, so a single row (written with
    lambda_mmw=0, N=M=1, T_tr_s=0 as placeholders) stands for all points.
    """
    rows = [SummaryRow(TECH_MMWAVE, p.lambda_mmw, p.n_vehicle, p.m_rsu, p.t_tr_s,
                       p.campaign.mmw) for p in points]
    rows.append(SummaryRow(TECH_LTE, 0.0, 1, 1, 0.0, points[0].campaign.lte))
    return rows
