"""Propagation models for the 2 GHz LTE and 28 GHz mmWave links.

Distance-dependent LOS probability, LOS/NLOS path loss, lognormal shadowing
(mmWave only), and unit-mean Rayleigh-style power fading. Large-scale state
is held over a decorrelation distance and resampled once the vehicle has
moved far enough; fading is redrawn every step.
"""

from dataclasses import dataclass, replace

import numpy as np

from .core import Position, distance, TECH_LTE, TECH_MMWAVE


@dataclass(frozen=True)
class ChannelParams:
    """Model constants. Defaults describe a dense urban scenario."""

    # mmWave LOS probability exp(-a*d), d in meters
    a_los_per_m: float = 0.0149
    # mmWave path loss: intercept + exponent * 10*log10(d_m), plus shadowing
    mmw_los_intercept_db: float = 61.4
    mmw_los_exponent: float = 2.0
    mmw_nlos_intercept_db: float = 72.0
    mmw_nlos_exponent: float = 2.92
    sigma_los_db: float = 5.8
    sigma_nlos_db: float = 8.7
    # LTE path loss: intercept + slope * log10(d_km), no shadowing
    lte_los_intercept_db: float = 103.4
    lte_los_slope_db: float = 24.2
    lte_nlos_intercept_db: float = 131.1
    lte_nlos_slope_db: float = 42.8
    # large-scale state decorrelation distances; 0 resamples every step
    los_corr_m: float = 10.0
    shadow_corr_m: float = 10.0
    # shortest distance the loss laws are evaluated at
    d_min_m: float = 1.0


DEFAULT_CHANNEL = ChannelParams()


def _scalar_or_array(value, like):
    if np.ndim(like) == 0 and np.ndim(value) > 0:
        return float(value)
    return value


def lte_los_probability(d_m, params: ChannelParams = DEFAULT_CHANNEL):
    """LOS probability of the sub-6 GHz urban-macro model; d_m in meters.

    Equals 1 up to 18 m and decays smoothly beyond; accepts arrays.
    """
    d = np.atleast_1d(np.asarray(d_m, dtype=float))
    p = np.ones_like(d)
    far = d > 18.0
    df = d[far]
    p[far] = (18.0 / df) * (1.0 - np.exp(-df / 36.0)) + np.exp(-df / 36.0)
    return p if np.ndim(d_m) else float(p[0])


def mmwave_los_probability(d_m, params: ChannelParams = DEFAULT_CHANNEL):
    """LOS probability exp(-a*d) of the 28 GHz urban model; d_m in meters."""
    p = np.exp(-params.a_los_per_m * np.asarray(d_m, dtype=float))
    return _scalar_or_array(p, d_m)


def lte_path_loss(d_m, los, params: ChannelParams = DEFAULT_CHANNEL):
    """LTE path loss in dB at distance d_m meters; the law runs on km."""
    d_km = np.maximum(np.asarray(d_m, dtype=float), params.d_min_m) / 1000.0
    log_d = np.log10(d_km)
    pl_los = params.lte_los_intercept_db + params.lte_los_slope_db * log_d
    pl_nlos = params.lte_nlos_intercept_db + params.lte_nlos_slope_db * log_d
    return _scalar_or_array(np.where(los, pl_los, pl_nlos), d_m)


def mmwave_path_loss(d_m, los, shadow_db=0.0, params: ChannelParams = DEFAULT_CHANNEL):
    """mmWave path loss in dB at distance d_m meters, including shadowing."""
    d = np.maximum(np.asarray(d_m, dtype=float), params.d_min_m)
    log_d = 10.0 * np.log10(d)
    pl_los = params.mmw_los_intercept_db + params.mmw_los_exponent * log_d
    pl_nlos = params.mmw_nlos_intercept_db + params.mmw_nlos_exponent * log_d
    return _scalar_or_array(np.where(los, pl_los, pl_nlos) + shadow_db, d_m)


def sample_shadowing(los, rng: np.random.Generator,
                     params: ChannelParams = DEFAULT_CHANNEL, size=None):
    """Lognormal shadowing in dB: zero-mean Gaussian, sigma set by LOS state."""
    sigma = params.sigma_los_db if los else params.sigma_nlos_db
    value = rng.normal(0.0, sigma, size=size)
    return float(value) if size is None else value


def sample_fading(rng: np.random.Generator, size=None):
    """Unit-mean small-scale power fading (exponential, i.e. Rayleigh envelope)."""
    value = rng.exponential(1.0, size=size)
    return float(value) if size is None else value


@dataclass(frozen=True)
class LinkState:
    """Per-link channel state for one vehicle-RSU pair at the current step."""

    rsu_id: int
    tech: str
    los: bool
    shadow_db: float
    fading_linear: float
    path_loss_db: float
    last_resample_pos: Position
    last_shadow_pos: Position


def _los_probability(tech, d_m, params):
    if tech == TECH_LTE:
        return lte_los_probability(d_m, params)
    return mmwave_los_probability(d_m, params)


def _deterministic_path_loss(tech, d_m, los, params):
    if tech == TECH_LTE:
        return lte_path_loss(d_m, los, params)
    return mmwave_path_loss(d_m, los, 0.0, params)


def init_link_state(vehicle_pos: Position, rsu, rng: np.random.Generator,
                    params: ChannelParams = DEFAULT_CHANNEL) -> LinkState:
    """Draw fresh large-scale and small-scale state at the current distance."""
    d = distance(vehicle_pos, rsu.position)
    los = bool(rng.random() < _los_probability(rsu.tech, d, params))
    shadow = sample_shadowing(los, rng, params) if rsu.tech == TECH_MMWAVE else 0.0
    fading = sample_fading(rng)
    return LinkState(
        rsu_id=rsu.id,
        tech=rsu.tech,
        los=los,
        shadow_db=shadow,
        fading_linear=fading,
        path_loss_db=_deterministic_path_loss(rsu.tech, d, los, params),
        last_resample_pos=vehicle_pos,
        last_shadow_pos=vehicle_pos,
    )


def evolve_link_state(state: LinkState, new_pos: Position, rsu,
                      rng: np.random.Generator,
                      params: ChannelParams = DEFAULT_CHANNEL) -> LinkState:
    """Advance a link to the vehicle's new position.

    LOS (with its shadowing) is redrawn once the vehicle has moved at least
    los_corr_m since the last resample; shadowing alone is additionally
    redrawn after shadow_corr_m. Fading is redrawn every call and path loss
    always tracks the current distance. Draw order is fixed: LOS, shadowing,
    fading.
    """
    d = distance(new_pos, rsu.position)
    los = state.los
    shadow = state.shadow_db
    resample_pos = state.last_resample_pos
    shadow_pos = state.last_shadow_pos
    if distance(new_pos, state.last_resample_pos) >= params.los_corr_m:
        los = bool(rng.random() < _los_probability(rsu.tech, d, params))
        if rsu.tech == TECH_MMWAVE:
            shadow = sample_shadowing(los, rng, params)
        resample_pos = new_pos
        shadow_pos = new_pos
    elif (rsu.tech == TECH_MMWAVE
          and distance(new_pos, state.last_shadow_pos) >= params.shadow_corr_m):
        shadow = sample_shadowing(los, rng, params)
        shadow_pos = new_pos
    fading = sample_fading(rng)
    return replace(
        state,
        los=los,
        shadow_db=shadow,
        fading_linear=fading,
        path_loss_db=_deterministic_path_loss(rsu.tech, d, los, params),
        last_resample_pos=resample_pos,
        last_shadow_pos=shadow_pos,
    )
