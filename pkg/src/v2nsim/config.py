"""Run configuration: defaults, flat key=value files, overrides, and hashing."""

import dataclasses
import hashlib
from dataclasses import dataclass

from .channel import ChannelParams
from .link import RadioParams


class ConfigError(ValueError):
    """Raised for unknown keys, malformed values, or out-of-range settings."""


@dataclass(frozen=True)
class SimConfig:
    """Every knob of a simulation run. Field names double as config-file keys."""

    # scenario geometry and deployment densities (RSU per km^2)
    area_side_m: float = 1000.0
    lambda_lte: float = 4.0
    lambda_mmw: float = 50.0
    # resample the LTE layer every drop unless pinned
    fixed_lte_layout: bool = False

    # radios
    tx_power_lte_dbm: float = 46.0
    tx_power_mmw_dbm: float = 30.0
    bandwidth_lte_hz: float = 20e6
    bandwidth_mmw_hz: float = 1e9
    carrier_lte_hz: float = 2e9
    carrier_mmw_hz: float = 28e9
    noise_figure_db: float = 10.0
    outage_threshold_db: float = -5.0
    # SNR by default; SINR adds other-cell mmWave interference
    sinr_mode: bool = False

    # antenna arrays (mmWave beamforming; LTE stays omni)
    vehicle_elements: int = 16
    rsu_elements: int = 64
    side_lobe_drop_db: float = 20.0
    side_lobe_floor_dbi: float = -10.0
    beamwidth_scale_deg: float = 102.0
    # beam tracking period in seconds; 0 keeps beams perfectly aligned
    t_tr_s: float = 0.1

    # channel model constants
    a_los_per_m: float = 0.0149
    mmw_pl_los_intercept_db: float = 61.4
    mmw_pl_los_exponent: float = 2.0
    mmw_pl_nlos_intercept_db: float = 72.0
    mmw_pl_nlos_exponent: float = 2.92
    sigma_los_db: float = 5.8
    sigma_nlos_db: float = 8.7
    lte_pl_los_intercept_db: float = 103.4
    lte_pl_los_slope_db: float = 24.2
    lte_pl_nlos_intercept_db: float = 131.1
    lte_pl_nlos_slope_db: float = 42.8
    los_corr_m: float = 10.0
    shadow_corr_m: float = 10.0
    d_min_m: float = 1.0
    mmw_fading: bool = True
    # diagnostics: pin the LOS state instead of drawing it (none|los|nlos)
    force_los: str = "none"

    # mobility
    dt_s: float = 0.1
    duration_s: float = 250.0
    trace_path: str = None
    per_drop_trace: bool = False
    grid_blocks: int = 4
    block_m: float = 200.0
    v_max_mps: float = 13.89
    accel_mps2: float = 2.0
    stop_prob: float = 0.3
    stop_time_s: float = 30.0

    # campaign
    n_drops: int = 200
    root_seed: int = 1
    stability_mode: str = "per-drop"
    workers: int = 1
    emit_timeseries: bool = False

    # sweep grids
    lambda_grid: tuple = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0)
    array_grid: tuple = ((1, 64), (4, 4), (16, 64))
    ttr_grid: tuple = (0.0,)

    def channel_params(self) -> ChannelParams:
        return ChannelParams(
            a_los_per_m=self.a_los_per_m,
            mmw_los_intercept_db=self.mmw_pl_los_intercept_db,
            mmw_los_exponent=self.mmw_pl_los_exponent,
            mmw_nlos_intercept_db=self.mmw_pl_nlos_intercept_db,
            mmw_nlos_exponent=self.mmw_pl_nlos_exponent,
            sigma_los_db=self.sigma_los_db,
            sigma_nlos_db=self.sigma_nlos_db,
            lte_los_intercept_db=self.lte_pl_los_intercept_db,
            lte_los_slope_db=self.lte_pl_los_slope_db,
            lte_nlos_intercept_db=self.lte_pl_nlos_intercept_db,
            lte_nlos_slope_db=self.lte_pl_nlos_slope_db,
            los_corr_m=self.los_corr_m,
            shadow_corr_m=self.shadow_corr_m,
            d_min_m=self.d_min_m,
        )

    def lte_radio(self) -> RadioParams:
        return RadioParams(self.tx_power_lte_dbm, self.bandwidth_lte_hz,
                           self.carrier_lte_hz, self.noise_figure_db,
                           self.outage_threshold_db)

    def mmw_radio(self) -> RadioParams:
        return RadioParams(self.tx_power_mmw_dbm, self.bandwidth_mmw_hz,
                           self.carrier_mmw_hz, self.noise_figure_db,
                           self.outage_threshold_db)


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}
# fields that never change simulation results; excluded from the config hash
_NON_EFFECTIVE = ("workers", "emit_timeseries")

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}


def _parse_bool(text, key):
    try:
        return _BOOL_WORDS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {text!r}") from None


def _parse_float_tuple(text, key):
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def _parse_array_grid(text, key):
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            n, m = part.lower().split("x")
            pairs.append((int(n), int(m)))
        except ValueError:
            raise ConfigError(f"{key}: expected NxM pairs like 16x64, got {part!r}") from None
    return tuple(pairs)


def coerce_value(key: str, text: str):
    """Convert a config-file string to the type of the named SimConfig field."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key: {key}")
    if key == "array_grid":
        return _parse_array_grid(text, key)
    if key in ("lambda_grid", "ttr_grid"):
        return _parse_float_tuple(text, key)
    default = _FIELDS[key].default
    text = text.strip()
    if key == "trace_path":
        return None if text.lower() == "none" else text
    if isinstance(default, bool):
        return _parse_bool(text, key)
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if isinstance(default, float):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines; `#` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        values[key] = coerce_value(key, value)
    return values


def load_config(path=None, overrides=None) -> SimConfig:
    """Build a validated SimConfig from an optional file plus overrides."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    if overrides:
        values.update(overrides)
    config = dataclasses.replace(SimConfig(), **values)
    validate(config)
    return config


def parse_override(item: str) -> tuple:
    """Parse one --set KEY=VALUE argument."""
    if "=" not in item:
        raise ConfigError(f"override must look like key=value, got {item!r}")
    key, _, value = item.partition("=")
    key = key.strip()
    return key, coerce_value(key, value)


def _require(ok: bool, message: str):
    if not ok:
        raise ConfigError(message)


def validate(config: SimConfig) -> None:
    """Reject settings outside the supported ranges; messages name the key."""
    _require(config.area_side_m > 0, f"area_side_m must be > 0 (got {config.area_side_m})")
    _require(config.lambda_lte >= 0, f"lambda_lte must be >= 0 (got {config.lambda_lte})")
    _require(config.lambda_mmw >= 0, f"lambda_mmw must be >= 0 (got {config.lambda_mmw})")
    _require(config.bandwidth_lte_hz > 0,
             f"bandwidth_lte_hz must be > 0 (got {config.bandwidth_lte_hz})")
    _require(config.bandwidth_mmw_hz > 0,
             f"bandwidth_mmw_hz must be > 0 (got {config.bandwidth_mmw_hz})")
    _require(config.vehicle_elements >= 1,
             f"vehicle_elements must be >= 1 (got {config.vehicle_elements})")
    _require(config.rsu_elements >= 1,
             f"rsu_elements must be >= 1 (got {config.rsu_elements})")
    _require(config.dt_s > 0, f"dt_s must be > 0 (got {config.dt_s})")
    _require(config.duration_s > 0, f"duration_s must be > 0 (got {config.duration_s})")
    for name in ("t_tr_s",):
        _check_ttr(getattr(config, name), name, config.dt_s)
    for i, value in enumerate(config.ttr_grid):
        _check_ttr(value, f"ttr_grid[{i}]", config.dt_s)
    _require(config.sigma_los_db >= 0, f"sigma_los_db must be >= 0 (got {config.sigma_los_db})")
    _require(config.sigma_nlos_db >= 0,
             f"sigma_nlos_db must be >= 0 (got {config.sigma_nlos_db})")
    _require(config.los_corr_m >= 0, f"los_corr_m must be >= 0 (got {config.los_corr_m})")
    _require(config.shadow_corr_m >= 0,
             f"shadow_corr_m must be >= 0 (got {config.shadow_corr_m})")
    _require(config.d_min_m > 0, f"d_min_m must be > 0 (got {config.d_min_m})")
    _require(config.force_los in ("none", "los", "nlos"),
             f"force_los must be none, los or nlos (got {config.force_los!r})")
    _require(config.grid_blocks >= 1, f"grid_blocks must be >= 1 (got {config.grid_blocks})")
    _require(config.block_m > 0, f"block_m must be > 0 (got {config.block_m})")
    _require(config.v_max_mps > 0, f"v_max_mps must be > 0 (got {config.v_max_mps})")
    _require(config.accel_mps2 > 0, f"accel_mps2 must be > 0 (got {config.accel_mps2})")
    _require(0.0 <= config.stop_prob <= 1.0,
             f"stop_prob must lie in [0, 1] (got {config.stop_prob})")
    _require(config.stop_time_s >= 0, f"stop_time_s must be >= 0 (got {config.stop_time_s})")
    _require(config.n_drops >= 1, f"n_drops must be >= 1 (got {config.n_drops})")
    _require(config.root_seed >= 0, f"root_seed must be >= 0 (got {config.root_seed})")
    _require(config.stability_mode in ("pooled", "per-drop"),
             f"stability_mode must be pooled or per-drop (got {config.stability_mode!r})")
    _require(config.workers >= 1, f"workers must be >= 1 (got {config.workers})")
    _require(len(config.lambda_grid) > 0, "lambda_grid must not be empty")
    _require(len(config.array_grid) > 0, "array_grid must not be empty")
    _require(len(config.ttr_grid) > 0, "ttr_grid must not be empty")
    for i, (n, m) in enumerate(config.array_grid):
        _require(n >= 1 and m >= 1, f"array_grid[{i}] elements must be >= 1 (got {n}x{m})")
    for i, lam in enumerate(config.lambda_grid):
        _require(lam >= 0, f"lambda_grid[{i}] must be >= 0 (got {lam})")


def _check_ttr(value, name, dt_s):
    _require(value >= 0, f"{name} must be >= 0 (got {value})")
    if value > 0:
        ratio = value / dt_s
        _require(abs(ratio - round(ratio)) < 1e-9,
                 f"{name} must be an integer multiple of dt_s (got {value} with dt_s={dt_s})")


def _canonical(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "(" + ",".join(_canonical(v) for v in value) + ")"
    return str(value)


def config_hash(config: SimConfig) -> str:
    """SHA-256 over the canonical text of every result-affecting field."""
    lines = []
    for name in sorted(_FIELDS):
        if name in _NON_EFFECTIVE:
            continue
        lines.append(f"{name}={_canonical(getattr(config, name))}")
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
