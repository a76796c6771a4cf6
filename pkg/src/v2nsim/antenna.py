"""Planar-array abstraction: two-lobe azimuth patterns and slotted beam tracking."""

import math
import warnings
from dataclasses import dataclass, replace

from .core import Position, normalize_angle, wrap_angle

_USUAL_ELEMENT_COUNTS = (1, 4, 16, 64)


@dataclass(frozen=True)
class ArrayConfig:
    """Sectored two-lobe stand-in for a uniform planar array."""

    elements: int
    main_gain_db: float
    side_gain_db: float
    beamwidth_rad: float


def make_array(elements: int, side_lobe_drop_db: float = 20.0,
               side_floor_dbi: float = -10.0,
               beamwidth_scale_deg: float = 102.0) -> ArrayConfig:
    """Build the pattern for an array with the given element count.

    Main-lobe gain is 10*log10(elements); the side lobe sits
    side_lobe_drop_db below it but never under side_floor_dbi. Beamwidth
    shrinks as beamwidth_scale_deg / sqrt(elements). A single element is
    an omni with 0 dBi everywhere.
    """
    if elements < 1:
        raise ValueError(f"element count must be >= 1, got {elements}")
    if elements not in _USUAL_ELEMENT_COUNTS:
        warnings.warn(f"unusual element count {elements}", stacklevel=2)
    if elements == 1:
        return ArrayConfig(1, 0.0, 0.0, 2.0 * math.pi)
    main = 10.0 * math.log10(elements)
    side = max(main - side_lobe_drop_db, side_floor_dbi)
    beamwidth = math.radians(beamwidth_scale_deg / math.sqrt(elements))
    return ArrayConfig(int(elements), main, side, beamwidth)


def pattern_gain(array: ArrayConfig, offset_rad: float) -> float:
    """Gain in dBi at an angular offset from boresight.

    Main-lobe gain inside half the beamwidth (inclusive), side-lobe gain
    elsewhere; symmetric in the offset.
    """
    offset = float(offset_rad)
    if not -math.pi <= offset < math.pi:
        # wrap only out-of-range offsets: the modulo arithmetic would nudge
        # an in-range value by one ulp, which matters at the inclusive edge
        offset = wrap_angle(offset)
    if abs(offset) <= array.beamwidth_rad / 2.0:
        return array.main_gain_db
    return array.side_gain_db


@dataclass(frozen=True)
class BeamState:
    """Beam-pair bookkeeping between realignments of one mmWave link."""

    vehicle_boresight_rad: float
    rsu_boresight_rad: float
    aligned_at_slot: int
    serving_rsu: int
    lost: bool = False


def realign(vehicle_pos: Position, rsu, slot_index: int) -> BeamState:
    """Point both beams along the joining line at a slot boundary.

    For coincident positions the vehicle boresight defaults to 0 rad.
    """
    theta = math.atan2(rsu.position.y - vehicle_pos.y, rsu.position.x - vehicle_pos.x)
    return BeamState(
        vehicle_boresight_rad=normalize_angle(theta),
        rsu_boresight_rad=normalize_angle(theta + math.pi),
        aligned_at_slot=int(slot_index),
        serving_rsu=rsu.id,
        lost=False,
    )


def tracked_gain(beam: BeamState, vehicle_pos: Position, rsu,
                 vehicle_array: ArrayConfig, rsu_array: ArrayConfig):
    """Combined pattern gain of the tracked beam pair at the current geometry.

    Once either end drifts beyond half its beamwidth the link counts as lost
    and stays lost (side-lobe gains at both ends) until the next realign.
    Returns (gain_db, updated BeamState).
    """
    if rsu.id != beam.serving_rsu:
        raise ValueError(f"beam tracks RSU {beam.serving_rsu}, got {rsu.id}")
    if beam.lost:
        return vehicle_array.side_gain_db + rsu_array.side_gain_db, beam
    theta = math.atan2(rsu.position.y - vehicle_pos.y, rsu.position.x - vehicle_pos.x)
    vehicle_off = wrap_angle(theta - beam.vehicle_boresight_rad)
    rsu_off = wrap_angle((theta + math.pi) - beam.rsu_boresight_rad)
    if (abs(vehicle_off) > vehicle_array.beamwidth_rad / 2.0
            or abs(rsu_off) > rsu_array.beamwidth_rad / 2.0):
        lost_beam = replace(beam, lost=True)
        return vehicle_array.side_gain_db + rsu_array.side_gain_db, lost_beam
    gain = pattern_gain(vehicle_array, vehicle_off) + pattern_gain(rsu_array, rsu_off)
    return gain, beam
