"""Vehicle mobility: trace file handling and a Manhattan-grid random walk."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import Position, distance


class TraceFormatError(ValueError):
    """Raised when a trace file violates the expected format."""


@dataclass(frozen=True)
class TraceSample:
    t_s: float
    position: Position
    speed_mps: float


@dataclass(frozen=True)
class MobilityTrace:
    """Time-ordered samples of a single vehicle. dt_s is set when spacing is uniform."""

    samples: tuple
    dt_s: float = None
    vehicle_id: int = 0

    def __len__(self):
        return len(self.samples)

    def times(self) -> np.ndarray:
        return np.array([s.t_s for s in self.samples])

    def positions_xy(self) -> np.ndarray:
        """(n, 2) array of coordinates in meters."""
        return np.array([(s.position.x, s.position.y) for s in self.samples])

    def speeds(self) -> np.ndarray:
        return np.array([s.speed_mps for s in self.samples])


_TRACE_COLUMNS = ("t_s", "vehicle_id", "x_m", "y_m", "speed_mps")


def parse_trace(path) -> MobilityTrace:
    """Read a trace CSV with header t_s,vehicle_id,x_m,y_m,speed_mps.

    Rows must be sorted by strictly increasing t_s and describe a single
    vehicle. Errors carry the 1-based physical line number.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise TraceFormatError("empty trace")
        missing = [c for c in _TRACE_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise TraceFormatError(f"missing column(s): {', '.join(missing)}")
        samples = []
        vehicle_id = None
        prev_t = None
        for line, row in enumerate(reader, start=2):
            try:
                t = float(row["t_s"])
                x = float(row["x_m"])
                y = float(row["y_m"])
                v = float(row["speed_mps"])
                vid = int(row["vehicle_id"])
            except (TypeError, ValueError):
                raise TraceFormatError(f"malformed row at line {line}") from None
            if not all(math.isfinite(u) for u in (t, x, y, v)):
                raise TraceFormatError(f"non-finite value at line {line}")
            if t < 0:
                raise TraceFormatError(f"negative timestamp at line {line}")
            if v < 0:
                raise TraceFormatError(f"negative speed at line {line}")
            if prev_t is not None and t <= prev_t:
                raise TraceFormatError(f"non-monotone timestamp at line {line}")
            if vehicle_id is None:
                vehicle_id = vid
            elif vid != vehicle_id:
                raise TraceFormatError(f"multiple vehicle ids at line {line}")
            samples.append(TraceSample(t, Position(x, y), v))
            prev_t = t
    if not samples:
        raise TraceFormatError("empty trace")
    return MobilityTrace(tuple(samples), _uniform_dt(samples), vehicle_id)


def _uniform_dt(samples) -> float:
    if len(samples) < 2:
        return None
    diffs = np.diff([s.t_s for s in samples])
    dt = float(diffs[0])
    if np.all(np.abs(diffs - dt) < 1e-9):
        return dt
    return None


def save_trace(trace: MobilityTrace, path) -> None:
    """Write a trace CSV that parse_trace reads back exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_TRACE_COLUMNS)
        for s in trace.samples:
            writer.writerow([repr(float(s.t_s)), trace.vehicle_id,
                             repr(float(s.position.x)), repr(float(s.position.y)),
                             repr(float(s.speed_mps))])


def resample(trace: MobilityTrace, dt_s: float) -> MobilityTrace:
    """Linear interpolation onto a uniform grid with finite-difference speeds.

    Sample times are t0, t0 + dt, ... up to the trace end; the recorded speed
    at each step is the displacement to the next step over dt (last step keeps
    the previous value). Resampling an already-resampled trace at the same dt
    is the identity.
    """
    if dt_s <= 0:
        raise ValueError(f"dt must be > 0, got {dt_s}")
    ts = trace.times()
    span = float(ts[-1] - ts[0])
    if span < dt_s:
        raise ValueError(f"trace span {span} s is shorter than dt {dt_s} s")
    n_out = int(math.floor(span / dt_s + 1e-9)) + 1
    new_t = ts[0] + np.arange(n_out) * dt_s
    xy = trace.positions_xy()
    new_x = np.interp(new_t, ts, xy[:, 0])
    new_y = np.interp(new_t, ts, xy[:, 1])
    disp = np.hypot(np.diff(new_x), np.diff(new_y))
    speeds = np.empty(n_out)
    speeds[:-1] = disp / dt_s
    speeds[-1] = speeds[-2] if n_out > 1 else 0.0
    samples = tuple(
        TraceSample(float(t), Position(float(x), float(y)), float(v))
        for t, x, y, v in zip(new_t, new_x, new_y, speeds)
    )
    return MobilityTrace(samples, dt_s, trace.vehicle_id)


_DRIVE = 0
_STOPPED = 1


class RandomTripWalker:
    """Random trip over a Manhattan grid of square blocks.

    The street graph has (blocks + 1)^2 intersections spaced block_m apart.
    The vehicle drives edge to edge; on arriving at an intersection it halts
    for stop_time_s with probability stop_prob (traffic-light surrogate) and
    otherwise continues, turning uniformly among feasible directions (no
    U-turns except at a dead end). Speed follows a trapezoidal profile with
    constant acceleration up to v_max_mps and matching deceleration into
    stops. Counters for visited intersections and stops support calibration
    checks.
    """

    def __init__(self, blocks, block_m, v_max_mps, stop_prob, stop_time_s,
                 rng: np.random.Generator, accel_mps2=2.0, origin_xy=(0.0, 0.0)):
        if blocks < 1:
            raise ValueError(f"grid must have at least one block, got {blocks}")
        if block_m <= 0:
            raise ValueError(f"block length must be > 0, got {block_m}")
        if v_max_mps <= 0:
            raise ValueError(f"top speed must be > 0, got {v_max_mps}")
        if accel_mps2 <= 0:
            raise ValueError(f"acceleration must be > 0, got {accel_mps2}")
        if not 0.0 <= stop_prob <= 1.0:
            raise ValueError(f"stop probability must lie in [0, 1], got {stop_prob}")
        self.blocks = int(blocks)
        self.block_m = float(block_m)
        self.v_max = float(v_max_mps)
        self.accel = float(accel_mps2)
        self.stop_prob = float(stop_prob)
        self.stop_time = float(stop_time_s)
        self.origin_xy = (float(origin_xy[0]), float(origin_xy[1]))
        self.rng = rng
        self.intersections_visited = 0
        self.stops = 0

        node = (int(rng.integers(0, self.blocks + 1)),
                int(rng.integers(0, self.blocks + 1)))
        self._start_edge(node, prev_node=None)
        self.speed = 0.0
        self.mode = _DRIVE
        self.stop_timer = 0.0

    def _neighbors(self, node):
        i, j = node
        out = []
        if i > 0:
            out.append((i - 1, j))
        if i < self.blocks:
            out.append((i + 1, j))
        if j > 0:
            out.append((i, j - 1))
        if j < self.blocks:
            out.append((i, j + 1))
        return out

    def _start_edge(self, node, prev_node):
        choices = [n for n in self._neighbors(node) if n != prev_node]
        if not choices:
            choices = [prev_node]
        pick = int(self.rng.integers(0, len(choices)))
        self.from_node = node
        self.to_node = choices[pick]
        self.into_edge_m = 0.0
        self.will_stop = bool(self.rng.random() < self.stop_prob)

    def position(self) -> Position:
        fx, fy = self.from_node
        tx, ty = self.to_node
        frac = self.into_edge_m / self.block_m
        x = (fx + (tx - fx) * frac) * self.block_m + self.origin_xy[0]
        y = (fy + (ty - fy) * frac) * self.block_m + self.origin_xy[1]
        return Position(x, y)

    def _arrive(self):
        self.intersections_visited += 1
        node, prev = self.to_node, self.from_node
        if self.will_stop:
            self.stops += 1
            self.speed = 0.0
            self.mode = _STOPPED
            self.stop_timer = self.stop_time
            self._pending = (node, prev)
            self.from_node = node
            self.to_node = node
            self.into_edge_m = 0.0
            return 0.0
        leftover = self._leftover
        self._start_edge(node, prev)
        return leftover

    def step(self, dt_s: float) -> None:
        """Advance the walk by one time step."""
        if self.mode == _STOPPED:
            self.stop_timer -= dt_s
            if self.stop_timer <= 1e-9:
                node, prev = self._pending
                self._start_edge(node, prev)
                self.mode = _DRIVE
            return
        remaining = self.block_m - self.into_edge_m
        brake_m = self.speed ** 2 / (2.0 * self.accel)
        if self.will_stop and remaining <= brake_m + self.speed * dt_s:
            self.speed = max(self.speed - self.accel * dt_s, 0.0)
        else:
            self.speed = min(self.speed + self.accel * dt_s, self.v_max)
        advance = self.speed * dt_s
        while advance >= self.block_m - self.into_edge_m - 1e-12:
            self._leftover = advance - (self.block_m - self.into_edge_m)
            advance = self._arrive()
            if self.mode == _STOPPED:
                return
        self.into_edge_m += advance

    def walk(self, duration_s: float, dt_s: float) -> MobilityTrace:
        """Sample the walk every dt_s for duration_s seconds."""
        if duration_s <= 0:
            raise ValueError(f"duration must be > 0, got {duration_s}")
        if dt_s <= 0:
            raise ValueError(f"dt must be > 0, got {dt_s}")
        n = int(round(duration_s / dt_s))
        samples = []
        for k in range(n):
            if k > 0:
                self.step(dt_s)
            pos = self.position()
            samples.append(TraceSample(k * dt_s, pos, self.speed))
        return MobilityTrace(tuple(samples), dt_s, 0)


def synth_randomtrip_trace(blocks, block_m, duration_s, v_max_mps, stop_prob,
                           stop_time_s, rng: np.random.Generator,
                           dt_s=0.1, accel_mps2=2.0,
                           origin_xy=(0.0, 0.0)) -> MobilityTrace:
    """Generate a synthetic urban trace; see RandomTripWalker for the model."""
    walker = RandomTripWalker(blocks, block_m, v_max_mps, stop_prob, stop_time_s,
                              rng, accel_mps2, origin_xy)
    return walker.walk(duration_s, dt_s)
