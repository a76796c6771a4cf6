"""Scalar unit conversions, planar geometry, and reproducible random substreams."""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

# Plain floats everywhere; the aliases only document intent at API boundaries.
Decibel = float
DbmPower = float
LinearRatio = float

TECH_LTE = "lte"
TECH_MMWAVE = "mmwave"

_MASK64 = (1 << 64) - 1


def db_to_linear(x_db: Decibel) -> LinearRatio:
    """10^(x/10); maps dB to a linear ratio (or dBm to mW)."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: LinearRatio) -> Decibel:
    """Inverse of db_to_linear. x = 0 maps to -inf; negative x is an error."""
    if x < 0:
        raise ValueError(f"negative linear value: {x}")
    if x == 0:
        return float("-inf")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class Position:
    """Planar coordinates in meters."""

    x: float
    y: float


def distance(a: Position, b: Position) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    return theta % (2.0 * math.pi)


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class RngStream:
    """Deterministic random substream keyed by a root seed and a (label, index) path.

    Distinct paths give statistically independent streams, and the same
    (root_seed, path) always reproduces the same sample sequence, so draws do
    not depend on evaluation order or on how work is split across processes.
    """

    root_seed: int
    path: tuple = ()

    def derive(self, label: str, index: int = 0) -> "RngStream":
        """Child stream; each (label, index) pair selects an independent stream."""
        return RngStream(self.root_seed, self.path + ((str(label), int(index)),))

    def generator(self) -> np.random.Generator:
        """Fresh counter-based generator positioned at the start of this stream."""
        entropy = [self.root_seed & _MASK64]
        for label, index in self.path:
            entropy.append(_label_key(label))
            entropy.append(index & _MASK64)
        bits = np.random.SeedSequence(entropy)
        return np.random.Generator(np.random.Philox(bits))
