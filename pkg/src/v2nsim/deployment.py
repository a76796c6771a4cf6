"""Roadside unit placement: independent homogeneous PPP layers per technology."""

import csv
from dataclasses import dataclass

import numpy as np

from .core import Position, RngStream, TECH_LTE, TECH_MMWAVE


@dataclass(frozen=True)
class Rsu:
    id: int
    tech: str
    position: Position


@dataclass(frozen=True)
class Deployment:
    """One sampled layout of both RSU layers over a square area."""

    area_side_m: float
    lte_rsus: tuple
    mmw_rsus: tuple
    lambda_lte: float
    lambda_mmw: float

    def layer(self, tech: str) -> tuple:
        return self.lte_rsus if tech == TECH_LTE else self.mmw_rsus


def sample_ppp(density_per_km2: float, area_side_m: float,
               rng: np.random.Generator) -> list:
    """Sample a homogeneous PPP over a square area.

    Parameters
    ----------
    density_per_km2 : expected node count per km^2 (>= 0)
    area_side_m : side of the square area in meters
    rng : generator consumed for the Poisson count and the uniform positions
    """
    if density_per_km2 < 0:
        raise ValueError(f"density must be >= 0, got {density_per_km2}")
    if area_side_m <= 0:
        raise ValueError(f"area side must be > 0, got {area_side_m}")
    area_km2 = (area_side_m / 1000.0) ** 2
    n = int(rng.poisson(density_per_km2 * area_km2))
    xs = rng.uniform(0.0, area_side_m, size=n)
    ys = rng.uniform(0.0, area_side_m, size=n)
    return [Position(float(x), float(y)) for x, y in zip(xs, ys)]


def build_deployment(area_side_m: float, lambda_lte: float, lambda_mmw: float,
                     rng: RngStream, lte_rng: RngStream = None) -> Deployment:
    """Sample both RSU layers from disjoint substreams of `rng`.

    The two layers never share a stream, so changing one density leaves the
    other layer untouched under a fixed seed. `lte_rng` optionally pins the
    LTE layer to an explicit stream (used to hold the LTE layout fixed across
    drops while the mmWave layer is resampled).
    """
    if lte_rng is None:
        lte_rng = rng.derive("lte-layer")
    lte_pos = sample_ppp(lambda_lte, area_side_m, lte_rng.generator())
    mmw_pos = sample_ppp(lambda_mmw, area_side_m, rng.derive("mmw-layer").generator())
    lte = tuple(Rsu(i, TECH_LTE, p) for i, p in enumerate(lte_pos))
    mmw = tuple(Rsu(len(lte) + k, TECH_MMWAVE, p) for k, p in enumerate(mmw_pos))
    return Deployment(area_side_m, lte, mmw, lambda_lte, lambda_mmw)


def write_deployment_csv(deployment: Deployment, path) -> None:
    """Dump all RSUs as tech,id,x_m,y_m rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tech", "id", "x_m", "y_m"])
        for rsu in deployment.lte_rsus + deployment.mmw_rsus:
            writer.writerow([rsu.tech, rsu.id,
                             repr(float(rsu.position.x)), repr(float(rsu.position.y))])
