"""Monge-Ampere measure of piecewise linear convex functions: |du(E)| for node sets E."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..const import DUALITY_TOLERANCE
from ..errors import ConfigError
from .cloud import Region
from .envelope import PLConvexFunction, check_monotonicity
from .geometry import halfspace_volume, hull_volume

_LOGGER = logging.getLogger(__name__)

ORACLE_CHUNK = 4096


@dataclass
class MAAtomTable:
    atoms: np.ndarray
    boundary_atoms: np.ndarray

    def total(self) -> float:
        return float(self.atoms.sum())

    def as_dict(self) -> Dict[int, float]:
        return {int(i): float(self.atoms[i]) for i in np.flatnonzero(self.atoms)}


def ma_atoms(fn: PLConvexFunction) -> MAAtomTable:
    """
    Atom at node i is the volume of the convex hull of the gradients of the facets around i.
    Boundary nodes only see part of their normal cone; that finite part is kept apart.
    """
    check_monotonicity(fn)
    cloud = fn.cloud
    atoms = np.zeros(cloud.size)
    boundary_atoms = np.zeros(cloud.size)

    for node, facets in enumerate(fn.incident_facets()):
        if len(facets) <= fn.dim or not fn.active[node]:
            continue
        volume = hull_volume(fn.gradients[facets])
        if cloud.boundary_mask[node]:
            boundary_atoms[node] = volume
        else:
            atoms[node] = volume

    _LOGGER.debug(f'Interior Monge-Ampere mass {atoms.sum():.6g}, boundary part {boundary_atoms.sum():.6g}')
    return MAAtomTable(atoms, boundary_atoms)


def ma_measure(fn: PLConvexFunction, region: Region, table: Optional[MAAtomTable] = None) -> float:
    table = table if table is not None else ma_atoms(fn)
    return float(table.atoms[region.node_mask(fn.cloud)].sum())


def conjugate_values(fn: PLConvexFunction, slopes: np.ndarray) -> np.ndarray:
    """u*(p) = max over active nodes of <p, x> - u(x)."""
    nodes = fn.cloud.nodes[fn.active]
    values = fn.values[fn.active]
    slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
    return (slopes @ nodes.T - values).max(axis=1)


def subgradient_oracle(fn: PLConvexFunction, region: Region, resolution: float) -> float:
    """
    Brute force |du(region)|: rasterize gradient space and keep the cells whose centre p
    satisfies u*(p) + u(x) = <p, x> for some node x in the region.
    """
    if resolution <= 0.0:
        raise ConfigError(f'Oracle resolution must be positive, got {resolution}')

    cloud = fn.cloud
    mask = region.node_mask(cloud) & cloud.interior_mask & fn.active
    if not mask.any():
        return 0.0

    incident = fn.incident_facets()
    facets = np.unique(np.concatenate([incident[i] for i in np.flatnonzero(mask)]))
    if len(facets) == 0:
        return 0.0
    slopes = fn.gradients[facets]
    lo = slopes.min(axis=0) - resolution
    hi = slopes.max(axis=0) + resolution
    axes = [np.arange(l + resolution / 2.0, h, resolution) for l, h in zip(lo, hi)]
    raster = np.column_stack([a.ravel() for a in np.meshgrid(*axes, indexing='ij')])

    nodes, values = cloud.nodes[mask], fn.values[mask]
    slack = DUALITY_TOLERANCE * (1.0 + np.abs(values))
    hits = 0
    for start in range(0, len(raster), ORACLE_CHUNK):
        chunk = raster[start:start + ORACLE_CHUNK]
        gap = conjugate_values(fn, chunk)[:, None] + values[None, :] - chunk @ nodes.T
        hits += int((gap <= slack[None, :]).any(axis=1).sum())

    volume = hits * resolution ** cloud.dim
    _LOGGER.debug(f'Oracle hit {hits} of {len(raster)} raster cells, volume {volume:.6g}')
    return volume


def local_atom(center: np.ndarray, value: float, points: np.ndarray, values: np.ndarray) -> float:
    """
    Volume of {p : value + <p, x_j - center> <= u_j for all neighbours j}, the
    subdifferential at a node whose lifted value is `value`. Nonincreasing in `value`.
    """
    normals = points - center
    offsets = values - value
    if np.all(offsets < 0.0):
        return 0.0
    spread = float(np.abs(offsets).max()) + 1.0
    bound = 10.0 * spread / float(np.linalg.norm(normals, axis=1).min())
    box = np.full(points.shape[1], bound)
    return halfspace_volume(normals, offsets, -box, box)

