import logging
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from ..errors import ConfigError
from ..core.geometry import sphere_lattice

_LOGGER = logging.getLogger(__name__)


@dataclass
class GradedCloud:
    nodes: np.ndarray
    boundary: np.ndarray
    support: np.ndarray
    spacings: List[float]


def grading_levels(h0: float, h_min: float, ratio: float) -> List[float]:
    if h_min <= 0.0 or h0 <= 0.0:
        raise ConfigError(f'Mesh spacings must be positive, got h0={h0}, h_min={h_min}')
    if h_min > h0:
        raise ConfigError(f'Infeasible grading: h_min={h_min} exceeds h0={h0}')
    if ratio <= 1.0:
        raise ConfigError(f'Grading ratio must exceed 1, got {ratio}')
    levels = []
    spacing = h_min
    while spacing < h0 * (1.0 - 1e-9):
        levels.append(spacing)
        spacing *= ratio
    return levels + [h0]


def lattice(spacing: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Points of spacing * Z^n inside the box, so every level is symmetric about the origin."""
    axes = [np.arange(np.ceil(l / spacing - 1e-9), np.floor(h / spacing + 1e-9) + 1) * spacing
            for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.column_stack([m.ravel() for m in mesh])


def inscribed_boundary(dim: int, radius: float, spacing: float) -> np.ndarray:
    """Vertices on the sphere of radius R; in 2-D a regular polygon with a multiple of 8 vertices."""
    return sphere_lattice(dim, radius, spacing)


def graded_cloud(support_points: np.ndarray, dim: int, radius: float, h0: float, h_min: float, ratio: float,
                 band: float) -> GradedCloud:
    """
    Nodes of B_R refined towards the support: level j of spacing h_j covers the points within
    band + 4 (h_1 + ... + h_j) of the support. Candidates closer than h_j / 2 to an accepted
    node are dropped, finest level first.
    """
    levels = grading_levels(h0, h_min, ratio)
    boundary = inscribed_boundary(dim, radius, h0)
    hull = ConvexHull(boundary)

    accepted = [boundary, support_points]
    tree_points = np.vstack(accepted)
    reach = band
    for j, spacing in enumerate(levels):
        coarsest = j == len(levels) - 1
        if coarsest:
            candidates = lattice(spacing, -np.full(dim, radius), np.full(dim, radius))
        else:
            reach += 4.0 * spacing
            if len(support_points):
                lo, hi = support_points.min(axis=0) - reach, support_points.max(axis=0) + reach
                candidates = lattice(spacing, np.maximum(lo, -radius), np.minimum(hi, radius))
                distance = cKDTree(support_points).query(candidates)[0]
                candidates = candidates[distance <= reach]
            else:
                candidates = np.empty((0, dim))

        inside = (candidates @ hull.equations[:, :-1].T + hull.equations[:, -1]).max(axis=1) < -0.5 * h0
        candidates = candidates[inside]
        if len(candidates) == 0:
            continue
        distance = cKDTree(tree_points).query(candidates)[0]
        candidates = candidates[distance >= 0.5 * spacing * (1.0 - 1e-9)]
        accepted.append(candidates)
        tree_points = np.vstack([tree_points, candidates])
        _LOGGER.debug(f'Mesh level h={spacing:.4g}: {len(candidates)} nodes')

    nodes = np.vstack(accepted)
    is_boundary = np.zeros(len(nodes), dtype=bool)
    is_boundary[:len(boundary)] = True
    is_support = np.zeros(len(nodes), dtype=bool)
    is_support[len(boundary):len(boundary) + len(support_points)] = True
    return GradedCloud(nodes, is_boundary, is_support, levels)
