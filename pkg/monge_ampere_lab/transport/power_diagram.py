import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..core.geometry import BOUNDARY_LABEL, clip_polygon, lower_hull, polygon_area, polygon_centroid
from ..errors import DegenerateCloudError, GeometryError

_LOGGER = logging.getLogger(__name__)

TILING_TOLERANCE = 1e-9
EDGE_EPSILON = 1e-14


@dataclass(eq=False)
class PowerDiagram:
    """
    Laguerre cells {x : |x - p_i|^2 - psi_i <= |x - p_j|^2 - psi_j} clipped to a convex polygon.

    pairs[e] = (i, j) with i < j shares the segment segments[e] of length lengths[e].
    """
    sites: np.ndarray
    weights: np.ndarray
    source: np.ndarray
    cells: List[np.ndarray]
    areas: np.ndarray
    pairs: np.ndarray
    segments: np.ndarray
    lengths: np.ndarray

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def source_area(self) -> float:
        return polygon_area(self.source)

    @property
    def tiling_defect(self) -> float:
        """Relative gap between the summed cell areas and the source area."""
        return abs(float(self.areas.sum()) - self.source_area) / self.source_area

    @cached_property
    def neighbors(self) -> List[np.ndarray]:
        adjacency = [[] for _ in range(self.size)]
        for i, j in self.pairs:
            adjacency[i].append(j)
            adjacency[j].append(i)
        return [np.array(sorted(a), dtype=int) for a in adjacency]

    def centroids(self) -> np.ndarray:
        out = np.zeros((self.size, 2))
        for i, cell in enumerate(self.cells):
            if len(cell) >= 3:
                out[i] = polygon_centroid(cell)
        return out


def candidate_pairs(sites: np.ndarray, weights: np.ndarray) -> List[np.ndarray]:
    """Edges of the regular triangulation, i.e. the lower hull of the lifted sites (p, |p|^2 - psi)."""
    count = len(sites)
    if count <= 3:
        return [np.setdiff1d(np.arange(count), [i]) for i in range(count)]
    try:
        hull = lower_hull(sites, np.einsum('ij,ij->i', sites, sites) - weights)
    except DegenerateCloudError:
        _LOGGER.debug('Collinear sites, every pair is a candidate')
        return [np.setdiff1d(np.arange(count), [i]) for i in range(count)]
    adjacency = [set() for _ in range(count)]
    for simplex in hull.simplices:
        for a, b in combinations(simplex, 2):
            adjacency[a].add(b)
            adjacency[b].add(a)
    return [np.array(sorted(a), dtype=int) for a in adjacency]


def halfplanes(polygon: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Outward normals and offsets of a counterclockwise convex polygon."""
    edges = np.roll(polygon, -1, axis=0) - polygon
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    return normals, np.einsum('ij,ij->i', normals, polygon)


def _clip_cell(start: np.ndarray, labels: np.ndarray, site: int, sites: np.ndarray, lifted: np.ndarray,
               others: np.ndarray):
    cell = start
    for j in others:
        normal = 2.0 * (sites[j] - sites[site])
        offset = lifted[j] - lifted[site]
        cell, labels = clip_polygon(cell, labels, normal, offset, int(j), EDGE_EPSILON)
        if len(cell) == 0:
            break
    return cell, labels


def power_diagram(sites: np.ndarray, weights: np.ndarray, source: np.ndarray) -> PowerDiagram:
    """
    Clipped power cells, their areas and the shared edges.

    Each cell is first cut from the bounding box of the source; only cells that leave the source
    are cut again starting from the source polygon itself.

    :raises GeometryError: for duplicate sites.
    """
    sites = np.asarray(sites, dtype=float)
    weights = np.asarray(weights, dtype=float)
    source = np.asarray(source, dtype=float)
    if polygon_area(source) < 0.0:
        source = source[::-1]
    count = len(sites)
    if count > 1:
        duplicates = cKDTree(sites).query_pairs(1e-12)
        if duplicates:
            i, j = sorted(next(iter(duplicates)))
            raise GeometryError(f'Sites {i} and {j} coincide')

    lifted = np.einsum('ij,ij->i', sites, sites) - weights
    candidates = candidate_pairs(sites, weights)
    normals, offsets = halfplanes(source)
    slack = 1e-12 * max(float(np.ptp(source, axis=0).max()), 1.0)
    lo, hi = source.min(axis=0), source.max(axis=0)
    frame = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    frame_labels = np.full(4, BOUNDARY_LABEL, dtype=int)
    source_labels = np.full(len(source), BOUNDARY_LABEL, dtype=int)

    cells, areas = [], np.zeros(count)
    shared: Dict[Tuple[int, int], np.ndarray] = {}
    for i in range(count):
        cell, labels = _clip_cell(frame, frame_labels, i, sites, lifted, candidates[i])
        if len(cell) and np.any(cell @ normals.T > offsets + slack):
            cell, labels = _clip_cell(source, source_labels, i, sites, lifted, candidates[i])
        cells.append(cell)
        areas[i] = polygon_area(cell) if len(cell) >= 3 else 0.0
        for k, j in enumerate(labels):
            if j == BOUNDARY_LABEL:
                continue
            segment = np.array([cell[k], cell[(k + 1) % len(cell)]])
            key = (min(i, int(j)), max(i, int(j)))
            shared.setdefault(key, segment)

    keys = sorted(k for k, s in shared.items() if np.linalg.norm(s[1] - s[0]) > EDGE_EPSILON)
    pairs = np.array(keys, dtype=int).reshape(-1, 2)
    segments = np.array([shared[k] for k in keys]).reshape(-1, 2, 2)
    lengths = np.linalg.norm(segments[:, 1] - segments[:, 0], axis=1)

    diagram = PowerDiagram(sites, weights, source, cells, areas, pairs, segments, lengths)
    if diagram.tiling_defect > TILING_TOLERANCE:
        _LOGGER.warning(f'Power cells miss the source area by {diagram.tiling_defect:.3e} (relative)')
    return diagram
