import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..const import DEFAULT_JUMP_THRESHOLD
from ..errors import ConfigError
from .dual import DualSolution

_LOGGER = logging.getLogger(__name__)

PERSISTENCE_REACH = 2.0
PERSISTENCE_JUMP = 0.5
EDGE_SAMPLES = 5


@dataclass(eq=False)
class SingularGraph:
    """
    Power diagram edges across which the transport map jumps by more than the threshold. For
    quadratic cost the jump p_i - p_j is normal to the edge, so its length is the line density f.
    """
    segments: np.ndarray
    density: np.ndarray
    pairs: np.ndarray
    persistent: np.ndarray
    threshold: float
    cell_size: float

    @property
    def size(self) -> int:
        return len(self.segments)

    @property
    def empty(self) -> bool:
        return self.size == 0

    @property
    def midpoints(self) -> np.ndarray:
        return self.segments.mean(axis=1)

    @property
    def total_length(self) -> float:
        return float(np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1).sum())

    def points(self, per_edge: int = EDGE_SAMPLES) -> np.ndarray:
        """Evenly spaced samples along every edge, endpoints included."""
        if self.empty:
            return np.empty((0, 2))
        t = np.linspace(0.0, 1.0, per_edge)[None, :, None]
        return (self.segments[:, :1] * (1.0 - t) + self.segments[:, 1:] * t).reshape(-1, 2)

    def mean_density(self) -> float:
        """Length weighted mean of f."""
        if self.empty:
            return float('nan')
        lengths = np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1)
        return float(np.dot(lengths, self.density) / lengths.sum())

    def polylines(self, tol: float = 1e-9) -> List[np.ndarray]:
        """Chains of edges joined at endpoints of degree two."""
        if self.empty:
            return []
        ends = self.segments.reshape(-1, 2)
        _, key = np.unique(np.round(ends / tol).astype(np.int64), axis=0, return_inverse=True)
        key = key.reshape(-1, 2)
        touching = {}
        for e, (a, b) in enumerate(key):
            touching.setdefault(int(a), []).append(e)
            touching.setdefault(int(b), []).append(e)

        lookup = {int(k): ends[i] for i, k in enumerate(key.ravel())}
        used = np.zeros(self.size, dtype=bool)
        lines = []
        for start in range(self.size):
            if used[start]:
                continue
            used[start] = True
            chain = [int(key[start, 0]), int(key[start, 1])]
            for forward in (True, False):
                while True:
                    tip = chain[-1] if forward else chain[0]
                    nxt = [e for e in touching[tip] if not used[e]] if len(touching[tip]) == 2 else []
                    if not nxt:
                        break
                    e = nxt[0]
                    used[e] = True
                    other = int(key[e, 1] if key[e, 0] == tip else key[e, 0])
                    if forward:
                        chain.append(other)
                    else:
                        chain.insert(0, other)
            lines.append(np.array([lookup[k] for k in chain]))
        return lines


def jump_edges(dual: DualSolution, threshold: float):
    diagram = dual.diagram
    if len(diagram.pairs) == 0:
        return np.empty(0, dtype=int), np.empty(0)
    jumps = np.linalg.norm(dual.sites[diagram.pairs[:, 0]] - dual.sites[diagram.pairs[:, 1]], axis=1)
    keep = np.flatnonzero(jumps > threshold)
    return keep, jumps[keep]


def _segment_distance(points: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """(P, S) distances from points to segments."""
    start, stop = segments[:, 0], segments[:, 1]
    direction = stop - start
    length_sq = np.maximum(np.einsum('ij,ij->i', direction, direction), 1e-300)
    offset = points[:, None, :] - start[None, :, :]
    t = np.clip(np.einsum('psk,sk->ps', offset, direction) / length_sq, 0.0, 1.0)
    nearest = start[None, :, :] + t[..., None] * direction[None, :, :]
    return np.linalg.norm(points[:, None, :] - nearest, axis=2)


def _same_source(coarse: DualSolution, fine: DualSolution) -> bool:
    a, b = coarse.source, fine.source
    return a.shape == b.shape and np.allclose(a, b, rtol=0.0, atol=1e-12)


def detect_singular_set(coarse: DualSolution, fine: Optional[DualSolution] = None,
                        threshold: float = DEFAULT_JUMP_THRESHOLD) -> SingularGraph:
    """
    Keeps the edges of the coarse diagram whose jump exceeds the threshold. With a finer level an
    edge must also have a jump edge of the fine diagram within twice the coarse cell size whose
    jump differs by at most half.

    :raises ConfigError: when the two levels were solved on different sources.
    """
    if fine is not None and not _same_source(coarse, fine):
        raise ConfigError('Refinement levels of the singular set use different source domains')

    keep, jumps = jump_edges(coarse, threshold)
    segments = coarse.diagram.segments[keep].reshape(-1, 2, 2)
    persistent = np.ones(len(keep), dtype=bool)

    if fine is not None and len(keep):
        fine_keep, fine_jumps = jump_edges(fine, threshold)
        if len(fine_keep) == 0:
            persistent[:] = False
        else:
            fine_segments = fine.diagram.segments[fine_keep]
            reach = PERSISTENCE_REACH * coarse.cell_size
            tree = cKDTree(fine_segments.mean(axis=1))
            # candidate fine edges around each coarse midpoint; half the fine edge length is added to the reach
            half = 0.5 * np.linalg.norm(fine_segments[:, 1] - fine_segments[:, 0], axis=1).max()
            for row, middle in enumerate(segments.mean(axis=1)):
                near = np.array(tree.query_ball_point(middle, reach + half), dtype=int)
                if len(near) == 0:
                    persistent[row] = False
                    continue
                close = _segment_distance(middle[None, :], fine_segments[near])[0] <= reach
                similar = np.abs(fine_jumps[near] - jumps[row]) <= PERSISTENCE_JUMP * jumps[row]
                persistent[row] = bool(np.any(close & similar))
        dropped = int((~persistent).sum())
        if dropped:
            _LOGGER.info(f'{dropped} of {len(keep)} jump edges do not persist under refinement')

    selected = persistent if fine is not None else np.ones(len(keep), dtype=bool)
    graph = SingularGraph(segments[selected], jumps[selected], coarse.diagram.pairs[keep][selected],
                          persistent[selected], float(threshold), coarse.cell_size)
    _LOGGER.info(f'Singular graph: {graph.size} edges, length {graph.total_length:.4g}')
    return graph


def distance_to_segments(points: np.ndarray, segments: Sequence[Sequence[Sequence[float]]]) -> np.ndarray:
    """Distance from every point to the nearest of the given segments."""
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(points) == 0:
        return np.empty(0)
    return _segment_distance(np.asarray(points, dtype=float), segments).min(axis=1)


def hausdorff_to_segments(graph: SingularGraph, segments, per_edge: int = EDGE_SAMPLES) -> float:
    """One sided distance: how far the graph strays from the reference segments."""
    if graph.empty:
        return 0.0
    return float(distance_to_segments(graph.points(per_edge), segments).max())


def graph_symmetry_defect(graph: SingularGraph, transforms: Sequence[np.ndarray]) -> float:
    """Largest distance from points of the graph to its image under each transform."""
    if graph.empty:
        return 0.0
    points = graph.points()
    worst = 0.0
    for transform in transforms:
        image = graph.segments @ np.asarray(transform).T
        worst = max(worst, float(distance_to_segments(points, image).max()))
    return worst
