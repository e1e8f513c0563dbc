import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from ..const import HULL_TOLERANCE, MERGE_TOLERANCE
from ..enums.lab_enums import NodeTag, RegionKind
from ..errors import ConfigError, DegenerateCloudError, GeometryError
from .geometry import clipped_voronoi_volumes, sphere_lattice

_LOGGER = logging.getLogger(__name__)


@dataclass(eq=False)
class PointCloud:
    nodes: np.ndarray
    tags: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.tags = np.asarray([NodeTag(t).value for t in self.tags])
        self.validate()

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def interior_mask(self) -> np.ndarray:
        return self.tags != NodeTag.BOUNDARY.value

    @property
    def boundary_mask(self) -> np.ndarray:
        return self.tags == NodeTag.BOUNDARY.value

    @property
    def obstacle_mask(self) -> np.ndarray:
        return self.tags == NodeTag.OBSTACLE.value

    @cached_property
    def hull(self) -> ConvexHull:
        return ConvexHull(self.nodes)

    @cached_property
    def cell_volumes(self) -> np.ndarray:
        """Voronoi volumes clipped to the convex hull of the cloud."""
        return clipped_voronoi_volumes(self.nodes)

    @property
    def scale(self) -> float:
        return max(float(np.ptp(self.nodes, axis=0).max()), 1.0)

    def validate(self) -> None:
        if self.nodes.ndim != 2 or self.dim not in (2, 3):
            raise ConfigError(f'Point clouds must be two or three dimensional, got shape {self.nodes.shape}')
        if len(self.tags) != self.size:
            raise ConfigError(f'Expected {self.size} node tags, got {len(self.tags)}')
        if not np.all(np.isfinite(self.nodes)):
            raise ConfigError('Point cloud contains non finite coordinates')

        if self.size < self.dim + 1 or np.linalg.matrix_rank(self.nodes - self.nodes[0], tol=HULL_TOLERANCE) < self.dim:
            raise DegenerateCloudError(f'Need at least {self.dim + 1} affinely independent nodes')

        pairs = cKDTree(self.nodes).query_pairs(MERGE_TOLERANCE * self.scale)
        if pairs:
            i, j = next(iter(pairs))
            raise GeometryError(f'Nodes {i} and {j} coincide at {self.nodes[i]}')

        if self.boundary_mask.any():
            equations = self.hull.equations
            distance = (self.nodes[self.boundary_mask] @ equations[:, :-1].T + equations[:, -1]).max(axis=1)
            worst = float(distance.min())
            if worst < -1e-8 * self.scale:
                raise GeometryError(f'Boundary node lies {-worst:.3g} inside the domain boundary')

    @staticmethod
    def from_points(points: np.ndarray, obstacle: Optional[np.ndarray] = None,
                    tol: float = 1e-9) -> 'PointCloud':
        """Tag nodes on the convex hull boundary as boundary, optionally marking obstacle nodes."""
        points = np.asarray(points, dtype=float)
        hull = ConvexHull(points)
        distance = (points @ hull.equations[:, :-1].T + hull.equations[:, -1]).max(axis=1)
        tags = np.full(len(points), NodeTag.INTERIOR.value, dtype=object)
        if obstacle is not None:
            tags[np.asarray(obstacle, dtype=bool)] = NodeTag.OBSTACLE.value
        tags[distance > -tol * max(float(np.ptp(points, axis=0).max()), 1.0)] = NodeTag.BOUNDARY.value
        return PointCloud(points, tags)

    @staticmethod
    def grid(lo: Sequence[float], hi: Sequence[float], spacing: float) -> 'PointCloud':
        axes = [np.arange(int(round((h - l) / spacing)) + 1) * spacing + l for l, h in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return PointCloud.from_points(np.column_stack([m.ravel() for m in mesh]))

    @staticmethod
    def disk(radius: float, spacing: float, dim: int = 2) -> 'PointCloud':
        """
        Origin plus rings (shells in 3-D) at every multiple of the spacing up to the radius.
        All rings share the rays of the unit sphere lattice, so the mesh refines around the origin too.
        """
        if spacing <= 0.0 or radius < spacing:
            raise ConfigError(f'Disk mesh needs 0 < spacing <= radius, got spacing={spacing}, radius={radius}')
        rays = sphere_lattice(dim, 1.0, spacing)
        rings = spacing * np.arange(1, int(round(radius / spacing)) + 1)
        points = (rings[:, None, None] * rays[None, :, :]).reshape(-1, dim)
        return PointCloud.from_points(np.vstack([np.zeros(dim), points]))


@dataclass
class Region:
    """Membership predicate: rectangles are half open [lo, hi), balls and tubes are open."""
    kind: RegionKind
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    radius: float = 0.0
    start: Optional[np.ndarray] = None
    end: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = field(default=None)

    @staticmethod
    def rectangle(lo: Sequence[float], hi: Sequence[float]) -> 'Region':
        return Region(RegionKind.RECTANGLE, lo=np.asarray(lo, dtype=float), hi=np.asarray(hi, dtype=float))

    @staticmethod
    def ball(center: Sequence[float], radius: float) -> 'Region':
        return Region(RegionKind.BALL, center=np.asarray(center, dtype=float), radius=float(radius))

    @staticmethod
    def tube(start: Sequence[float], end: Sequence[float], radius: float) -> 'Region':
        return Region(RegionKind.TUBE, start=np.asarray(start, dtype=float), end=np.asarray(end, dtype=float),
                      radius=float(radius))

    @staticmethod
    def nodes(indices: Sequence[int]) -> 'Region':
        return Region(RegionKind.NODES, indices=np.asarray(indices, dtype=int))

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == RegionKind.RECTANGLE:
            return np.all((points >= self.lo) & (points < self.hi), axis=1)
        elif self.kind == RegionKind.BALL:
            return np.linalg.norm(points - self.center, axis=1) < self.radius
        elif self.kind == RegionKind.TUBE:
            return segment_distance(points, self.start, self.end) < self.radius
        raise ConfigError('Node index regions need a cloud, use node_mask')

    def node_mask(self, cloud: PointCloud) -> np.ndarray:
        if self.kind == RegionKind.NODES:
            mask = np.zeros(cloud.size, dtype=bool)
            mask[self.indices] = True
            return mask
        return self.contains(cloud.nodes)


def segment_distance(points: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    direction = end - start
    length2 = float(direction @ direction)
    if length2 == 0.0:
        return np.linalg.norm(points - start, axis=1)
    t = np.clip((points - start) @ direction / length2, 0.0, 1.0)
    return np.linalg.norm(points - (start + t[:, None] * direction), axis=1)
