"""Source and target domains of the transport examples, as shapely polygons."""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import shapely
from scipy.stats import qmc
from shapely import affinity
from shapely.geometry import Polygon, box
from shapely.geometry.polygon import orient
from shapely.ops import unary_union

from ..const import (CATS_EYE_E, CATS_EYE_R2, CURVE_VERTICES, MIN_ACCEPTANCE, MIN_SITES, PACMAN_SLOPE,
                     SQUARE_FRAME_LAMBDA)
from ..enums.lab_enums import ShapeName
from ..errors import ConfigError, ShapeError

_LOGGER = logging.getLogger(__name__)

CONVEXITY_TOLERANCE = 1e-9


def disk(radius: float = 1.0, vertices: int = CURVE_VERTICES, center=(0.0, 0.0)) -> Polygon:
    """Regular polygon inscribed in the circle, one vertex on the positive x axis."""
    angles = 2.0 * np.pi * np.arange(vertices) / vertices
    return Polygon(np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)]))


def regular_polygon(sides: int, circumradius: float, phase: float = 0.0) -> Polygon:
    angles = phase + 2.0 * np.pi * np.arange(sides) / sides
    return Polygon(np.column_stack([circumradius * np.cos(angles), circumradius * np.sin(angles)]))


def sector(radius: float, start: float, stop: float, vertices: int) -> Polygon:
    """Circular sector between two angles, apex at the origin."""
    angles = np.linspace(start, stop, max(vertices, 2) + 1)
    arc = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])
    return Polygon(np.vstack([[0.0, 0.0], arc]))


@dataclass
class ShapePair:
    source: Polygon
    target: shapely.Geometry

    @property
    def source_area(self) -> float:
        return float(self.source.area)

    def source_vertices(self) -> np.ndarray:
        """Counterclockwise vertices without the closing repeat."""
        return np.asarray(orient(self.source, 1.0).exterior.coords)[:-1]


@dataclass
class ShapeSpec:
    """
    One of the transport examples. The convex side is the source, sampled continuously; the
    nonconvex side is the target, represented by weighted sites.
    """
    name: ShapeName
    lam: float = SQUARE_FRAME_LAMBDA
    slope: float = PACMAN_SLOPE
    eccentricity: float = CATS_EYE_E
    radius_sq: float = CATS_EYE_R2
    parts: int = 2
    sides: int = 4
    vertices: int = CURVE_VERTICES
    source: Optional[List[List[float]]] = None
    target: Optional[List[List[float]]] = None

    def __post_init__(self):
        self.name = ShapeName.parse(self.name) if isinstance(self.name, str) else ShapeName(self.name)
        self.validate()

    def validate(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise ShapeError(f'Square frame scale must lie in (0, 1), got {self.lam}')
        if self.slope <= 0.0:
            raise ShapeError(f'Pacman slope must be positive, got {self.slope}')
        if self.eccentricity <= 1.0 or self.radius_sq <= 0.0:
            raise ShapeError(f'Cat\'s eye needs e > 1 and r^2 > 0, got e={self.eccentricity}, r^2={self.radius_sq}')
        if self.radius_sq * self.eccentricity >= 1.0:
            raise ShapeError('Cat\'s eye ellipse must lie inside the unit disk')
        if self.parts < 2:
            raise ShapeError(f'The split ball needs at least two parts, got {self.parts}')
        if self.sides < 3:
            raise ShapeError(f'A framed polygon needs at least three sides, got {self.sides}')
        if self.vertices < 8:
            raise ShapeError(f'Curved boundaries need at least 8 vertices, got {self.vertices}')
        if self.name == ShapeName.CUSTOM and (self.source is None or self.target is None):
            raise ShapeError('A custom shape needs source and target vertex lists')

    def build(self) -> ShapePair:
        builder = {
            ShapeName.SPLIT_BALL: self._split_ball,
            ShapeName.FRAMED_DIAMOND: lambda: self._framed_polygon(4),
            ShapeName.FRAMED_POLYGON: lambda: self._framed_polygon(self.sides),
            ShapeName.SQUARE_FRAME: self._square_frame,
            ShapeName.PACMAN: self._pacman,
            ShapeName.CATS_EYE: self._cats_eye,
            ShapeName.CUSTOM: self._custom,
        }[self.name]
        pair = builder()
        check_pair(pair)
        return pair

    def _split_ball(self) -> ShapePair:
        half = math.pi / self.parts
        pieces = []
        for j in range(self.parts):
            bisector = 2.0 * math.pi * j / self.parts
            piece = sector(1.0, bisector - half, bisector + half, self.vertices // self.parts)
            pieces.append(affinity.translate(piece, math.cos(bisector), math.sin(bisector)))
        return ShapePair(disk(1.0, self.vertices), unary_union(pieces))

    def _framed_polygon(self, sides: int) -> ShapePair:
        # inner vertices sit on the midpoints of the outer edges
        outer = regular_polygon(sides, 1.0 / math.cos(math.pi / sides), math.pi / sides)
        inner = regular_polygon(sides, 1.0)
        return ShapePair(inner, outer.difference(inner))

    def _square_frame(self) -> ShapePair:
        inner = box(-self.lam, -self.lam, self.lam, self.lam)
        return ShapePair(inner, box(-1.0, -1.0, 1.0, 1.0).difference(inner))

    def _pacman(self) -> ShapePair:
        circle = disk(1.0, self.vertices)
        top = 2.0
        mouth = Polygon([(0.0, 0.0), (top / self.slope, top), (-top / self.slope, top)])
        return ShapePair(circle, circle.difference(mouth))

    def _cats_eye(self) -> ShapePair:
        circle = disk(1.0, self.vertices)
        a = math.sqrt(self.radius_sq)
        eye = affinity.scale(disk(1.0, self.vertices), a, a * math.sqrt(self.eccentricity), origin=(0.0, 0.0))
        return ShapePair(circle, circle.difference(eye))

    def _custom(self) -> ShapePair:
        return ShapePair(Polygon(self.source), Polygon(self.target))


def check_pair(pair: ShapePair) -> None:
    for label, geometry in (('source', pair.source), ('target', pair.target)):
        if not geometry.is_valid or geometry.area <= 0.0:
            raise ShapeError(f'The {label} domain must be a valid shape of positive area')
    defect = pair.source.convex_hull.area - pair.source.area
    if defect > CONVEXITY_TOLERANCE * pair.source.area:
        raise ShapeError(f'The source domain must be convex (hull area excess {defect:.3e})')


@dataclass(eq=False)
class SampleSet:
    """Sites in the target with equal masses summing to the source area."""
    sites: np.ndarray
    masses: np.ndarray
    shape: Optional[ShapeSpec] = None
    draws: int = 0

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    @property
    def cell_size(self) -> float:
        return math.sqrt(self.total / self.size)


def halton_in(geometry: shapely.Geometry, count: int, skip: int = 0):
    """
    The first `count` points of the unscrambled Halton sequence, mapped to the bounding box, that
    fall inside `geometry`. Returns the points and the number of draws used.

    :raises ShapeError: when the acceptance rate is below the minimum.
    """
    lo_x, lo_y, hi_x, hi_y = geometry.bounds
    rate = geometry.area / ((hi_x - lo_x) * (hi_y - lo_y))
    if rate < MIN_ACCEPTANCE:
        raise ShapeError(f'Acceptance rate {rate:.4f} is below {MIN_ACCEPTANCE} for this shape')

    sampler = qmc.Halton(d=2, scramble=False)
    if skip:
        sampler.fast_forward(skip)
    accepted, draws = [], 0
    found = 0
    while found < count:
        batch = int(math.ceil(1.2 * (count - found) / rate)) + 16
        points = qmc.scale(sampler.random(batch), [lo_x, lo_y], [hi_x, hi_y])
        inside = shapely.contains_xy(geometry, points[:, 0], points[:, 1])
        # cut the batch after the last point needed
        keep = np.flatnonzero(inside)[:count - found]
        used = int(keep[-1]) + 1 if found + len(keep) >= count else batch
        accepted.append(points[keep])
        draws += used
        found += len(keep)
    return np.vstack(accepted), draws


def sample_shape(shape: ShapeSpec, count: int, pair: Optional[ShapePair] = None) -> SampleSet:
    """Deterministic low discrepancy sites in the target, equal masses summing to the source area."""
    if count < MIN_SITES:
        raise ConfigError(f'Need at least {MIN_SITES} sites, got {count}')
    pair = pair if pair is not None else shape.build()
    # the first Halton point is the lower box corner
    sites, draws = halton_in(pair.target, count, skip=1)
    masses = np.full(count, pair.source_area / count)
    _LOGGER.debug(f'Sampled {count} sites for {shape.name.value} from {draws} draws')
    return SampleSet(sites, masses, shape, draws)
