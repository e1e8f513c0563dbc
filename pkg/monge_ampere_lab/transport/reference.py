"""Closed form transport of the unit disk onto its two halves pushed apart by e_1."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from shapely.geometry import Polygon

from ..errors import RangeError
from .dual import DualSolution
from .shapes import halton_in

_LOGGER = logging.getLogger(__name__)

ERROR_SAMPLES = 20000


@dataclass
class ReferenceValue:
    """Map value T(x) off the axis; on {x = 0} the subdifferential segment [(-1, y), (1, y)] instead."""
    image: Optional[np.ndarray]
    interval: Optional[Tuple[np.ndarray, np.ndarray]]
    potential: float

    @property
    def singular(self) -> bool:
        return self.interval is not None


def split_ball_reference(point) -> ReferenceValue:
    """
    T(x, y) = (x + sign(x), y) and u(x, y) = (x^2 + y^2) / 2 + |x| on the unit disk.

    :raises RangeError: outside the unit disk.
    """
    x, y = (float(c) for c in point)
    if x * x + y * y >= 1.0:
        raise RangeError(f'Point ({x}, {y}) lies outside the unit disk')
    potential = 0.5 * (x * x + y * y) + abs(x)
    if x == 0.0:
        return ReferenceValue(None, (np.array([-1.0, y]), np.array([1.0, y])), potential)
    return ReferenceValue(np.array([x + np.sign(x), y]), None, potential)


def reference_map(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points + np.column_stack([np.sign(points[:, 0]), np.zeros(len(points))])


def reference_potential(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return 0.5 * np.einsum('ij,ij->i', points, points) + np.abs(points[:, 0])


def error_samples(dual: DualSolution, count: int = ERROR_SAMPLES) -> np.ndarray:
    """Halton points in the source, off the singular axis."""
    points, _ = halton_in(Polygon(dual.source), count, skip=1)
    return points[points[:, 0] != 0.0]


def map_error(dual: DualSolution, count: int = ERROR_SAMPLES) -> float:
    """Mean squared distance between the discrete and the closed form map."""
    points = error_samples(dual, count)
    return float(np.mean(np.sum((dual.transport(points) - reference_map(points)) ** 2, axis=1)))


def potential_error(dual: DualSolution, count: int = ERROR_SAMPLES) -> float:
    """Sup distance between the potentials after removing the best constant."""
    points = error_samples(dual, count)
    difference = dual.potential(points) - reference_potential(points)
    return 0.5 * float(difference.max() - difference.min())
