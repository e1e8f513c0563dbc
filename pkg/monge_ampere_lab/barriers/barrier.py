import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..const import DEFAULT_EPSILON, DEFAULT_RHO
from ..enums.lab_enums import BarrierVariant
from ..errors import ConfigError
from .obstacle import split_coordinates
from .radial import w_profile

_LOGGER = logging.getLogger(__name__)


@dataclass
class BarrierSpec:
    variant: BarrierVariant
    n: int = 2
    k: int = 1
    epsilon: float = DEFAULT_EPSILON
    rho: float = DEFAULT_RHO
    face_point: Optional[List[float]] = None
    # inward unit normal of the face; P lies on the side <p - q, normal> >= 0
    face_normal: Optional[List[float]] = None
    directions: List[List[float]] = field(default_factory=list)
    weights: Optional[List[float]] = None
    constant: float = 1.0

    def __post_init__(self):
        self.variant = BarrierVariant(self.variant)

    def cross_weights(self) -> np.ndarray:
        if self.weights is not None:
            if len(self.weights) != len(self.directions):
                raise ConfigError(f'{len(self.weights)} weights given for {len(self.directions)} directions')
            return np.asarray(self.weights, dtype=float)
        return np.full(len(self.directions), 1.0 / (8.0 * len(self.directions)))

    def face(self):
        if self.face_point is None or self.face_normal is None:
            raise ConfigError('phi_polytope needs face_point and face_normal')
        normal = np.asarray(self.face_normal, dtype=float)
        length = np.linalg.norm(normal)
        if length == 0.0:
            raise ConfigError('Face normal must be nonzero')
        return np.asarray(self.face_point, dtype=float), normal / length


def line_distance(points: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """dist(p, <d>) to the line spanned by d through the origin."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    along = points @ direction
    return np.sqrt(np.maximum(np.einsum('ij,ij->i', points, points) - along ** 2, 0.0))


def interaction_values(points: np.ndarray, constant: float) -> np.ndarray:
    """x^2/2 + C |y|^(4/3) (1 + z^2) on R x R^2 x R."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y, z = points[:, 0], points[:, 1:3], points[:, 3]
    return x ** 2 / 2.0 + constant * np.linalg.norm(y, axis=1) ** (4.0 / 3.0) * (1.0 + z ** 2)


def eval_barrier(spec: BarrierSpec, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    squares = np.einsum('ij,ij->i', points, points) / 2.0

    if spec.variant == BarrierVariant.LOWER_D:
        return w_profile(spec.n, np.linalg.norm(points, axis=1)) - w_profile(spec.n, np.array([spec.epsilon]))[0]

    if spec.variant == BarrierVariant.PHI_LINE:
        x, _ = split_coordinates(points, spec.k)
        return squares + np.linalg.norm(x, axis=1) / 4.0

    if spec.variant == BarrierVariant.PHI_POLYTOPE:
        point, normal = spec.face()
        height = (points - point) @ normal
        return squares + np.abs(height) / 16.0 - height / 8.0

    if spec.variant == BarrierVariant.PHI_CROSS:
        if not spec.directions:
            raise ConfigError('phi_cross needs at least one direction')
        weights = spec.cross_weights()
        distance = np.column_stack([line_distance(points, d) for d in spec.directions])
        return squares + distance @ weights

    if spec.variant == BarrierVariant.CAFFARELLI:
        return squares + np.abs(points[:, 0])

    if spec.variant == BarrierVariant.INTERACTION_4D:
        if points.shape[1] != 4:
            raise ConfigError(f'interaction4d lives in R^4, got points of dimension {points.shape[1]}')
        return interaction_values(points, spec.constant)

    raise ConfigError(f'Unknown barrier variant {spec.variant}')


def implied_density(spec: BarrierSpec) -> float:
    """Gradient jump the barrier forces across its singular support."""
    if spec.variant == BarrierVariant.PHI_LINE:
        return 0.5
    if spec.variant == BarrierVariant.PHI_POLYTOPE:
        return 0.125
    if spec.variant == BarrierVariant.PHI_CROSS:
        return 2.0 * float(spec.cross_weights().min())
    if spec.variant == BarrierVariant.CAFFARELLI:
        return 2.0
    return 0.0
