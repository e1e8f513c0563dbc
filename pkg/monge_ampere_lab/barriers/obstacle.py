import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..const import DEFAULT_ALPHA, DEFAULT_EPSILON, OBSTACLE_CAP
from ..enums.lab_enums import ObstacleProfile
from ..errors import ConfigError

_LOGGER = logging.getLogger(__name__)

INFINITY = np.inf


@dataclass
class ObstacleSpec:
    """
    g_{n,k,alpha} rescaled so that its support is {x = 0} x B_eps in R^(n-k) x R^k.

    The tail joining r^2/2 at r = alpha to the cap at r = 1 is
    phi(r) = r^2/2 + beta * int_alpha^r (s - alpha)^2 (1 - s)^(-1/2) ds,
    which is C^2 at alpha and has phi' -> inf at 1 while phi(1) = cap.
    """
    n: int = 2
    k: int = 1
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    profile: ObstacleProfile = ObstacleProfile.TAIL
    cap: float = OBSTACLE_CAP

    def __post_init__(self):
        self.profile = ObstacleProfile(self.profile)
        self.validate()

    def validate(self) -> None:
        if self.n not in (1, 2, 3, 4):
            raise ConfigError(f'Obstacle dimension n={self.n} is not supported')
        if not 1 <= self.k <= max(self.n - 1, 1):
            raise ConfigError(f'Obstacle needs 1 <= k <= n - 1, got n={self.n}, k={self.k}')
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f'alpha must lie in (0, 1), got {self.alpha}')
        if self.epsilon <= 0.0:
            raise ConfigError(f'epsilon must be positive, got {self.epsilon}')
        if self.cap <= 0.5:
            raise ConfigError(f'Obstacle cap {self.cap} leaves no room above 1/2 for the tail')

    @property
    def beta(self) -> float:
        return tail_beta(self.alpha, self.cap)


def tail_beta(alpha: float, cap: float = OBSTACLE_CAP) -> float:
    c = 1.0 - alpha
    return (cap - 0.5) / (16.0 / 15.0 * c ** 2.5)


def _tail_integral(alpha: float, r: np.ndarray) -> np.ndarray:
    c = 1.0 - alpha
    t = np.clip(1.0 - r, 0.0, c)

    def antiderivative(s):
        return 2.0 * c * c * np.sqrt(s) - 4.0 * c / 3.0 * s ** 1.5 + 0.4 * s ** 2.5

    return antiderivative(c) - antiderivative(t)


def profile_value(spec: ObstacleSpec, r: Union[float, np.ndarray]) -> np.ndarray:
    """g_1(r) for r >= 0 in the unscaled frame; infinite beyond 1."""
    r = np.abs(np.asarray(r, dtype=float))
    values = np.full(r.shape, INFINITY)
    finite = r <= 1.0
    values[finite] = r[finite] ** 2 / 2.0
    if spec.profile == ObstacleProfile.TAIL:
        tail = finite & (r > spec.alpha)
        values[tail] += spec.beta * _tail_integral(spec.alpha, r[tail])
    return values


def profile_derivative(spec: ObstacleSpec, r: Union[float, np.ndarray]) -> np.ndarray:
    r = np.abs(np.asarray(r, dtype=float))
    with np.errstate(divide='ignore'):
        slope = np.where(r < 1.0, r, INFINITY)
        if spec.profile == ObstacleProfile.TAIL:
            tail = (r > spec.alpha) & (r < 1.0)
            slope = np.where(tail, r + spec.beta * (r - spec.alpha) ** 2 / np.sqrt(np.maximum(1.0 - r, 0.0)), slope)
    return slope


def split_coordinates(points: np.ndarray, k: int):
    """(x, y) in R^(n-k) x R^k."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return points[:, :points.shape[1] - k], points[:, points.shape[1] - k:]


def radial_obstacle(spec: ObstacleSpec, points: np.ndarray) -> np.ndarray:
    """eps^2 g_1(|p| / eps), the rescaled g_{n,alpha} without the support restriction."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return spec.epsilon ** 2 * profile_value(spec, np.linalg.norm(points, axis=1) / spec.epsilon)


def obstacle_values(spec: ObstacleSpec, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    x, _ = split_coordinates(points, spec.k)
    values = radial_obstacle(spec, points)
    off_support = np.linalg.norm(x, axis=1) > tol
    values[off_support] = INFINITY
    return values


def eval_obstacle(spec: ObstacleSpec, point) -> float:
    return float(obstacle_values(spec, np.asarray(point, dtype=float)[None, :])[0])
