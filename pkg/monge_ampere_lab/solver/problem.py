import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np
from scipy.spatial import cKDTree

from ..barriers.barrier import line_distance
from ..barriers.obstacle import INFINITY, ObstacleSpec, obstacle_values, radial_obstacle
from ..barriers.radial import w_profile
from ..const import (BOUNDARY_OFFSET, DEFAULT_ALPHA, DEFAULT_EPSILON, DEFAULT_RADIUS, DEFAULT_RHO, OBSTACLE_CAP)
from ..core.cloud import PointCloud
from ..enums.lab_enums import NodeTag, ObstacleProfile, ScenarioKind
from ..errors import ConfigError, ConstraintError
from .mesh import graded_cloud
from .support import (SupportGeometry, cross_support, default_polytope, flat_support, polytope_support,
                      sphere_support)

_LOGGER = logging.getLogger(__name__)


@dataclass
class ScenarioSpec:
    kind: ScenarioKind
    n: int = 2
    k: int = 1
    epsilon: float = DEFAULT_EPSILON
    alpha: float = DEFAULT_ALPHA
    rho: float = DEFAULT_RHO
    radius: float = DEFAULT_RADIUS
    h0: float = 0.05
    h_min: float = 0.01
    ratio: float = 2.0
    vertices: Optional[List[List[float]]] = None
    active_faces: Optional[List[int]] = None
    directions: Optional[List[List[float]]] = None
    weights: Optional[List[float]] = None
    arm_length: Optional[float] = None
    boundary_radius: float = 0.5
    profile: ObstacleProfile = ObstacleProfile.TAIL
    cap: float = OBSTACLE_CAP
    boundary_offset: float = BOUNDARY_OFFSET

    def __post_init__(self):
        self.kind = ScenarioKind(self.kind)
        self.profile = ObstacleProfile(self.profile)
        self.validate()

    def validate(self) -> None:
        if self.n not in (2, 3):
            raise ConstraintError(f'Obstacle scenarios are solved for n = 2 or 3, got n={self.n}')
        if self.kind == ScenarioKind.SEGMENT and not 1 <= self.k <= self.n - 1:
            raise ConstraintError(f'Segment scenario needs 1 <= k <= n - 1, got k={self.k}')
        if self.kind == ScenarioKind.POLYTOPE_SKELETON:
            if self.k not in (1, 2):
                raise ConstraintError(f'Polytope skeleton is defined "For k = 1 or 2", got k={self.k}')
            if self.k >= self.n:
                raise ConstraintError(f'Polytope skeleton needs k < n, got n={self.n}, k={self.k}')
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f'alpha must lie in (0, 1), got {self.alpha}')
        if not 0.0 < self.epsilon < self.radius:
            raise ConfigError(f'Need 0 < eps < R, got eps={self.epsilon}, R={self.radius}')
        if self.kind == ScenarioKind.SMOOTH_BOUNDARY and not 0.0 < self.boundary_radius < self.radius:
            raise ConfigError(f'Boundary radius {self.boundary_radius} must lie in (0, R)')
        if self.kind == ScenarioKind.CROSS and self.arm_length is not None and self.arm_length > self.epsilon:
            raise ConfigError(f'Cross arms of length {self.arm_length} leave B_eps (eps={self.epsilon})')
        if self.h_min > self.h0:
            raise ConfigError(f'Infeasible grading: h_min={self.h_min} exceeds h0={self.h0}')

    @property
    def support_radius(self) -> float:
        """Radius used by the lower barrier D = W_n - W_n(r e)."""
        return self.boundary_radius if self.kind == ScenarioKind.SMOOTH_BOUNDARY else self.epsilon

    def obstacle_spec(self) -> ObstacleSpec:
        k = self.k if self.kind == ScenarioKind.SEGMENT else 1
        return ObstacleSpec(n=self.n, k=k, alpha=self.alpha, epsilon=self.epsilon, profile=self.profile,
                            cap=self.cap)

    def cross_directions(self) -> np.ndarray:
        return np.eye(self.n) if self.directions is None else np.asarray(self.directions, dtype=float)

    def cross_weights(self) -> np.ndarray:
        directions = self.cross_directions()
        if self.weights is not None:
            if len(self.weights) != len(directions):
                raise ConfigError(f'{len(self.weights)} weights given for {len(directions)} directions')
            return np.asarray(self.weights, dtype=float)
        return np.full(len(directions), 1.0 / (8.0 * len(directions)))

    def polytope(self) -> np.ndarray:
        if self.vertices is None:
            return default_polytope(self.n, self.epsilon)
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != self.n:
            raise ConfigError(f'Polytope vertices must be points of R^{self.n}')
        return vertices


@dataclass(eq=False)
class DiscreteProblem:
    """
    Per node target mass, obstacle and boundary data of the discrete Perron problem.

    values holds the initial subsolution; at boundary nodes it already equals the boundary data.
    Nodes without an obstacle carry +inf.
    """
    cloud: PointCloud
    mu: np.ndarray
    values: np.ndarray
    obstacle: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    spec: Optional[ScenarioSpec] = None
    support: Optional[SupportGeometry] = None
    support_nodes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        size = self.cloud.size
        for name in ('mu', 'values', 'obstacle', 'lower', 'upper'):
            if getattr(self, name).shape != (size,):
                raise ConfigError(f'Problem field {name} must hold one value per node')
        if np.any(self.mu[self.cloud.interior_mask] <= 0.0):
            raise ConfigError('Target masses must be positive at interior nodes')
        if np.any(self.values > self.obstacle + 1e-12):
            raise ConfigError('Initial function lies above the obstacle')
        if not np.all(np.isfinite(self.values)):
            raise ConfigError('Initial and boundary values must be finite')

    @property
    def h_min(self) -> float:
        return self.spec.h_min if self.spec is not None else float(np.sqrt(self.mu.max()))

    @cached_property
    def support_distance(self) -> np.ndarray:
        if len(self.support_nodes) == 0:
            return np.full(self.cloud.size, np.inf)
        return cKDTree(self.cloud.nodes[self.support_nodes]).query(self.cloud.nodes)[0]


def scenario_support(spec: ScenarioSpec) -> SupportGeometry:
    if spec.kind == ScenarioKind.SEGMENT:
        return flat_support(spec.n, spec.k, spec.epsilon, spec.alpha, spec.h_min)
    if spec.kind == ScenarioKind.POLYTOPE_SKELETON:
        return polytope_support(spec.polytope(), spec.k, spec.epsilon, spec.alpha, spec.h_min, spec.active_faces)
    if spec.kind == ScenarioKind.CROSS:
        arm = spec.epsilon if spec.arm_length is None else spec.arm_length
        return cross_support(spec.cross_directions(), arm, spec.epsilon, spec.alpha, spec.h_min)
    return sphere_support(spec.n, spec.boundary_radius, spec.h_min)


def scenario_obstacle(spec: ScenarioSpec, points: np.ndarray) -> np.ndarray:
    """Obstacle values at support points, in the eps rescaled frame."""
    if spec.kind == ScenarioKind.SEGMENT:
        return obstacle_values(spec.obstacle_spec(), points)
    if spec.kind == ScenarioKind.POLYTOPE_SKELETON:
        return radial_obstacle(spec.obstacle_spec(), points)
    if spec.kind == ScenarioKind.CROSS:
        distance = np.column_stack([line_distance(points, d) for d in spec.cross_directions()])
        return radial_obstacle(spec.obstacle_spec(), points) + distance @ spec.cross_weights()
    return np.einsum('ij,ij->i', points, points) / 2.0


def barrier_bounds(spec: ScenarioSpec, nodes: np.ndarray):
    """D = W_n - W_n(r e) and W_n + offset at every node."""
    w = w_profile(spec.n, np.linalg.norm(nodes, axis=1))
    w_support = w_profile(spec.n, np.array([spec.support_radius]))[0]
    return w - w_support, w + spec.boundary_offset


def build_problem(spec: ScenarioSpec) -> DiscreteProblem:
    support = scenario_support(spec)
    graded = graded_cloud(support.points, spec.n, spec.radius, spec.h0, spec.h_min, spec.ratio,
                          2.0 * spec.support_radius)

    order = np.lexsort(graded.nodes.T[::-1])
    nodes = graded.nodes[order]
    tags = np.full(len(nodes), NodeTag.INTERIOR.value, dtype=object)
    tags[graded.support[order]] = NodeTag.OBSTACLE.value
    tags[graded.boundary[order]] = NodeTag.BOUNDARY.value
    cloud = PointCloud(nodes, tags)

    # support rows in the order the mesh stored them
    position = np.empty(len(order), dtype=int)
    position[order] = np.arange(len(order))
    support_nodes = position[np.flatnonzero(graded.support)]

    lower, upper = barrier_bounds(spec, nodes)
    obstacle = np.full(len(nodes), INFINITY)
    obstacle[support_nodes] = scenario_obstacle(spec, support.points)

    values = np.minimum(lower, obstacle)
    values[cloud.boundary_mask] = upper[cloud.boundary_mask]
    mu = cloud.cell_volumes

    problem = DiscreteProblem(cloud, mu, values, obstacle, lower, upper, spec, support, support_nodes)
    _LOGGER.info(f'Built {spec.kind.value} problem: {cloud.size} nodes, {len(support_nodes)} on the support, '
                 f'total mass {mu.sum():.6g}')
    return problem
