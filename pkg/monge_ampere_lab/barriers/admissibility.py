import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..dto.report_dtos import AdmissibilityReport, CheckRecord
from ..enums.lab_enums import BarrierVariant, ObstacleProfile
from ..errors import ConfigError
from .barrier import BarrierSpec, eval_barrier, implied_density, line_distance
from .obstacle import ObstacleSpec, radial_obstacle
from .radial import w_profile

_LOGGER = logging.getLogger(__name__)

SPHERE_SAMPLES = 20000
SUPPORT_SAMPLES = 401


def sphere_points(n: int, radius: float, count: int = SPHERE_SAMPLES) -> np.ndarray:
    if n == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return radius * np.column_stack([np.cos(angles), np.sin(angles)])
    # Fibonacci lattice
    index = np.arange(count) + 0.5
    polar = np.arccos(1.0 - 2.0 * index / count)
    azimuth = np.pi * (1.0 + 5.0 ** 0.5) * index
    return radius * np.column_stack([np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar),
                                     np.cos(polar)])


def sphere_maximum(spec: BarrierSpec, radius: float) -> float:
    points = sphere_points(spec.n, radius)
    values = eval_barrier(spec, points)
    best = float(values.max())
    if spec.n == 2:
        step = 2.0 * np.pi / len(points)
        start = float(np.arctan2(*points[int(values.argmax())][::-1]))

        def negative(theta):
            return -float(eval_barrier(spec, radius * np.array([[np.cos(theta), np.sin(theta)]]))[0])

        refined = minimize_scalar(negative, bounds=(start - step, start + step), method='bounded',
                                  options={'xatol': 1e-12})
        best = max(best, -float(refined.fun))
    return best


def default_barrier(variant: BarrierVariant, n: int, k: int, epsilon: float, rho: float,
                    directions: Optional[Sequence[Sequence[float]]] = None,
                    weights: Optional[Sequence[float]] = None,
                    face_point: Optional[Sequence[float]] = None,
                    face_normal: Optional[Sequence[float]] = None) -> BarrierSpec:
    """Barrier of the variant with the face or cross data the scenarios use when none is given."""
    if variant == BarrierVariant.PHI_POLYTOPE and face_point is None and face_normal is None:
        face_point = [-epsilon / np.sqrt(2.0)] + [0.0] * (n - 1)
        face_normal = [1.0] + [0.0] * (n - 1)
    if variant == BarrierVariant.PHI_CROSS and not directions:
        directions = np.eye(n).tolist()
    return BarrierSpec(variant, n=n, k=k, epsilon=epsilon, rho=rho,
                       face_point=None if face_point is None else list(face_point),
                       face_normal=None if face_normal is None else list(face_normal),
                       directions=[list(d) for d in directions or []],
                       weights=None if weights is None else list(weights))


def support_points(spec: BarrierSpec, count: int = SUPPORT_SAMPLES) -> np.ndarray:
    """Samples of the obstacle support inside B_eps that the barrier must stay below."""
    eps, n = spec.epsilon, spec.n
    t = np.linspace(-eps, eps, count)

    if spec.variant == BarrierVariant.PHI_LINE:
        if spec.k == 1:
            y = t[:, None]
        else:
            grid = np.stack(np.meshgrid(*[t] * spec.k, indexing='ij'), axis=-1).reshape(-1, spec.k)
            y = grid[np.linalg.norm(grid, axis=1) <= eps]
        return np.column_stack([np.zeros((len(y), n - spec.k)), y])

    if spec.variant == BarrierVariant.PHI_POLYTOPE:
        point, normal = spec.face()
        tangents = np.linalg.svd(normal[None, :])[2][1:]
        grid = np.stack(np.meshgrid(*[t] * (n - 1), indexing='ij'), axis=-1).reshape(-1, n - 1)
        samples = (point @ normal) * normal + grid @ tangents
        return samples[np.linalg.norm(samples, axis=1) <= eps]

    if spec.variant == BarrierVariant.PHI_CROSS:
        units = [np.asarray(d, dtype=float) / np.linalg.norm(d) for d in spec.directions]
        return np.vstack([t[:, None] * d for d in units])

    raise ConfigError(f'No obstacle support is associated with variant {spec.variant.value}')


def support_obstacle(spec: BarrierSpec, obstacle: ObstacleSpec, points: np.ndarray) -> np.ndarray:
    values = radial_obstacle(obstacle, points)
    if spec.variant == BarrierVariant.PHI_CROSS:
        distance = np.column_stack([line_distance(points, d) for d in spec.directions])
        values = values + distance @ spec.cross_weights()
    return values


def _chain_record(spec: BarrierSpec) -> CheckRecord:
    rho = spec.rho
    if spec.variant == BarrierVariant.PHI_LINE:
        return CheckRecord.compare('rho^2/2 <= rho/4', rho ** 2 / 2.0, rho / 4.0)
    if spec.variant == BarrierVariant.PHI_POLYTOPE:
        return CheckRecord.compare('rho^2/2 <= rho/16', rho ** 2 / 2.0, rho / 16.0)
    # default weights 1/8k sum to 1/8
    total = float(spec.cross_weights().sum())
    name = 'rho^2/2 <= rho/16' if spec.weights is None else 'rho^2/2 <= rho sum(w)/2'
    return CheckRecord.compare(name, rho ** 2 / 2.0, rho * total / 2.0)


def admissibility_check(n: int, k: int, epsilon: float, rho: float, alpha: float,
                        variant: BarrierVariant = BarrierVariant.PHI_LINE,
                        directions: Optional[Sequence[Sequence[float]]] = None,
                        weights: Optional[Sequence[float]] = None,
                        face_point: Optional[Sequence[float]] = None,
                        face_normal: Optional[Sequence[float]] = None,
                        profile: ObstacleProfile = ObstacleProfile.TAIL,
                        support: Optional[np.ndarray] = None) -> AdmissibilityReport:
    """
    Evaluates the inequality chain that makes max(Phi, D) an admissible subsolution:
    D = W_n(rho e) - W_n(eps e) >= rho/2 on the sphere, Phi below D there and Phi below g on
    the support. When every record passes the barrier forces the reported density bound.

    :param support: points of the obstacle support to test, defaults to samples inside B_eps.
    """
    variant = BarrierVariant(variant)
    if variant not in (BarrierVariant.PHI_LINE, BarrierVariant.PHI_POLYTOPE, BarrierVariant.PHI_CROSS):
        raise ConfigError(f'Admissibility is defined for phi_line, phi_polytope and phi_cross, not {variant.value}')
    if not 0.0 < epsilon < rho < 1.0:
        raise ConfigError(f'Need 0 < eps < rho < 1, got eps={epsilon}, rho={rho}')
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f'alpha must lie in (0, 1), got {alpha}')
    if n not in (2, 3):
        raise ConfigError(f'Admissibility is evaluated in dimension 2 or 3, got n={n}')

    spec = default_barrier(variant, n, k, epsilon, rho, directions, weights, face_point, face_normal)
    obstacle = ObstacleSpec(n=n, k=k if variant == BarrierVariant.PHI_LINE else 1, alpha=alpha, epsilon=epsilon,
                            profile=profile)
    w_eps, w_rho = w_profile(n, np.array([epsilon, rho]))
    records: List[CheckRecord] = [
        CheckRecord.compare('W_n(rho) >= rho', w_rho, rho, '>='),
        CheckRecord.compare('rho - W_n(eps) >= rho/2', rho - w_eps, rho / 2.0, '>='),
        _chain_record(spec),
        CheckRecord.compare('max Phi <= D on sphere', sphere_maximum(spec, rho), w_rho - w_eps),
    ]

    points = support_points(spec) if support is None else np.atleast_2d(support)
    gap = eval_barrier(spec, points) - support_obstacle(spec, obstacle, points)
    records.append(CheckRecord.compare('Phi <= g on support', float(gap.max()), 0.0))

    report = AdmissibilityReport(variant.value, records)
    if report.passed:
        report.implied_bound = implied_density(spec)
    else:
        _LOGGER.warning(f'Admissibility chain failed at {report.failed()}')
    _LOGGER.debug(f'Admissibility report:\n{report.as_text()}')
    return report
