"""
The four dimensional interaction barrier x^2/2 + C |y|^(4/3) (1 + z^2) on R x R^2 x R.

Its Hessian determinant is C^3 (32/27) (1 + z^2) (1 - 7 z^2), independent of |y|, so
det >= 1 can only hold on a slab |z| < 1/sqrt(7). The constant search runs on such a slab.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError
from .barrier import interaction_values

_LOGGER = logging.getLogger(__name__)

FD_STEP = 1e-4
SINGULAR_MARGIN = 0.01
DEFAULT_SLAB = 0.3


@dataclass
class DeterminantCheck:
    constant: float
    min_det: float
    argmin: Optional[np.ndarray]
    determinants: np.ndarray
    rejected: np.ndarray
    max_cross_coupling: float

    @property
    def passed(self) -> bool:
        return self.min_det >= 1.0


def sample_grid(per_axis: int = 9, slab: float = DEFAULT_SLAB) -> np.ndarray:
    """[-1, 1]^3 x [-slab, slab] grid; points near y = 0 are left in for hessian_det_check to reject."""
    axis = np.linspace(-1.0, 1.0, per_axis)
    z = np.linspace(-slab, slab, per_axis)
    mesh = np.meshgrid(axis, axis, axis, z, indexing='ij')
    return np.column_stack([m.ravel() for m in mesh])


def _hessians(points: np.ndarray, constant: float, step: float) -> np.ndarray:
    count, dim = points.shape
    eye = np.eye(dim) * step
    center = interaction_values(points, constant)
    hessians = np.empty((count, dim, dim))
    for i in range(dim):
        plus = interaction_values(points + eye[i], constant)
        minus = interaction_values(points - eye[i], constant)
        hessians[:, i, i] = (plus - 2.0 * center + minus) / step ** 2
        for j in range(i + 1, dim):
            pp = interaction_values(points + eye[i] + eye[j], constant)
            pm = interaction_values(points + eye[i] - eye[j], constant)
            mp = interaction_values(points - eye[i] + eye[j], constant)
            mm = interaction_values(points - eye[i] - eye[j], constant)
            hessians[:, i, j] = hessians[:, j, i] = (pp - pm - mp + mm) / (4.0 * step ** 2)
    return hessians


def richardson_hessians(points: np.ndarray, constant: float, step: float = FD_STEP) -> np.ndarray:
    coarse = _hessians(points, constant, step)
    fine = _hessians(points, constant, step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def hessian_det_check(constant: float, samples: Optional[np.ndarray] = None,
                      margin: float = SINGULAR_MARGIN) -> DeterminantCheck:
    samples = sample_grid() if samples is None else np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != 4:
        raise ConfigError(f'Interaction samples live in R^4, got dimension {samples.shape[1]}')

    near_singular = np.linalg.norm(samples[:, 1:3], axis=1) < margin
    rejected = np.flatnonzero(near_singular)
    if len(rejected):
        _LOGGER.debug(f'Rejected {len(rejected)} samples within {margin} of y = 0')
    kept = samples[~near_singular]
    if len(kept) == 0:
        raise ConfigError('Every interaction sample lies too close to y = 0')

    hessians = richardson_hessians(kept, constant)
    determinants = np.linalg.det(hessians)
    worst = int(np.argmin(determinants))
    coupling = float(np.abs(hessians[:, 0, 1:]).max())
    return DeterminantCheck(constant, float(determinants[worst]), kept[worst], determinants, rejected, coupling)


def barrier_constant_search(samples: Optional[np.ndarray] = None, lo: float = 0.0, hi: float = 1.0,
                            tol: float = 1e-4, max_doublings: int = 40) -> float:
    """Smallest C with min det >= 1 over the samples, by bisection."""
    samples = sample_grid() if samples is None else samples
    doublings = 0
    while not hessian_det_check(hi, samples).passed:
        lo, hi = hi, 2.0 * hi
        doublings += 1
        if doublings > max_doublings:
            raise ConfigError('No constant makes det >= 1 on these samples; restrict |z| below 1/sqrt(7)')

    while hi - lo > tol * hi:
        middle = 0.5 * (lo + hi)
        if hessian_det_check(middle, samples).passed:
            hi = middle
        else:
            lo = middle
    _LOGGER.debug(f'Interaction constant C* = {hi:.6g}')
    return hi
