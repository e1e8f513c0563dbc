"""Radial barrier W_n(x) = int_0^|x| (1 + s^n)^(1/n) ds and its far field growth."""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from ..const import QUADRATURE_TOLERANCE
from ..errors import ConfigError

_LOGGER = logging.getLogger(__name__)


class RadialValue(NamedTuple):
    value: float
    gradient: np.ndarray
    # radius of the subgradient ball, nonzero only at the apex
    subgradient_radius: float


def _density(n: int):
    return lambda s: (1.0 + s ** n) ** (1.0 / n)


def _check_dimension(n: int) -> None:
    if int(n) != n or n < 1:
        raise ConfigError(f'W_n needs an integer n >= 1, got {n}')


def w_profile(n: int, radii: np.ndarray) -> np.ndarray:
    """W_n on many radii at once by integrating between consecutive sorted radii."""
    _check_dimension(n)
    radii = np.asarray(radii, dtype=float)
    flat = radii.ravel()
    order = np.argsort(flat)
    density = _density(n)

    values = np.empty_like(flat)
    total, previous = 0.0, 0.0
    for index in order:
        r = flat[index]
        if r > previous:
            total += quad(density, previous, r, epsabs=QUADRATURE_TOLERANCE, epsrel=1e-13, limit=200)[0]
            previous = r
        values[index] = total
    return values.reshape(radii.shape)


def eval_w(n: int, x) -> RadialValue:
    _check_dimension(n)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = float(np.linalg.norm(x))
    value = quad(_density(n), 0.0, r, epsabs=QUADRATURE_TOLERANCE, epsrel=1e-13, limit=200)[0] if r > 0 else 0.0
    if r == 0.0:
        return RadialValue(0.0, np.zeros_like(x), 1.0)
    return RadialValue(value, (1.0 + r ** n) ** (1.0 / n) * x / r, 0.0)


@dataclass
class GrowthReport:
    n: int
    radii: List[float]
    excess: List[float]
    coefficients: Dict[str, float]
    fit_residuals: List[float]
    constant: Optional[float]

    @property
    def max_fit_residual(self) -> float:
        return float(np.max(np.abs(self.fit_residuals)))


def growth_check(n: int, radii: Sequence[float]) -> GrowthReport:
    """
    Fits W_n(r) - r^2/2 on a radius ladder against its far field form.

    For n = 2 the basis is a log r + b + d r^-2, for n >= 3 it is c + b r^(2-n) + d r^(2-2n);
    in both cases the last term is the first correction of the expansion.
    """
    _check_dimension(n)
    if n < 2:
        raise ConfigError('Growth fit is defined for n >= 2')
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 3:
        raise ConfigError(f'Growth fit needs a ladder of at least 3 radii, got {len(radii)}')
    if np.any(radii <= 0.0):
        raise ConfigError('Growth fit radii must be positive')

    excess = w_profile(n, radii) - radii ** 2 / 2.0
    if n == 2:
        names = ['a', 'b', 'd']
        basis = np.column_stack([np.log(radii), np.ones_like(radii), radii ** -2.0])
    else:
        names = ['c', 'b', 'd']
        basis = np.column_stack([np.ones_like(radii), radii ** (2.0 - n), radii ** (2.0 - 2.0 * n)])

    solution = np.linalg.lstsq(basis, excess, rcond=None)[0]
    residuals = excess - basis @ solution
    coefficients = {name: float(v) for name, v in zip(names, solution)}
    constant = coefficients['c'] if n >= 3 else None

    _LOGGER.debug(f'W_{n} growth fit {coefficients}, max residual {np.abs(residuals).max():.3g}')
    return GrowthReport(n, radii.tolist(), excess.tolist(), coefficients, residuals.tolist(), constant)
