import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.stats import qmc

from ..errors import ConfigError
from .dual import DualSolution

_LOGGER = logging.getLogger(__name__)

POINTS_PER_CELL = 8


@dataclass(eq=False)
class InterpolationFrames:
    """Displacement interpolation (1 - t) x + t T(x) of points sampled in every power cell."""
    times: List[float]
    points: np.ndarray
    cells: np.ndarray
    targets: np.ndarray

    def frame(self, t: float) -> np.ndarray:
        check_time(t)
        return (1.0 - t) * self.points + t * self.targets

    def frames(self) -> List[np.ndarray]:
        return [self.frame(t) for t in self.times]


def check_time(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise ConfigError(f'Interpolation times must lie in [0, 1], got {t}')


def cell_points(cell: np.ndarray, unit: np.ndarray) -> np.ndarray:
    """
    Maps points of the unit square into a convex polygon: the first coordinate picks a triangle of
    the fan around vertex 0 by area, the pair is folded into that triangle.
    """
    a, b, c = cell[0], cell[1:-1], cell[2:]
    areas = 0.5 * np.abs((b[:, 0] - a[0]) * (c[:, 1] - a[1]) - (b[:, 1] - a[1]) * (c[:, 0] - a[0]))
    cumulative = np.cumsum(areas) / areas.sum()
    u, v = unit[:, 0], unit[:, 1]
    index = np.minimum(np.searchsorted(cumulative, u, side='right'), len(areas) - 1)
    lower = np.concatenate([[0.0], cumulative])[index]
    s = (u - lower) / np.maximum(cumulative[index] - lower, 1e-300)
    folded = s + v > 1.0
    s, v = np.where(folded, 1.0 - s, s), np.where(folded, 1.0 - v, v)
    return a + s[:, None] * (b[index] - a) + v[:, None] * (c[index] - a)


def displacement_frames(dual: DualSolution, times: Sequence[float],
                        per_cell: int = POINTS_PER_CELL) -> InterpolationFrames:
    """Deterministic: every cell gets the same Halton points of the unit square, mapped into it."""
    times = [float(t) for t in times]
    for t in times:
        check_time(t)
    unit = qmc.Halton(d=2, scramble=False).random(per_cell + 1)[1:]

    points, cells = [], []
    for i, cell in enumerate(dual.diagram.cells):
        if len(cell) < 3:
            continue
        points.append(cell_points(cell, unit))
        cells.append(np.full(per_cell, i))
    points = np.vstack(points) if points else np.empty((0, 2))
    cells = np.concatenate(cells) if cells else np.empty(0, dtype=int)
    _LOGGER.debug(f'{len(points)} interpolation points in {len(np.unique(cells))} cells')
    return InterpolationFrames(times, points, cells, dual.sites[cells])
