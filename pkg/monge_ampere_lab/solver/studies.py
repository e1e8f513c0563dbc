import logging
from dataclasses import dataclass, replace
from typing import List, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..enums.lab_enums import SweepMode
from ..errors import ConfigError
from .density import extract_singular_density
from .lifting import solve
from .problem import ScenarioSpec, build_problem

_LOGGER = logging.getLogger(__name__)


@dataclass
class RefinementStudy:
    spacings: List[float]
    inner_min: List[float]
    relative_change: float

    @property
    def stable(self) -> bool:
        return self.relative_change <= 0.25


@dataclass
class RadiusStudy:
    radii: List[float]
    max_difference: float
    threshold: float

    @property
    def stable(self) -> bool:
        return self.max_difference <= self.threshold


def refinement_study(spec: ScenarioSpec, ladder: Sequence[float], tol: float = 1e-8, max_sweeps: int = 2000,
                     mode: SweepMode = SweepMode.GAUSS_SEIDEL) -> RefinementStudy:
    """Solves once per h_min of the ladder and compares the minimum inner density of the last two."""
    if len(ladder) < 2:
        raise ConfigError('A refinement study needs at least two spacings')
    minima = []
    for h_min in ladder:
        refined = replace(spec, h_min=float(h_min), h0=max(spec.h0, float(h_min)))
        profile = extract_singular_density(solve(build_problem(refined), tol, max_sweeps, mode), refined)
        minima.append(profile.inner_min)
        _LOGGER.info(f'h_min={h_min}: inner f_min={profile.inner_min:.4g}')
    change = abs(minima[-1] - minima[-2]) / max(abs(minima[-1]), 1e-300)
    return RefinementStudy([float(h) for h in ladder], minima, float(change))


def radius_study(spec: ScenarioSpec, radii: Sequence[float] = (2.0, 3.0), tol: float = 1e-8, max_sweeps: int = 2000,
                 mode: SweepMode = SweepMode.GAUSS_SEIDEL) -> RadiusStudy:
    """Solutions on B_R for several R compared at the nodes they share inside B_1."""
    solutions = [solve(build_problem(replace(spec, radius=float(r))), tol, max_sweeps, mode) for r in radii]
    reference = solutions[0]
    nodes = reference.problem.cloud.nodes
    unit = np.linalg.norm(nodes, axis=1) < 1.0
    worst = 0.0
    for other in solutions[1:]:
        distance, index = cKDTree(other.problem.cloud.nodes).query(nodes[unit])
        shared = distance <= 1e-9
        if not shared.any():
            continue
        worst = max(worst, float(np.abs(reference.values[unit][shared] - other.values[index[shared]]).max()))
    return RadiusStudy([float(r) for r in radii], worst, 2.0 * spec.h0 ** 2)
