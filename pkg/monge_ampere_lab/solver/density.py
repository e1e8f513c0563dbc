import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..enums.lab_enums import ScenarioKind
from ..errors import ConfigError, GeometryError
from .lifting import DiscreteSolution
from .problem import ScenarioSpec

_LOGGER = logging.getLogger(__name__)

# relative to the target mass of the support nodes
CLIP_TOLERANCE = 1e-6


@dataclass
class SingularDensityProfile:
    """Excess mass atom - mu on the support nodes and the density f = excess / cell."""
    nodes: np.ndarray
    positions: np.ndarray
    coords: np.ndarray
    excess: np.ndarray
    cells: np.ndarray
    density: np.ndarray
    inner: np.ndarray
    junction_excess: Optional[float] = None
    clipped_mass: float = 0.0

    @property
    def inner_min(self) -> float:
        return float(self.density[self.inner].min()) if self.inner.any() else float('nan')

    @property
    def inner_max(self) -> float:
        return float(self.density[self.inner].max()) if self.inner.any() else float('nan')

    def summary(self) -> dict:
        data = {'samples': int(len(self.nodes)), 'inner_samples': int(self.inner.sum()),
                'f_min_inner': self.inner_min, 'f_max_inner': self.inner_max,
                'f_min': float(self.density.min()) if len(self.density) else float('nan')}
        if self.clipped_mass > 0.0:
            data['clipped_mass'] = self.clipped_mass
        if self.junction_excess is not None:
            data['c0_candidate'] = self.junction_excess
        return data


def extract_singular_density(sol: DiscreteSolution, spec: Optional[ScenarioSpec] = None) -> SingularDensityProfile:
    """
    Singular density along the obstacle support. Negative excess is clipped to zero and its total
    is kept on the profile; the cross junction is reported separately as the Dirac coefficient candidate.
    """
    problem = sol.problem
    support = problem.support
    spec = spec if spec is not None else problem.spec
    if support is None or support.size == 0:
        raise ConfigError('The problem carries no obstacle support')
    if np.any(support.cells <= 0.0):
        row = int(np.argmin(support.cells))
        raise GeometryError(f'Support node {problem.support_nodes[row]} has zero cell measure')

    nodes = problem.support_nodes
    excess = sol.atoms.atoms[nodes] - problem.mu[nodes]
    negative = excess < 0.0
    clipped = float(-excess[negative].sum())
    if clipped > CLIP_TOLERANCE * float(problem.mu[nodes].sum()):
        _LOGGER.warning(f'Clipped {clipped:.3e} of negative excess on {int(negative.sum())} support nodes '
                        f'(down to {excess.min():.3e})')
    elif negative.any():
        _LOGGER.debug(f'{int(negative.sum())} support nodes with negative excess down to {excess.min():.3e}')
    excess = np.maximum(excess, 0.0)
    density = excess / support.cells

    junction_excess = None
    if spec is not None and spec.kind == ScenarioKind.CROSS and support.junction.any():
        junction_excess = float(excess[support.junction].sum())

    inner = support.inner & ~support.junction
    profile = SingularDensityProfile(nodes, support.points, support.coords, excess, support.cells, density, inner,
                                     junction_excess, clipped)
    _LOGGER.info(f'Singular density on the inner support: min {profile.inner_min:.4g}, max {profile.inner_max:.4g}')
    return profile
