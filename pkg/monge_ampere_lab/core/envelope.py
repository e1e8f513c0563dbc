import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from ..const import ACTIVE_TOLERANCE
from ..errors import ConfigError, IntegrityError
from .cloud import PointCloud
from .geometry import lower_hull

_LOGGER = logging.getLogger(__name__)


@dataclass(eq=False)
class PLConvexFunction:
    """Node values together with the facets of their lower convex envelope."""
    cloud: PointCloud
    values: np.ndarray
    facets: np.ndarray
    gradients: np.ndarray
    offsets: np.ndarray
    neighbors: np.ndarray
    active: np.ndarray

    @property
    def dim(self) -> int:
        return self.cloud.dim

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Envelope value; exact inside the convex hull of the cloud."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return (points @ self.gradients.T + self.offsets).max(axis=1)

    def incident_facets(self) -> List[np.ndarray]:
        """Facet indices around every node, empty for nodes that are not envelope vertices."""
        order = np.argsort(self.facets.ravel(), kind='stable')
        nodes = self.facets.ravel()[order]
        facet_ids = order // self.facets.shape[1]
        bounds = np.searchsorted(nodes, np.arange(self.cloud.size + 1))
        return [facet_ids[bounds[i]:bounds[i + 1]] for i in range(self.cloud.size)]

    def facet_centroids(self) -> np.ndarray:
        return self.cloud.nodes[self.facets].mean(axis=1)

    def supporting_facets(self, node: int, tol: float = ACTIVE_TOLERANCE) -> np.ndarray:
        """Facets whose affine piece touches the envelope at the node."""
        point = self.cloud.nodes[node]
        pieces = self.gradients @ point + self.offsets
        top = float(pieces.max())
        return np.flatnonzero(pieces >= top - tol * (1.0 + abs(top)))

    def node_slope(self, node: int) -> np.ndarray:
        """
        Average of the incident facet gradients, an element of the subdifferential.
        Nodes inside a flat facet or on a ridge are not hull vertices; they use the facets supporting them.
        """
        facets = self.incident_facets()[node]
        if len(facets) == 0:
            facets = self.supporting_facets(node)
        if len(facets) == 0:
            raise ConfigError(f'No facet supports node {node}')
        return self.gradients[facets].mean(axis=0)


def lower_convex_envelope(cloud: PointCloud, values: np.ndarray) -> PLConvexFunction:
    values = np.asarray(values, dtype=float)
    if values.shape != (cloud.size,):
        raise ConfigError(f'Expected {cloud.size} values, got shape {values.shape}')
    if not np.all(np.isfinite(values)):
        raise ConfigError('Envelope values must be finite')

    hull = lower_hull(cloud.nodes, values)
    pl = PLConvexFunction(cloud, values, hull.simplices, hull.gradients, hull.offsets, hull.neighbors,
                          np.zeros(cloud.size, dtype=bool))
    envelope = pl.evaluate(cloud.nodes)
    pl.active = values - envelope <= ACTIVE_TOLERANCE * (1.0 + np.abs(values))
    pl.values = np.minimum(values, envelope)

    _LOGGER.debug(f'Envelope of {cloud.size} nodes: {len(hull.simplices)} facets, '
                  f'{int((~pl.active).sum())} inactive nodes')
    return pl


def check_monotonicity(fn: PLConvexFunction, tol: float = 1e-9) -> float:
    """
    Smallest <g_i - g_j, c_i - c_j> over adjacent facet pairs.

    :raises IntegrityError: when a pair violates gradient monotonicity.
    """
    centroids = fn.facet_centroids()
    worst = np.inf
    for i, row in enumerate(fn.neighbors):
        for j in row[row > i]:
            value = float((fn.gradients[i] - fn.gradients[j]) @ (centroids[i] - centroids[j]))
            worst = min(worst, value)
    if worst < -tol * (1.0 + float(np.abs(fn.gradients).max(initial=0.0))) * fn.cloud.scale:
        raise IntegrityError(f'Envelope gradients are not monotone (worst pairing {worst:.3g})')
    return worst
