import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import ConfigError
from .cloud import Region
from .envelope import PLConvexFunction

_LOGGER = logging.getLogger(__name__)


@dataclass
class Section:
    region: Region
    volume: float
    slope: np.ndarray
    clipped: bool


@dataclass
class FlatPiece:
    nodes: np.ndarray
    gradient: np.ndarray
    offset: float
    extreme_nodes: np.ndarray
    interior_extreme: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))

    @property
    def has_interior_extreme(self) -> bool:
        return bool(self.interior_extreme.any())


def section(fn: PLConvexFunction, node: int, height: float, slope: Optional[np.ndarray] = None) -> Section:
    """
    Nodes with u(x) < u(p) + <s, x - p> + h and the Lebesgue volume of their cells.
    s defaults to the average of the gradients of the facets around p.
    """
    if height <= 0.0:
        raise ConfigError(f'Section height must be positive, got {height}')
    if not fn.active[node]:
        raise ConfigError(f'Section base node {node} is not active')

    cloud = fn.cloud
    slope = fn.node_slope(node) if slope is None else np.asarray(slope, dtype=float)
    support = fn.values[node] + (cloud.nodes - cloud.nodes[node]) @ slope + height
    inside = fn.values < support
    indices = np.flatnonzero(inside)
    clipped = bool(cloud.boundary_mask[inside].any())
    if clipped:
        _LOGGER.warning(f'Section of height {height} at node {node} reaches the domain boundary')

    volume = float(cloud.cell_volumes[inside].sum())
    return Section(Region.nodes(indices), volume, slope, clipped)


def flat_set_probe(fn: PLConvexFunction, tol: float = 1e-9, node_mask: Optional[np.ndarray] = None) -> List[FlatPiece]:
    """
    Contact sets {u = L} of supporting affine functions that cover more than one mesh cell,
    i.e. that contain a node which is not one of their extreme points. Extreme points away
    from the domain boundary are flagged.
    """
    cloud = fn.cloud
    scale = 1.0 + float(np.abs(fn.gradients).max(initial=0.0))
    keys = np.column_stack([fn.gradients, fn.offsets[:, None]])
    order = np.lexsort(keys.T[::-1])
    pieces: List[FlatPiece] = []

    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and np.all(np.abs(keys[order[stop]] - keys[order[start]]) <= tol * scale):
            stop += 1
        group = order[start:stop]
        start = stop
        if len(group) < 2:
            continue

        gradient, offset = fn.gradients[group[0]], float(fn.offsets[group[0]])
        contact = np.abs(fn.values - (cloud.nodes @ gradient + offset)) <= tol * (1.0 + np.abs(fn.values))
        contact &= fn.active
        nodes = np.flatnonzero(contact)
        if node_mask is not None and not node_mask[nodes].all():
            continue
        try:
            extreme = nodes[ConvexHull(cloud.nodes[nodes]).vertices]
        except QhullError:
            continue
        if len(extreme) == len(nodes):
            continue

        interior_extreme = ~cloud.boundary_mask[extreme]
        pieces.append(FlatPiece(nodes, gradient, offset, extreme, interior_extreme))

    _LOGGER.debug(f'Flat set probe found {len(pieces)} flat pieces')
    return pieces
