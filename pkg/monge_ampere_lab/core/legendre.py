import logging

import numpy as np
from scipy.spatial import Delaunay, QhullError

from ..const import MERGE_TOLERANCE
from ..errors import DegenerateCloudError, RangeError
from .cloud import PointCloud
from .envelope import PLConvexFunction, lower_convex_envelope
from .measure import conjugate_values

_LOGGER = logging.getLogger(__name__)


def legendre_transform(fn: PLConvexFunction) -> PLConvexFunction:
    """
    Conjugate on the gradient space cloud of facet slopes. On a facet u = <g, x> + b,
    so u*(g) = -b; slopes shared by coplanar facets collapse to one node.
    """
    decimals = int(-np.log10(MERGE_TOLERANCE)) - 2
    slopes, first = np.unique(np.round(fn.gradients, decimals), axis=0, return_index=True)
    slopes = fn.gradients[first]
    values = -fn.offsets[first]

    if len(slopes) <= fn.dim:
        raise DegenerateCloudError(f'Only {len(slopes)} distinct slopes; the conjugate is not a '
                                   f'{fn.dim}-dimensional PL function, use conjugate_value')

    dual = lower_convex_envelope(PointCloud.from_points(slopes), values)
    _LOGGER.debug(f'Legendre transform on {len(slopes)} gradient nodes')
    return dual


def conjugate_value(fn: PLConvexFunction, slope: np.ndarray, check_range: bool = True) -> float:
    """
    u*(p) for a single slope. Slopes outside the hull of the facet gradients are outside the
    sampled dual range, where the PL conjugate only reflects the finite domain.
    """
    slope = np.asarray(slope, dtype=float)
    if check_range and len(fn.gradients) > fn.dim:
        try:
            inside = Delaunay(fn.gradients).find_simplex(slope[None, :], tol=1e-12)[0] >= 0
        except QhullError:
            inside = bool(np.allclose(fn.gradients, slope))
        if not inside:
            raise RangeError(f'Slope {slope} lies outside the sampled dual range')
    return float(conjugate_values(fn, slope)[0])
