"""Low level geometry shared by the envelope, the lifting solver and the power diagram."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay, HalfspaceIntersection, QhullError

from ..const import HULL_TOLERANCE
from ..errors import DegenerateCloudError

_LOGGER = logging.getLogger(__name__)

BOUNDARY_LABEL = -1


@dataclass
class LowerHull:
    simplices: np.ndarray
    gradients: np.ndarray
    offsets: np.ndarray
    neighbors: np.ndarray


def lower_hull(points: np.ndarray, values: np.ndarray, tol: float = HULL_TOLERANCE) -> LowerHull:
    """
    Lower facets of the convex hull of the lifted points (x, value).

    A lid point far above the centroid is appended so that coplanar lifts
    (affine data) still span a full dimensional hull.

    :param points: (N, d) node coordinates.
    :param values: (N,) lifted heights.
    :return: facets as node index simplices with their affine gradient and offset.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    count, dim = points.shape
    scale = max(float(np.ptp(points, axis=0).max()), float(np.ptp(values)), 1.0)
    lid = np.append(points.mean(axis=0), values.max() + 10.0 * scale)

    try:
        hull = ConvexHull(np.vstack([np.column_stack([points, values]), lid]), qhull_options='Qt Qc')
    except QhullError as e:
        raise DegenerateCloudError(f'Lifted cloud of {count} points in dimension {dim} is degenerate: {e}') from e

    normals = hull.equations[:, :-1]
    heights = normals[:, -1]
    lower = heights < -tol * np.linalg.norm(normals, axis=1)
    lower &= ~(hull.simplices == count).any(axis=1)

    index = np.full(len(hull.simplices), -1, dtype=int)
    index[lower] = np.arange(int(lower.sum()))

    equations = hull.equations[lower]
    gradients = -equations[:, :dim] / equations[:, dim:dim + 1]
    offsets = -equations[:, dim + 1] / equations[:, dim]
    neighbors = index[hull.neighbors[lower]]

    return LowerHull(hull.simplices[lower].copy(), gradients, offsets, neighbors)


def polygon_area(vertices: np.ndarray) -> float:
    if len(vertices) < 3:
        return 0.0
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_centroid(vertices: np.ndarray) -> np.ndarray:
    area = polygon_area(vertices)
    if area <= 0.0:
        return vertices.mean(axis=0) if len(vertices) else np.zeros(2)
    x, y = vertices[:, 0], vertices[:, 1]
    xs, ys = np.roll(x, -1), np.roll(y, -1)
    cross = x * ys - xs * y
    return np.array([np.sum((x + xs) * cross), np.sum((y + ys) * cross)]) / (6.0 * area)


def clip_polygon(vertices: np.ndarray, labels: np.ndarray, normal: np.ndarray, offset: float,
                 label: int, eps: float = 1e-14) -> Tuple[np.ndarray, np.ndarray]:
    """
    Clip a convex polygon by the halfplane normal . p <= offset.

    labels[k] names the constraint that produced the edge from vertex k to vertex k + 1;
    edges created by this cut carry `label`.
    """
    count = len(vertices)
    if count == 0:
        return vertices, labels

    side = vertices @ normal - offset
    if np.all(side <= eps):
        return vertices, labels
    if np.all(side > eps):
        return np.empty((0, 2)), np.empty(0, dtype=int)

    out_vertices = []
    out_labels = []
    for k in range(count):
        nxt = (k + 1) % count
        inside_k = side[k] <= eps
        inside_n = side[nxt] <= eps
        if inside_k:
            out_vertices.append(vertices[k])
            out_labels.append(labels[k])
            if not inside_n:
                t = side[k] / (side[k] - side[nxt])
                out_vertices.append(vertices[k] + t * (vertices[nxt] - vertices[k]))
                out_labels.append(label)
        elif inside_n:
            t = side[k] / (side[k] - side[nxt])
            out_vertices.append(vertices[k] + t * (vertices[nxt] - vertices[k]))
            out_labels.append(labels[k])

    return np.array(out_vertices), np.array(out_labels, dtype=int)


def box_polygon(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]], dtype=float)


def hull_volume(points: np.ndarray) -> float:
    """Volume of the convex hull, zero when the points do not span the space."""
    points = np.asarray(points, dtype=float)
    if len(points) <= points.shape[1]:
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        return 0.0


def _interior_point(normals: np.ndarray, offsets: np.ndarray, tol: float) -> Optional[np.ndarray]:
    dim = normals.shape[1]
    norms = np.linalg.norm(normals, axis=1)
    cost = np.zeros(dim + 1)
    cost[-1] = -1.0
    result = linprog(cost, A_ub=np.column_stack([normals, norms]), b_ub=offsets,
                     bounds=[(None, None)] * dim + [(0.0, None)], method='highs')
    if not result.success or result.x[-1] <= tol:
        return None
    return result.x[:dim]


def halfspace_volume(normals: np.ndarray, offsets: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                     tol: float = 1e-13) -> float:
    """Volume of {p : normals @ p <= offsets} intersected with the box [lo, hi]."""
    dim = normals.shape[1]
    if dim == 2:
        polygon = box_polygon(lo, hi)
        labels = np.full(4, BOUNDARY_LABEL, dtype=int)
        for row, (normal, offset) in enumerate(zip(normals, offsets)):
            polygon, labels = clip_polygon(polygon, labels, normal, offset, row)
            if len(polygon) == 0:
                return 0.0
        return polygon_area(polygon)

    eye = np.eye(dim)
    all_normals = np.vstack([normals, eye, -eye])
    all_offsets = np.concatenate([offsets, hi, -lo])
    interior = _interior_point(all_normals, all_offsets, tol)
    if interior is None:
        return 0.0
    try:
        intersection = HalfspaceIntersection(np.column_stack([all_normals, -all_offsets]), interior)
        return hull_volume(intersection.intersections)
    except QhullError:
        return 0.0


def delaunay_neighbors(points: np.ndarray) -> list:
    """Delaunay neighbor lists; every point is its own key."""
    triangulation = Delaunay(points)
    indptr, indices = triangulation.vertex_neighbor_vertices
    return [indices[indptr[i]:indptr[i + 1]] for i in range(len(points))]


def clipped_voronoi_volumes(points: np.ndarray) -> np.ndarray:
    """
    Lebesgue volume of each Voronoi cell intersected with the convex hull of the points.
    The volumes sum to the hull volume.
    """
    points = np.asarray(points, dtype=float)
    count, dim = points.shape
    hull = ConvexHull(points)
    neighbors = delaunay_neighbors(points)
    volumes = np.zeros(count)

    if dim == 2:
        domain = points[hull.vertices]
        domain_labels = np.full(len(domain), BOUNDARY_LABEL, dtype=int)
        for i in range(count):
            polygon, labels = domain, domain_labels
            for j in neighbors[i]:
                normal = 2.0 * (points[j] - points[i])
                offset = points[j] @ points[j] - points[i] @ points[i]
                polygon, labels = clip_polygon(polygon, labels, normal, offset, int(j))
            volumes[i] = polygon_area(polygon)
        return volumes

    domain_normals = hull.equations[:, :-1]
    domain_offsets = -hull.equations[:, -1]
    lo, hi = points.min(axis=0), points.max(axis=0)
    for i in range(count):
        j = neighbors[i]
        normals = 2.0 * (points[j] - points[i])
        offsets = np.einsum('ij,ij->i', points[j], points[j]) - points[i] @ points[i]
        volumes[i] = halfspace_volume(np.vstack([normals, domain_normals]),
                                      np.concatenate([offsets, domain_offsets]), lo, hi)
    _LOGGER.debug(f'Computed {count} clipped Voronoi volumes, total {volumes.sum():.6f}')
    return volumes


def sphere_lattice(n: int, radius: float, spacing: float, multiple: int = 8) -> np.ndarray:
    """Regular polygon (n = 2) or projected cube lattice (n = 3) on the sphere of the given radius."""
    if n == 2:
        count = multiple * int(np.ceil(2.0 * np.pi * radius / (multiple * spacing)))
        angles = 2.0 * np.pi * np.arange(count) / count
        return radius * np.column_stack([np.cos(angles), np.sin(angles)])
    per_edge = 2 * int(np.ceil(0.8 * radius / spacing))
    axis = np.linspace(-1.0, 1.0, per_edge + 1)
    faces = []
    for fixed in range(3):
        for sign in (-1.0, 1.0):
            grid = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1).reshape(-1, 2)
            face = np.insert(grid, fixed, sign, axis=1)
            faces.append(face)
    cube = np.unique(np.round(np.vstack(faces), 12), axis=0)
    return radius * cube / np.linalg.norm(cube, axis=1)[:, None]
