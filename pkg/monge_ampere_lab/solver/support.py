"""Singular supports of the obstacle scenarios: sample points, intrinsic coordinates and cell measures."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, SphericalVoronoi

from ..errors import ConstraintError, GeometryError
from ..core.geometry import clipped_voronoi_volumes, sphere_lattice

_LOGGER = logging.getLogger(__name__)


@dataclass
class SupportGeometry:
    """
    Points of the obstacle support with the data density extraction needs.

    coords holds intrinsic coordinates along the support (arclength or in-plane coordinates),
    cells the k-dimensional measure each point carries, piece the segment, edge or face it
    belongs to and tangents an orthonormal basis of the support directions at the point.
    """
    points: np.ndarray
    coords: np.ndarray
    cells: np.ndarray
    piece: np.ndarray
    tangents: np.ndarray
    inner: np.ndarray
    junction: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @staticmethod
    def concatenate(parts: List['SupportGeometry']) -> 'SupportGeometry':
        return SupportGeometry(*[np.concatenate([getattr(p, name) for p in parts]) for name in
                                 ('points', 'coords', 'cells', 'piece', 'tangents', 'inner', 'junction')])


def line_cells(params: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """1-D Voronoi lengths of sorted parameters, clipped to the support extent [lo, hi]."""
    if len(params) == 1:
        return np.array([hi - lo])
    middles = (params[1:] + params[:-1]) / 2.0
    edges = np.concatenate([[lo], middles, [hi]])
    return np.diff(edges)


def plane_cells(coords: np.ndarray, spacing: float) -> np.ndarray:
    if len(coords) < 3 or np.linalg.matrix_rank(coords - coords[0]) < 2:
        return np.full(len(coords), spacing ** 2)
    return clipped_voronoi_volumes(coords)


def segment_support(start: np.ndarray, end: np.ndarray, spacing: float, piece: int, radius: float,
                    inner_radius: float, keep_ends: bool = False) -> SupportGeometry:
    """
    Samples of the segment [start, end] restricted to the open ball B_radius, on the parameter
    lattice with steps of at most `spacing`.
    """
    start, end = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
    length = float(np.linalg.norm(end - start))
    direction = (end - start) / length
    count = max(int(np.ceil(length / spacing - 1e-9)), 1)
    params = np.linspace(0.0, length, count + 1)
    if not keep_ends:
        params = params[1:-1]
    points = start + params[:, None] * direction
    inside = np.linalg.norm(points, axis=1) < radius * (1.0 - 1e-12)
    params, points = params[inside], points[inside]
    if len(points) == 0:
        return empty_support(len(start), 1)

    # extent of the segment inside the ball
    foot = float(-start @ direction)
    half = np.sqrt(max(radius ** 2 - float(np.linalg.norm(start + foot * direction)) ** 2, 0.0))
    lo, hi = max(0.0, foot - half), min(length, foot + half)
    cells = line_cells(params, lo, hi)
    inner = np.linalg.norm(points, axis=1) < inner_radius
    return SupportGeometry(points, params[:, None], cells, np.full(len(points), piece),
                           np.repeat(direction[None, None, :], len(points), axis=0), inner,
                           np.zeros(len(points), dtype=bool))


def empty_support(dim: int, k: int) -> SupportGeometry:
    return SupportGeometry(np.empty((0, dim)), np.empty((0, k)), np.empty(0), np.empty(0, dtype=int),
                           np.empty((0, k, dim)), np.empty(0, dtype=bool), np.empty(0, dtype=bool))


def flat_support(n: int, k: int, epsilon: float, alpha: float, spacing: float) -> SupportGeometry:
    """{0} x B_eps in R^(n-k) x R^k; the inner region is {0} x (-alpha eps, alpha eps)^k."""
    count = int(np.ceil(epsilon / spacing - 1e-9))
    axis = np.linspace(-epsilon, epsilon, 2 * count + 1)[1:-1]
    grid = np.stack(np.meshgrid(*[axis] * k, indexing='ij'), axis=-1).reshape(-1, k)
    grid = grid[np.linalg.norm(grid, axis=1) < epsilon * (1.0 - 1e-12)]
    points = np.column_stack([np.zeros((len(grid), n - k)), grid])

    if k == 1:
        cells = line_cells(grid[:, 0], -epsilon, epsilon)
    else:
        cells = plane_cells(grid, axis[1] - axis[0])
    tangents = np.repeat(np.eye(n)[None, n - k:, :], len(points), axis=0)
    inner = np.all(np.abs(grid) < alpha * epsilon, axis=1)
    return SupportGeometry(points, grid, cells, np.zeros(len(points), dtype=int), tangents, inner,
                           np.zeros(len(points), dtype=bool))


def polytope_faces(vertices: np.ndarray) -> List[Tuple[np.ndarray, float, np.ndarray]]:
    """Faces of the convex hull as (outward normal, offset, vertex indices), coplanar facets merged."""
    hull = ConvexHull(vertices)
    faces = []
    keys = np.round(hull.equations, 9)
    for key in np.unique(keys, axis=0):
        rows = np.all(keys == key, axis=1)
        members = np.unique(hull.simplices[rows])
        faces.append((hull.equations[rows][0, :-1], float(-hull.equations[rows][0, -1]), members))
    return faces


def polytope_edges(vertices: np.ndarray) -> List[Tuple[int, int]]:
    if vertices.shape[1] == 2:
        order = ConvexHull(vertices).vertices
        return [(int(order[i]), int(order[(i + 1) % len(order)])) for i in range(len(order))]
    faces = polytope_faces(vertices)
    edges = set()
    for i in range(len(faces)):
        for j in range(i + 1, len(faces)):
            shared = np.intersect1d(faces[i][2], faces[j][2])
            if len(shared) == 2:
                edges.add((int(shared[0]), int(shared[1])))
    return sorted(edges)


def check_polytope(vertices: np.ndarray, epsilon: float) -> None:
    radii = np.linalg.norm(vertices, axis=1)
    if np.any(radii < epsilon * (1.0 - 1e-9)):
        inside = int(np.argmin(radii))
        raise ConstraintError(f'Polytope vertices must satisfy "vertices lie on or outside" B_eps; vertex '
                              f'{inside} at {vertices[inside]} has norm {radii[inside]:.6g} < eps = {epsilon}')
    if np.linalg.matrix_rank(vertices - vertices[0]) < vertices.shape[1]:
        raise ConstraintError('Polytope vertices do not span the space')


def default_polytope(n: int, epsilon: float) -> np.ndarray:
    """Axis aligned square or cube with its vertices on the sphere of radius eps."""
    corners = np.stack(np.meshgrid(*[[-1.0, 1.0]] * n, indexing='ij'), axis=-1).reshape(-1, n)
    return corners * epsilon / np.sqrt(n)


def polytope_support(vertices: np.ndarray, k: int, epsilon: float, alpha: float, spacing: float,
                     active_faces: Optional[Sequence[int]] = None) -> SupportGeometry:
    """(n-k)-skeleton of the polytope inside B_eps, or only its listed faces."""
    n = vertices.shape[1]
    check_polytope(vertices, epsilon)
    parts = []
    if n - k == 1:
        pieces = polytope_edges(vertices)
        chosen = range(len(pieces)) if active_faces is None else active_faces
        for index in chosen:
            a, b = pieces[index]
            parts.append(segment_support(vertices[a], vertices[b], spacing, index, epsilon, alpha * epsilon))
    else:
        faces = polytope_faces(vertices)
        chosen = range(len(faces)) if active_faces is None else active_faces
        hull = ConvexHull(vertices)
        for index in chosen:
            normal, offset, _ = faces[index]
            tangents = np.linalg.svd(normal[None, :])[2][1:]
            foot = offset * normal
            count = int(np.ceil(epsilon / spacing - 1e-9))
            axis = np.linspace(-epsilon, epsilon, 2 * count + 1)
            grid = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1).reshape(-1, 2)
            points = foot + grid @ tangents
            inside = np.all(points @ hull.equations[:, :-1].T + hull.equations[:, -1] <= 1e-12, axis=1)
            inside &= np.linalg.norm(points, axis=1) < epsilon * (1.0 - 1e-12)
            points, grid = points[inside], grid[inside]
            if len(points) == 0:
                continue
            parts.append(SupportGeometry(points, grid, plane_cells(grid, axis[1] - axis[0]),
                                         np.full(len(points), index), np.repeat(tangents[None], len(points), axis=0),
                                         np.linalg.norm(points, axis=1) < alpha * epsilon,
                                         np.zeros(len(points), dtype=bool)))

    parts = [p for p in parts if p.size]
    if not parts:
        raise GeometryError('The chosen polytope faces do not meet B_eps')
    return _merge_duplicates(SupportGeometry.concatenate(parts))


def _merge_duplicates(support: SupportGeometry, tol: float = 1e-12) -> SupportGeometry:
    """Points shared by adjacent faces are kept once and flagged as junctions."""
    _, first, counts = np.unique(np.round(support.points / tol) * tol, axis=0, return_index=True,
                                 return_counts=True)
    order = np.sort(first)
    merged = SupportGeometry(*[getattr(support, name)[order] for name in
                               ('points', 'coords', 'cells', 'piece', 'tangents', 'inner', 'junction')])
    shared = counts[np.argsort(first)] > 1
    merged.junction = merged.junction | shared
    return merged




def cross_support(directions: Sequence[Sequence[float]], arm_length: float, epsilon: float, alpha: float,
                  spacing: float) -> SupportGeometry:
    """Segments [-L, L] d_i through the origin; the origin is the shared junction."""
    n = len(directions[0])
    step = arm_length / max(int(np.ceil(arm_length / spacing - 1e-9)), 1)
    # the origin cell takes half a step on both sides of every line
    parts = [SupportGeometry(np.zeros((1, n)), np.zeros((1, 1)), np.array([len(directions) * step]),
                             np.array([-1]), np.zeros((1, 1, n)), np.array([False]), np.array([True]))]
    for index, direction in enumerate(directions):
        unit = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
        for sign in (1.0, -1.0):
            part = segment_support(np.zeros(n), sign * arm_length * unit, spacing, index, epsilon, np.inf)
            if part.size == 0:
                continue
            part.cells = line_cells(part.coords[:, 0], step / 2.0, min(arm_length, epsilon))
            part.coords = sign * part.coords
            part.inner = np.abs(part.coords[:, 0]) < alpha * arm_length
            parts.append(part)
    return SupportGeometry.concatenate(parts)


def sphere_support(n: int, radius: float, spacing: float) -> SupportGeometry:
    points = sphere_lattice(n, radius, spacing)
    count = len(points)
    if n == 2:
        angles = np.arctan2(points[:, 1], points[:, 0])
        cells = np.full(count, 2.0 * np.pi * radius / count)
        tangents = np.column_stack([-np.sin(angles), np.cos(angles)])[:, None, :]
        coords = (radius * np.mod(angles, 2.0 * np.pi))[:, None]
    else:
        cells = SphericalVoronoi(points, radius).calculate_areas()
        normals = points / radius
        tangents = np.stack([np.linalg.svd(v[None, :])[2][1:] for v in normals])
        coords = np.column_stack([np.arccos(np.clip(normals[:, 2], -1.0, 1.0)),
                                  np.mod(np.arctan2(normals[:, 1], normals[:, 0]), 2.0 * np.pi)])
    return SupportGeometry(points, coords, cells, np.zeros(count, dtype=int), tangents,
                           np.ones(count, dtype=bool), np.zeros(count, dtype=bool))
