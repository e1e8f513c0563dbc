"""Damped Newton iteration on the semi-discrete transport dual, and the resulting Brenier potential."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve
from scipy.spatial import cKDTree

from ..core.cloud import PointCloud
from ..core.envelope import PLConvexFunction, lower_convex_envelope
from ..core.geometry import polygon_area, polygon_centroid
from ..dto.report_dtos import NewtonRecord
from ..errors import ConfigError, ConvergenceError
from .power_diagram import PowerDiagram, halfplanes, power_diagram
from .shapes import SampleSet

_LOGGER = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-7
MAX_STEPS = 50
MAX_REJECTIONS = 5
ASCENT_HALVINGS = 30
POSITIVITY = 0.1
ASSIGN_CHUNK = 2048


@dataclass(eq=False)
class DualSolution:
    """Weights psi (psi_0 = 0) whose power cells carry the prescribed site masses."""
    samples: SampleSet
    weights: np.ndarray
    diagram: PowerDiagram
    history: List[NewtonRecord] = field(default_factory=list)
    tol: float = DEFAULT_TOLERANCE

    @property
    def sites(self) -> np.ndarray:
        return self.samples.sites

    @property
    def masses(self) -> np.ndarray:
        return self.samples.masses

    @property
    def areas(self) -> np.ndarray:
        return self.diagram.areas

    @property
    def source(self) -> np.ndarray:
        return self.diagram.source

    @property
    def max_error(self) -> float:
        return relative_error(self.areas, self.masses)

    @property
    def converged(self) -> bool:
        return self.max_error <= self.tol

    @property
    def cell_size(self) -> float:
        return float(np.sqrt(polygon_area(self.source) / len(self.sites)))

    @property
    def shifts(self) -> np.ndarray:
        """c_i in u(x) = max_i <x, p_i> - c_i."""
        return 0.5 * (np.einsum('ij,ij->i', self.sites, self.sites) - self.weights)

    def assign(self, points: np.ndarray) -> np.ndarray:
        """Index of the power cell holding each point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points), dtype=int)
        for start in range(0, len(points), ASSIGN_CHUNK):
            chunk = points[start:start + ASSIGN_CHUNK]
            out[start:start + len(chunk)] = np.argmax(chunk @ self.sites.T - self.shifts, axis=1)
        return out

    def potential(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cells = self.assign(points)
        return np.einsum('ij,ij->i', points, self.sites[cells]) - self.shifts[cells]

    def transport(self, points: np.ndarray) -> np.ndarray:
        return self.sites[self.assign(points)]


def relative_error(areas: np.ndarray, masses: np.ndarray) -> float:
    return float(np.max(np.abs(areas - masses) / masses))


def initial_weights(sites: np.ndarray, source: np.ndarray) -> np.ndarray:
    """
    Weights whose power diagram is the Voronoi diagram of the sites shrunk into the source.
    With q_i = s p_i + b this gives psi_i = (1 - s)|p_i|^2 - 2 <b, p_i>; every cell then holds its q_i.
    """
    center = polygon_centroid(source)
    normals, offsets = halfplanes(source)
    inradius = float(np.min((offsets - normals @ center) / np.linalg.norm(normals, axis=1)))
    mean = sites.mean(axis=0)
    spread = float(np.linalg.norm(sites - mean, axis=1).max())
    scale = 0.9 * inradius / spread if spread > 0.0 else 1.0
    shift = center - scale * mean
    return (1.0 - scale) * np.einsum('ij,ij->i', sites, sites) - 2.0 * sites @ shift


def hessian(diagram: PowerDiagram) -> sp.csr_matrix:
    """d area_i / d psi_j: -|e_ij| / (2 |p_i - p_j|) off the diagonal, rows summing to zero."""
    i, j = diagram.pairs[:, 0], diagram.pairs[:, 1]
    coupling = diagram.lengths / (2.0 * np.linalg.norm(diagram.sites[i] - diagram.sites[j], axis=1))
    size = diagram.size
    off = sp.coo_matrix((np.concatenate([-coupling, -coupling]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                        shape=(size, size)).tocsr()
    return (off - sp.diags(np.asarray(off.sum(axis=1)).ravel())).tocsr()


def newton_direction(matrix: sp.csr_matrix, rhs: np.ndarray) -> Optional[np.ndarray]:
    """Solution with the first component pinned to zero, None when the cell graph is disconnected."""
    direction = np.zeros(len(rhs))
    if len(rhs) == 1:
        return direction
    if connected_components(matrix, directed=False)[0] > 1:
        return None
    direction[1:] = spsolve(matrix[1:, 1:].tocsc(), rhs[1:])
    return direction if np.all(np.isfinite(direction)) else None


def _try_step(sites, psi, direction, source, masses, norm, halvings, sufficient: bool):
    floor = POSITIVITY * masses.min()
    tau = 1.0
    for _ in range(halvings):
        candidate = psi + tau * direction
        diagram = power_diagram(sites, candidate, source)
        new_norm = float(np.linalg.norm(diagram.areas - masses))
        bound = (1.0 - tau / 2.0) * norm if sufficient else norm
        if diagram.areas.min() >= floor and new_norm < bound:
            return candidate, diagram, tau
        tau /= 2.0
    return None


def solve_dual(source: np.ndarray, samples: SampleSet, tol: float = DEFAULT_TOLERANCE, max_steps: int = MAX_STEPS,
               log_iterations: bool = False) -> DualSolution:
    """
    Finds psi with |cell_i| = w_i. Newton steps are halved until every cell keeps at least a tenth
    of the smallest mass and the residual norm drops; after five rejected halvings one diagonal
    ascent step is taken instead.

    :raises ConvergenceError: when the step budget runs out, with the Newton log attached.
    """
    source = np.asarray(source, dtype=float)
    if polygon_area(source) < 0.0:
        source = source[::-1]
    area = polygon_area(source)
    sites, masses = samples.sites, samples.masses
    if abs(masses.sum() - area) > 1e-9 * area:
        raise ConfigError(f'Site masses sum to {masses.sum():.12g}, the source area is {area:.12g}')

    psi = initial_weights(sites, source)
    diagram = power_diagram(sites, psi, source)
    history: List[NewtonRecord] = []
    step = 0
    while True:
        residual = diagram.areas - masses
        norm = float(np.linalg.norm(residual))
        error = relative_error(diagram.areas, masses)
        if error <= tol:
            break
        if step >= max_steps:
            _LOGGER.error(f'Transport dual did not converge in {max_steps} steps (error {error:.3e})')
            raise ConvergenceError(f'Transport dual did not converge in {max_steps} steps (max relative area '
                                   f'error {error:.3e})', [h.to_dict() for h in history])
        step += 1

        matrix = hessian(diagram)
        method = 'newton'
        result = None
        direction = newton_direction(matrix, -residual)
        if direction is not None:
            result = _try_step(sites, psi, direction, source, masses, norm, MAX_REJECTIONS, True)
        if result is None:
            method = 'ascent'
            _LOGGER.warning(f'Step {step}: Newton stalled, taking a coordinate ascent step')
            diagonal = matrix.diagonal()
            direction = np.where(diagonal > 0.0, -residual / np.where(diagonal > 0.0, diagonal, 1.0), 0.0)
            result = _try_step(sites, psi, direction, source, masses, norm, ASCENT_HALVINGS, False)
        if result is None:
            _LOGGER.error(f'Step {step}: no step reduces the residual')
            raise ConvergenceError(f'Transport dual stalled at step {step} (max relative area error {error:.3e})',
                                   [h.to_dict() for h in history])

        psi, diagram, tau = result
        history.append(NewtonRecord(step, float(np.linalg.norm(diagram.areas - masses)), tau, method,
                                    relative_error(diagram.areas, masses)))
        if log_iterations:
            _LOGGER.debug(f'Step {step} ({method}): damping {tau}, residual {history[-1].residual:.3e}')

    psi = psi - psi[0]
    diagram.weights = psi
    _LOGGER.info(f'Transport dual for {len(sites)} sites converged in {step} steps')
    return DualSolution(samples, psi, diagram, history, tol)


def merge_points(points: np.ndarray, radius: float):
    """Groups points closer than radius; returns group labels and the group means."""
    pairs = cKDTree(points).query_pairs(radius, output_type='ndarray')
    graph = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(points), len(points)))
    count, labels = connected_components(graph, directed=False)
    weights = np.bincount(labels, minlength=count)
    means = np.column_stack([np.bincount(labels, points[:, k], count) for k in range(points.shape[1])])
    return labels, means / weights[:, None]


def brenier_potential(dual: DualSolution) -> PLConvexFunction:
    """
    u(x) = max_i <x, p_i> - (|p_i|^2 - psi_i) / 2 sampled at the vertices of the power cells. The
    function is affine on every cell, so the lower envelope of these samples reproduces it on the source.
    """
    vertices = np.vstack([c for c in dual.diagram.cells if len(c)])
    scale = max(float(np.ptp(vertices, axis=0).max()), 1.0)
    _, nodes = merge_points(vertices, 1e-10 * scale)
    return lower_convex_envelope(PointCloud.from_points(nodes), dual.potential(nodes))
