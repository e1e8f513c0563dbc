"""Monotone node lifting with an obstacle cap, the discrete Perron construction."""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from ..const import ROOT_TOLERANCE
from ..core.envelope import PLConvexFunction, lower_convex_envelope
from ..core.geometry import delaunay_neighbors
from ..core.measure import MAAtomTable, local_atom, ma_atoms
from ..dto.report_dtos import SweepRecord
from ..enums.lab_enums import SweepMode
from ..errors import ConvergenceError, IntegrityError
from .problem import DiscreteProblem

_LOGGER = logging.getLogger(__name__)

NEAREST = {2: 24, 3: 48}


@dataclass(eq=False)
class DiscreteSolution:
    problem: DiscreteProblem
    fn: PLConvexFunction
    atoms: MAAtomTable
    contact: np.ndarray
    history: List[SweepRecord] = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return self.fn.values

    @property
    def sweeps(self) -> int:
        return len(self.history)

    def excess(self) -> np.ndarray:
        return self.atoms.atoms - self.problem.mu


def candidate_neighbors(nodes: np.ndarray) -> List[np.ndarray]:
    """Delaunay neighbours plus the nearest nodes; supersets of the envelope neighbours met while lifting."""
    dim = nodes.shape[1]
    count = min(NEAREST[dim] + 1, len(nodes))
    nearest = cKDTree(nodes).query(nodes, k=count)[1]
    delaunay = delaunay_neighbors(nodes)
    return [np.setdiff1d(np.union1d(delaunay[i], nearest[i]), [i]) for i in range(len(nodes))]


class NodeLifter:
    """Raises single nodes to the level where their local atom equals the target mass."""

    def __init__(self, problem: DiscreteProblem):
        self.problem = problem
        self.nodes = problem.cloud.nodes
        self.candidates = candidate_neighbors(self.nodes)

    def atom(self, node: int, level: float, values: np.ndarray) -> float:
        others = self.candidates[node]
        return local_atom(self.nodes[node], level, self.nodes[others], values[others])

    def lift(self, node: int, values: np.ndarray) -> Tuple[float, float, bool]:
        """
        New value, relative residual at the current value and whether the node had to be skipped.
        The atom is nonincreasing in the node value, so a root in [current, cap] is unique.
        """
        mu = self.problem.mu[node]
        current = values[node]
        start = self.atom(node, current, values)
        residual = start / mu - 1.0
        if start <= mu:
            return current, residual, start < mu * (1.0 - 1e-9)

        cap = min(self.problem.obstacle[node], float(values[self.candidates[node]].max()))
        if cap <= current:
            return current, residual, False
        if self.atom(node, cap, values) >= mu:
            return cap, residual, False

        level = brentq(lambda t: self.atom(node, t, values) - mu, current, cap, xtol=ROOT_TOLERANCE * 1e-2,
                       rtol=4.0 * np.finfo(float).eps)
        return max(level, current), residual, False


def _sweep(lifter: NodeLifter, values: np.ndarray, free: np.ndarray, mode: SweepMode):
    source = values.copy() if mode == SweepMode.JACOBI else values
    target = values
    lifts, residuals, skipped = [], [], 0
    for node in free:
        new, residual, skip = lifter.lift(node, source)
        skipped += int(skip)
        if not lifter.problem.obstacle[node] <= source[node]:
            residuals.append(abs(residual))
        lifts.append(new - source[node])
        target[node] = new
    return (max(lifts, default=0.0), max(residuals, default=0.0), skipped)


def solve(problem: DiscreteProblem, tol: float = 1e-8, max_sweeps: int = 2000,
          mode: SweepMode = SweepMode.GAUSS_SEIDEL, log_iterations: bool = False) -> DiscreteSolution:
    """
    Sweeps the interior nodes in index order, raising each to the level where its atom equals mu
    or to its obstacle value, until no node moves by more than `tol`.

    :raises ConvergenceError: when max_sweeps is exceeded; the error carries the sweep log.
    """
    mode = SweepMode(mode)
    cloud = problem.cloud
    values = problem.values.astype(float)
    free = np.flatnonzero(cloud.interior_mask)
    lifter = NodeLifter(problem)
    history: List[SweepRecord] = []

    for sweep in range(1, max_sweeps + 1):
        before = values.copy()
        max_lift, max_residual, skipped = _sweep(lifter, values, free, mode)

        if np.any(values < before):
            raise IntegrityError(f'Sweep {sweep} lowered a node value')
        if np.any(values > problem.obstacle):
            raise IntegrityError(f'Sweep {sweep} lifted a node above the obstacle')

        history.append(SweepRecord(sweep, float(max_lift), float(max_residual), skipped))
        if skipped:
            _LOGGER.warning(f'Sweep {sweep}: {skipped} nodes had no root above their value and were skipped')
        if log_iterations:
            _LOGGER.debug(f'Sweep {sweep}: max lift {max_lift:.3e}, max residual {max_residual:.3e}')
        if max_lift < tol:
            break
    else:
        _LOGGER.error(f'Lifting did not converge in {max_sweeps} sweeps')
        raise ConvergenceError(f'Lifting did not converge in {max_sweeps} sweeps (last lift '
                               f'{history[-1].max_lift:.3e})', [h.to_dict() for h in history])

    fn = lower_convex_envelope(cloud, values)
    atoms = ma_atoms(fn)
    contact = np.isfinite(problem.obstacle) & (fn.values >= problem.obstacle - 1e-10 * (1.0 + np.abs(problem.obstacle)))
    _LOGGER.info(f'Lifting converged after {len(history)} sweeps, {int(contact.sum())} contact nodes')
    return DiscreteSolution(problem, fn, atoms, contact, history)
