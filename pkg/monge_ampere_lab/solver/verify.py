import itertools
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..core.sections import flat_set_probe, section
from ..dto.report_dtos import CheckRecord, VerificationReport
from ..enums.lab_enums import ScenarioKind
from .lifting import DiscreteSolution
from .problem import ScenarioSpec

_LOGGER = logging.getLogger(__name__)

SECTION_HEIGHTS = (0.02, 0.04, 0.08, 0.16)
SANDWICH_TOLERANCE = 1e-8
RESIDUAL_TOLERANCE = 0.05
SYMMETRY_TOLERANCE = 1e-9
THINNESS_CONSTANT = 10.0


def symmetry_group(kind: Optional[ScenarioKind], dim: int) -> List[np.ndarray]:
    """Coordinate reflections, plus coordinate swaps for the scenarios with dihedral symmetry."""
    group = []
    for axis in range(dim):
        reflection = np.eye(dim)
        reflection[axis, axis] = -1.0
        group.append(reflection)
    if kind in (ScenarioKind.CROSS, ScenarioKind.SMOOTH_BOUNDARY, ScenarioKind.POLYTOPE_SKELETON):
        for a, b in itertools.combinations(range(dim), 2):
            swap = np.eye(dim)
            swap[[a, b]] = swap[[b, a]]
            group.append(swap)
    return group


def symmetry_defect(sol: DiscreteSolution, group: Sequence[np.ndarray]) -> Tuple[float, int]:
    """Largest |u(x) - u(Tx)| over the transforms that map the cloud and its tags onto themselves."""
    cloud = sol.problem.cloud
    tree = cKDTree(cloud.nodes)
    defect, used = 0.0, 0
    for transform in group:
        distance, image = tree.query(cloud.nodes @ transform.T)
        if distance.max() > 1e-9 * cloud.scale or np.any(cloud.tags[image] != cloud.tags):
            _LOGGER.debug('Skipping a transform that is not a symmetry of the discretization')
            continue
        used += 1
        defect = max(defect, float(np.abs(sol.values - sol.values[image]).max()))
    return defect, used


def section_ratios(sol: DiscreteSolution, heights: Sequence[float]) -> Tuple[List[float], List[float]]:
    problem = sol.problem
    if len(problem.support_nodes) == 0:
        return [], []
    nodes = problem.support_nodes[sol.fn.active[problem.support_nodes]]
    if len(nodes) == 0:
        return [], []
    base = int(nodes[np.argmin(np.linalg.norm(problem.cloud.nodes[nodes], axis=1))])
    dim = problem.cloud.dim
    used, ratios = [], []
    for h in heights:
        result = section(sol.fn, base, h)
        used.append(float(h))
        ratios.append(result.volume / h ** (dim / 2.0))
    return used, ratios


def thinness_defect(sol: DiscreteSolution) -> float:
    """
    Spread of the subgradients of contact boundary nodes along the support directions. At such
    a node every subgradient shares its tangential part with the obstacle gradient.
    """
    problem = sol.problem
    support = problem.support
    if support is None or support.size < 2:
        return 0.0
    contact = sol.contact[problem.support_nodes]
    if contact.all() or not contact.any():
        return 0.0

    tree = cKDTree(support.points)
    incident = sol.fn.incident_facets()
    reach = 1.5 * problem.h_min
    worst = 0.0
    for row in np.flatnonzero(contact & ~support.junction):
        neighbours = tree.query_ball_point(support.points[row], reach)
        if contact[neighbours].all():
            continue
        gradients = sol.fn.gradients[incident[problem.support_nodes[row]]]
        if len(gradients) == 0:
            continue
        along = gradients @ support.tangents[row].T
        worst = max(worst, float((along.max(axis=0) - along.min(axis=0)).max()))
    return worst


def verify(sol: DiscreteSolution, spec: Optional[ScenarioSpec] = None,
           heights: Sequence[float] = SECTION_HEIGHTS, residual_tol: float = RESIDUAL_TOLERANCE,
           symmetry_tol: float = SYMMETRY_TOLERANCE, thinness_constant: float = THINNESS_CONSTANT) -> VerificationReport:
    problem = sol.problem
    spec = spec if spec is not None else problem.spec
    cloud = problem.cloud
    u = sol.values
    report = VerificationReport()

    report.checks.append(CheckRecord.compare('sandwich D <= u', float(np.maximum(problem.lower - u, 0.0).max()),
                                             SANDWICH_TOLERANCE))
    report.checks.append(CheckRecord.compare('sandwich u <= W_n + 10', float(np.maximum(u - problem.upper, 0.0).max()),
                                             SANDWICH_TOLERANCE))

    interior = cloud.interior_mask
    ratio = sol.atoms.atoms / np.where(problem.mu > 0, problem.mu, 1.0)
    off_support = interior & (problem.support_distance > 2.0 * problem.h_min)
    residual = float(np.abs(ratio[off_support] - 1.0).max()) if off_support.any() else 0.0
    report.checks.append(CheckRecord.compare('off-support residual', residual, residual_tol))
    deficit = float(np.maximum(1.0 - ratio[interior], 0.0).max()) if interior.any() else 0.0
    report.checks.append(CheckRecord.compare('mass deficit', deficit, residual_tol))

    report.section_heights, report.section_ratios = section_ratios(sol, heights)
    if report.section_ratios:
        report.checks.append(CheckRecord.compare('section ratio growth', max(report.section_ratios),
                                                 2.0 * report.section_ratios[-1]))

    defect, used = symmetry_defect(sol, symmetry_group(spec.kind if spec else None, cloud.dim))
    if used:
        report.checks.append(CheckRecord.compare('symmetry defect', defect, symmetry_tol))

    report.checks.append(CheckRecord.compare('thinness defect', thinness_defect(sol),
                                             thinness_constant * problem.h_min))

    pieces = flat_set_probe(sol.fn, tol=1e-9, node_mask=off_support)
    flagged = sum(1 for p in pieces if p.has_interior_extreme)
    report.flat_pieces = len(pieces)
    report.checks.append(CheckRecord.compare('interior extreme points', flagged, 0))

    for check in report.checks:
        if not check.passed:
            _LOGGER.warning(f'Verification check {check.name} failed: {check.lhs:.6g} {check.relation} {check.rhs:.6g}')
    return report
