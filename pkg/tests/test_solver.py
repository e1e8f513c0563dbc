import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from monge_ampere_lab.core import MAAtomTable, PointCloud, lower_convex_envelope
from monge_ampere_lab.enums.lab_enums import ScenarioKind, SweepMode
from monge_ampere_lab.errors import ConfigError, ConstraintError, ConvergenceError
from monge_ampere_lab.solver import (DiscreteProblem, DiscreteSolution, ScenarioSpec, build_problem, dump_profile,
                                     dump_solution, extract_singular_density, refinement_study, solve, verify)
from monge_ampere_lab.solver.mesh import grading_levels


def grid_problem(offset: float = 0.05) -> DiscreteProblem:
    """|x|^2 / 2 boundary data on the 0.25 grid of [-1, 1]^2, started `offset` below it."""
    cloud = PointCloud.grid([-1.0, -1.0], [1.0, 1.0], 0.25)
    exact = 0.5 * np.sum(cloud.nodes ** 2, axis=1)
    values = np.where(cloud.boundary_mask, exact, exact - offset)
    mu = np.full(cloud.size, 0.0625)
    return DiscreteProblem(cloud, mu, values, np.full(cloud.size, np.inf), values.copy(), exact + 10.0)


@pytest.fixture(scope='module')
def grid_solution():
    return solve(grid_problem(), tol=1e-9)


#### LIFTING ###########################################################################################################
def test_lifting_recovers_the_quadratic(grid_solution):
    exact = 0.5 * np.sum(grid_solution.problem.cloud.nodes ** 2, axis=1)
    assert_allclose(grid_solution.values, exact, atol=1e-6)
    interior = grid_solution.problem.cloud.interior_mask
    assert_allclose(grid_solution.atoms.atoms[interior], 0.0625, rtol=1e-4)
    assert not grid_solution.contact.any()


def test_sweeps_only_raise_values(grid_solution):
    lifts = [record.max_lift for record in grid_solution.history]
    assert all(lift >= 0.0 for lift in lifts)
    assert lifts[-1] < 1e-9
    assert np.all(grid_solution.values >= grid_solution.problem.values - 1e-15)


def test_verification_on_the_grid(grid_solution):
    report = verify(grid_solution)
    for name in ('sandwich D <= u', 'sandwich u <= W_n + 10', 'off-support residual', 'mass deficit'):
        assert report.check(name).passed, name


@pytest.mark.slow
def test_jacobi_sweeps_reach_the_same_solution(grid_solution):
    jacobi = solve(grid_problem(), tol=1e-9, mode=SweepMode.JACOBI)
    assert_allclose(jacobi.values, grid_solution.values, atol=1e-6)


@pytest.mark.slow
def test_obstacle_caps_the_lift():
    problem = grid_problem()
    centre = int(np.argmin(np.linalg.norm(problem.cloud.nodes, axis=1)))
    problem.obstacle[centre] = -0.04
    sol = solve(problem, tol=1e-9)
    assert sol.values[centre] == pytest.approx(-0.04, abs=1e-12)
    assert sol.contact[centre]
    # the cap leaves excess mass at the contact node
    assert sol.atoms.atoms[centre] > 0.0625


def test_exhausted_sweeps_carry_the_log():
    with pytest.raises(ConvergenceError) as info:
        solve(grid_problem(), tol=1e-12, max_sweeps=1)
    assert len(info.value.history) == 1
    assert info.value.history[0]['sweep'] == 1


def test_initial_values_above_the_obstacle_are_rejected():
    problem = grid_problem()
    obstacle = np.full(problem.cloud.size, np.inf)
    obstacle[problem.cloud.interior_mask] = -1.0
    with pytest.raises(ConfigError):
        DiscreteProblem(problem.cloud, problem.mu, problem.values, obstacle, problem.lower, problem.upper)


def test_interior_masses_must_be_positive():
    problem = grid_problem()
    with pytest.raises(ConfigError):
        DiscreteProblem(problem.cloud, np.zeros(problem.cloud.size), problem.values, problem.obstacle,
                        problem.lower, problem.upper)


def test_more_mass_lowers_the_solution():
    """Doubling mu near the centre; both solves start from sqrt(2) |x|^2 / 2 - 0.42, a subsolution of either."""
    cloud = PointCloud.grid([-1.0, -1.0], [1.0, 1.0], 0.25)
    exact = 0.5 * np.sum(cloud.nodes ** 2, axis=1)
    values = np.where(cloud.boundary_mask, exact, np.sqrt(2.0) * exact - 0.42)
    mu = np.full(cloud.size, 0.0625)
    doubled = np.where(np.abs(cloud.nodes).max(axis=1) <= 0.5, 2.0 * mu, mu)

    free = np.full(cloud.size, np.inf)
    base = solve(DiscreteProblem(cloud, mu, values.copy(), free, values.copy(), exact + 10.0), tol=1e-10)
    heavy = solve(DiscreteProblem(cloud, doubled, values.copy(), free, values.copy(), exact + 10.0), tol=1e-10)
    assert np.all(heavy.values <= base.values + 1e-9)
    centre = int(np.argmin(np.linalg.norm(cloud.nodes, axis=1)))
    assert heavy.values[centre] < base.values[centre] - 1e-3


def test_raising_the_obstacle_never_lowers_the_solution():
    centre = int(np.argmin(np.linalg.norm(grid_problem().cloud.nodes, axis=1)))
    solutions = []
    for cap in (-0.04, -0.02):
        problem = grid_problem()
        problem.obstacle[centre] = cap
        solutions.append(solve(problem, tol=1e-10))
    low, high = solutions
    assert np.all(low.values <= high.values + 1e-12)
    assert low.values[centre] < high.values[centre]


def test_reruns_are_byte_identical(tmp_path):
    first = dump_solution(solve(grid_problem(), tol=1e-9), tmp_path / 'first.csv')
    second = dump_solution(solve(grid_problem(), tol=1e-9), tmp_path / 'second.csv')
    assert first.read_bytes() == second.read_bytes()


#### SCENARIOS #########################################################################################################
@pytest.mark.parametrize('kwargs, error', [
    ({'kind': 'segment', 'n': 2, 'k': 2}, ConstraintError),
    ({'kind': 'segment', 'n': 4}, ConstraintError),
    ({'kind': 'polytope_skeleton', 'n': 2, 'k': 2}, ConstraintError),
    ({'kind': 'segment', 'h0': 0.01, 'h_min': 0.05}, ConfigError),
    ({'kind': 'segment', 'epsilon': 3.0}, ConfigError),
    ({'kind': 'smooth_boundary', 'boundary_radius': 2.5}, ConfigError),
    ({'kind': 'cross', 'arm_length': 0.5}, ConfigError),
])
def test_invalid_scenarios(kwargs, error):
    with pytest.raises(error):
        ScenarioSpec(**kwargs)


def test_grading_levels_double_up_to_h0():
    assert grading_levels(0.2, 0.05, 2.0) == [0.05, 0.1, 0.2]
    with pytest.raises(ConfigError):
        grading_levels(0.1, 0.2, 2.0)


def test_segment_problem_layout():
    spec = ScenarioSpec(ScenarioKind.SEGMENT, h0=0.25, h_min=0.1)
    problem = build_problem(spec)
    cloud = problem.cloud
    support = cloud.nodes[problem.support_nodes]

    assert_allclose(support[:, 0], 0.0)
    assert np.all(np.abs(support[:, 1]) < spec.epsilon)
    assert np.isfinite(problem.obstacle).sum() == len(problem.support_nodes)
    assert set(np.flatnonzero(cloud.obstacle_mask)) == set(problem.support_nodes.tolist())
    assert np.all(problem.values <= problem.obstacle)
    assert_allclose(problem.values[cloud.boundary_mask], problem.upper[cloud.boundary_mask])
    assert np.all(np.linalg.norm(cloud.nodes, axis=1) <= spec.radius + 1e-9)
    assert problem.mu.sum() == pytest.approx(np.pi * spec.radius ** 2, rel=0.02)


def test_mesh_is_symmetric_about_both_axes():
    problem = build_problem(ScenarioSpec(ScenarioKind.CROSS, h0=0.25, h_min=0.1))
    nodes = problem.cloud.nodes
    for reflection in (np.array([-1.0, 1.0]), np.array([1.0, -1.0])):
        mirrored = {tuple(np.round(p, 9)) for p in nodes * reflection}
        assert mirrored == {tuple(np.round(p, 9)) for p in nodes}


def test_density_needs_a_support(grid_solution):
    with pytest.raises(ConfigError):
        extract_singular_density(grid_solution)


def test_refinement_needs_two_spacings():
    with pytest.raises(ConfigError):
        refinement_study(ScenarioSpec(ScenarioKind.SEGMENT), [0.01])


def test_negative_excess_is_clipped_with_a_warning(caplog):
    problem = build_problem(ScenarioSpec(ScenarioKind.SEGMENT, h0=0.25, h_min=0.1))
    fn = lower_convex_envelope(problem.cloud, problem.values)
    zeros = np.zeros(problem.cloud.size)
    sol = DiscreteSolution(problem, fn, MAAtomTable(zeros, zeros.copy()), np.zeros(problem.cloud.size, dtype=bool))
    with caplog.at_level(logging.WARNING, logger='monge_ampere_lab.solver.density'):
        profile = extract_singular_density(sol)
    assert np.all(profile.density == 0.0)
    assert profile.clipped_mass == pytest.approx(problem.mu[problem.support_nodes].sum())
    assert 'clipped_mass' in profile.summary()
    assert 'negative excess' in caplog.text


@pytest.mark.slow
def test_segment_solution_carries_singular_mass(tmp_path):
    spec = ScenarioSpec(ScenarioKind.SEGMENT, h0=0.2, h_min=0.05)
    sol = solve(build_problem(spec), tol=1e-8)
    report = verify(sol, spec)
    assert report.check('sandwich D <= u').passed
    assert report.check('sandwich u <= W_n + 10').passed

    profile = extract_singular_density(sol, spec)
    assert sol.contact[profile.nodes].any()
    assert profile.inner_min > 0.0
    assert np.all(profile.density >= 0.0)

    assert dump_solution(sol, tmp_path / 'solution.csv').read_text().startswith('x,y,u,atom,mu,tag,contact\n')
    assert dump_profile(profile, tmp_path / 'profile.csv').read_text().startswith('s1,excess,cell,f\n')


@pytest.mark.slow
def test_cross_reports_a_junction_candidate():
    spec = ScenarioSpec(ScenarioKind.CROSS, h0=0.2, h_min=0.05)
    profile = extract_singular_density(solve(build_problem(spec), tol=1e-8), spec)
    assert profile.junction_excess is not None
    assert 'c0_candidate' in profile.summary()


#### ACCEPTANCE ########################################################################################################
def passed(report, *names):
    return {name: report.check(name).passed for name in names}


@pytest.mark.slow
def test_segment_density_stays_above_the_continuum_bound():
    spec = ScenarioSpec(ScenarioKind.SEGMENT, h0=0.2, h_min=0.02)
    sol = solve(build_problem(spec), tol=1e-8)
    report = verify(sol, spec)
    checks = passed(report, 'sandwich D <= u', 'sandwich u <= W_n + 10', 'off-support residual', 'symmetry defect')
    assert all(checks.values()), checks
    # continuum bound 1/2 with 20% discrete slack
    assert extract_singular_density(sol, spec).inner_min >= 0.4


@pytest.mark.slow
def test_segment_density_is_stable_under_refinement():
    study = refinement_study(ScenarioSpec(ScenarioKind.SEGMENT, h0=0.2), [0.02, 0.01])
    assert study.stable, study.relative_change
    assert min(study.inner_min) > 0.0


@pytest.mark.slow
def test_square_skeleton_density_and_sections():
    spec = ScenarioSpec(ScenarioKind.POLYTOPE_SKELETON, alpha=0.8, h0=0.2, h_min=0.02)
    sol = solve(build_problem(spec), tol=1e-8)
    report = verify(sol, spec)
    assert report.section_heights == [0.02, 0.04, 0.08, 0.16]
    assert report.check('section ratio growth').passed
    # continuum bound 1/8 with 36% slack
    assert extract_singular_density(sol, spec).inner_min >= 0.08


@pytest.mark.slow
def test_cross_carries_a_junction_atom_and_density_on_both_arms():
    spec = ScenarioSpec(ScenarioKind.CROSS, h0=0.2, h_min=0.02)
    sol = solve(build_problem(spec), tol=1e-8)
    assert verify(sol, spec).check('symmetry defect').passed

    profile = extract_singular_density(sol, spec)
    assert profile.junction_excess > 0.0
    arms = profile.inner & (np.linalg.norm(profile.positions, axis=1) > spec.h_min)
    for axis in range(2):
        on_arm = arms & (np.abs(profile.positions[:, 1 - axis]) < 1e-9)
        assert on_arm.any()
        assert np.all(profile.density[on_arm] > 0.0)


@pytest.mark.slow
def test_circle_density_is_positive_everywhere():
    spec = ScenarioSpec(ScenarioKind.SMOOTH_BOUNDARY, h0=0.2, h_min=0.02)
    sol = solve(build_problem(spec), tol=1e-8)
    assert verify(sol, spec).check('off-support residual').passed
    profile = extract_singular_density(sol, spec)
    assert len(profile.density) > 0
    assert np.all(profile.density > 0.0)


@pytest.mark.slow
def test_segment_in_three_dimensions():
    spec = ScenarioSpec(ScenarioKind.SEGMENT, n=3, k=1, h0=0.4, h_min=0.1)
    sol = solve(build_problem(spec), tol=1e-8)
    report = verify(sol, spec)
    checks = passed(report, 'sandwich D <= u', 'sandwich u <= W_n + 10')
    assert all(checks.values()), checks
    profile = extract_singular_density(sol, spec)
    assert profile.coords.shape[1] == 1
    assert sol.contact[profile.nodes].any()
    assert np.all(profile.density >= 0.0)
