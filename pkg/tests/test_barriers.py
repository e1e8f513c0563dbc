import numpy as np
import pytest
from numpy.testing import assert_allclose

from monge_ampere_lab.barriers.admissibility import admissibility_check
from monge_ampere_lab.barriers.barrier import BarrierSpec, eval_barrier, implied_density
from monge_ampere_lab.barriers.interaction import barrier_constant_search, hessian_det_check, sample_grid
from monge_ampere_lab.barriers.obstacle import ObstacleSpec, eval_obstacle, profile_derivative, profile_value
from monge_ampere_lab.barriers.radial import eval_w, growth_check, w_profile
from monge_ampere_lab.enums.lab_enums import BarrierVariant, ObstacleProfile
from monge_ampere_lab.errors import ConfigError


#### RADIAL ############################################################################################################
@pytest.mark.parametrize('n, x, expected', [
    (1, [1.0], 1.5),
    (2, [1.0, 0.0], 1.1477935747),
    (2, [0.3, 0.4], 0.5201144097),
])
def test_w_values(n, x, expected):
    assert eval_w(n, x).value == pytest.approx(expected, abs=1e-9)


def test_w_origin_reports_the_unit_subgradient_ball():
    value = eval_w(2, [0.0, 0.0])
    assert value.value == 0.0
    assert value.subgradient_radius == 1.0


def test_w_dominates_the_norm(rng):
    radii = rng.uniform(0.0, 5.0, 200)
    assert np.all(w_profile(3, radii) >= radii - 1e-12)


def test_w_gradient_matches_finite_differences():
    x = np.array([0.6, -0.8])
    step = 1e-4
    numeric = [(eval_w(2, x + e).value - eval_w(2, x - e).value) / (2.0 * step) for e in np.eye(2) * step]
    assert_allclose(eval_w(2, x).gradient, numeric, atol=1e-6)


def test_w_profile_agrees_with_pointwise_values():
    radii = np.array([0.7, 0.1, 2.5, 0.1])
    assert_allclose(w_profile(2, radii), [eval_w(2, [r, 0.0]).value for r in radii], atol=1e-10)


def test_planar_growth_is_logarithmic():
    report = growth_check(2, [2, 4, 8, 16])
    assert report.max_fit_residual <= 1e-3
    assert report.coefficients['a'] == pytest.approx(0.5, abs=0.01)
    assert report.constant is None


def test_spatial_growth_constant_is_stable():
    full = growth_check(3, [2, 4, 8, 16])
    prefix = growth_check(3, [2, 4, 8])
    assert full.constant > 0.0
    assert prefix.constant == pytest.approx(full.constant, rel=1e-3)


def test_growth_needs_three_radii():
    with pytest.raises(ConfigError):
        growth_check(2, [4.0])


#### OBSTACLE ##########################################################################################################
def test_obstacle_is_quadratic_on_the_support_core():
    spec = ObstacleSpec(n=2, k=1, alpha=0.5, epsilon=0.2)
    assert eval_obstacle(spec, [0.0, 0.3 * 0.2]) == pytest.approx(0.045 * 0.2 ** 2, rel=1e-12)


def test_obstacle_is_infinite_off_the_support():
    spec = ObstacleSpec(n=2, k=1, alpha=0.5, epsilon=0.2)
    assert eval_obstacle(spec, [0.01, 0.0]) == np.inf


def test_tail_stays_below_the_cap_with_exploding_slope():
    spec = ObstacleSpec(alpha=0.5)
    assert profile_value(spec, np.array([1.0]))[0] <= 5.0 + 1e-9
    assert profile_derivative(spec, np.array([1.0 - 1e-6]))[0] >= 1e3
    slopes = profile_derivative(spec, np.linspace(0.51, 0.999, 200))
    assert np.all(np.diff(slopes) > 0.0)


def test_quadratic_profile_has_no_tail():
    spec = ObstacleSpec(alpha=0.5, profile=ObstacleProfile.QUADRATIC)
    assert profile_value(spec, np.array([0.9]))[0] == pytest.approx(0.405)


@pytest.mark.parametrize('kwargs', [{'k': 2}, {'alpha': 1.0}, {'epsilon': 0.0}])
def test_invalid_obstacles_are_config_errors(kwargs):
    with pytest.raises(ConfigError):
        ObstacleSpec(**kwargs)


#### BARRIERS ##########################################################################################################
def test_caffarelli_barrier_value_and_jump():
    spec = BarrierSpec(BarrierVariant.CAFFARELLI)
    assert eval_barrier(spec, [0.5, 0.0])[0] == pytest.approx(0.625)
    step = 1e-6
    right = (eval_barrier(spec, [step, 0.0])[0] - eval_barrier(spec, [0.0, 0.0])[0]) / step
    left = (eval_barrier(spec, [0.0, 0.0])[0] - eval_barrier(spec, [-step, 0.0])[0]) / step
    assert right - left == pytest.approx(2.0, abs=1e-5)
    assert implied_density(spec) == 2.0


def test_line_barrier_on_the_rho_sphere():
    spec = BarrierSpec(BarrierVariant.PHI_LINE, rho=0.5)
    angles = np.linspace(0.0, 2.0 * np.pi, 73)
    points = 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])
    assert eval_barrier(spec, points).max() <= 0.25 + 1e-12


def test_lower_barrier_vanishes_on_the_eps_sphere():
    spec = BarrierSpec(BarrierVariant.LOWER_D, n=2, epsilon=0.2)
    assert eval_barrier(spec, [0.0, 0.2])[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('spec', [
    BarrierSpec(BarrierVariant.PHI_LINE),
    BarrierSpec(BarrierVariant.PHI_CROSS, directions=[[1.0, 0.0], [0.0, 1.0]]),
    BarrierSpec(BarrierVariant.PHI_POLYTOPE, face_point=[0.0, 0.1], face_normal=[0.0, -1.0]),
    BarrierSpec(BarrierVariant.CAFFARELLI),
    BarrierSpec(BarrierVariant.LOWER_D),
])
def test_barriers_are_midpoint_convex(spec, rng):
    a = rng.uniform(-1.0, 1.0, (2000, 2))
    b = rng.uniform(-1.0, 1.0, (2000, 2))
    middle = eval_barrier(spec, (a + b) / 2.0)
    assert np.all(middle <= (eval_barrier(spec, a) + eval_barrier(spec, b)) / 2.0 + 1e-10)


def test_polytope_barrier_needs_face_data():
    with pytest.raises(ConfigError):
        eval_barrier(BarrierSpec(BarrierVariant.PHI_POLYTOPE), [0.0, 0.0])


def test_cross_weights_must_match_directions():
    spec = BarrierSpec(BarrierVariant.PHI_CROSS, directions=[[1.0, 0.0], [0.0, 1.0]], weights=[0.1])
    with pytest.raises(ConfigError):
        eval_barrier(spec, [0.1, 0.1])


#### ADMISSIBILITY #####################################################################################################
def test_line_chain_passes_at_the_defaults():
    report = admissibility_check(2, 1, 0.2, 0.5, 0.5)
    assert report.passed, report.as_text()
    assert report.implied_bound == 0.5
    assert 'pass = true' in report.as_text()


def test_large_rho_breaks_the_chain():
    report = admissibility_check(2, 1, 0.2, 0.9, 0.5)
    assert not report.passed
    assert 'rho^2/2 <= rho/4' in report.failed()
    assert report.implied_bound is None


def chain_record(report):
    return next(r for r in report.records if r.name.startswith('rho^2/2'))


@pytest.mark.parametrize('variant', [BarrierVariant.PHI_CROSS, BarrierVariant.PHI_POLYTOPE])
def test_cross_and_polytope_chains_need_rho_below_one_eighth(variant):
    small = chain_record(admissibility_check(2, 1, 0.02, 0.1, 0.5, variant))
    assert small.name == 'rho^2/2 <= rho/16'
    assert small.rhs == pytest.approx(0.1 / 16.0)
    assert small.passed

    large = admissibility_check(2, 1, 0.2, 0.5, 0.5, variant)
    assert 'rho^2/2 <= rho/16' in large.failed()
    assert large.implied_bound is None


def test_weighted_cross_chain_scales_with_the_weights():
    record = chain_record(admissibility_check(2, 1, 0.02, 0.2, 0.5, BarrierVariant.PHI_CROSS, weights=[0.25, 0.25]))
    assert record.name == 'rho^2/2 <= rho sum(w)/2'
    assert record.lhs == pytest.approx(0.02)
    assert record.rhs == pytest.approx(0.05)
    assert record.passed


@pytest.mark.parametrize('eps, rho, alpha', [(0.5, 0.5, 0.5), (0.2, 1.0, 0.5), (0.2, 0.5, 1.0)])
def test_parameter_ordering_is_enforced(eps, rho, alpha):
    with pytest.raises(ConfigError):
        admissibility_check(2, 1, eps, rho, alpha)


def test_caffarelli_has_no_admissibility_chain():
    with pytest.raises(ConfigError):
        admissibility_check(2, 1, 0.2, 0.5, 0.5, BarrierVariant.CAFFARELLI)


#### INTERACTION #######################################################################################################
def test_constant_search_brackets_the_determinant_bound():
    samples = sample_grid(5)
    constant = barrier_constant_search(samples)
    at = hessian_det_check(constant, samples)
    assert at.passed
    assert at.min_det >= 1.0
    assert not hessian_det_check(0.01, samples).passed
    # det = C^3 (32/27) (1 + z^2) (1 - 7 z^2) is smallest on the slab edge |z| = 0.3
    expected = (27.0 / 32.0 / (1.09 * 0.37)) ** (1.0 / 3.0)
    assert constant == pytest.approx(expected, rel=1e-2)


def test_interaction_is_decoupled_in_x():
    check = hessian_det_check(1.5, sample_grid(5))
    assert check.max_cross_coupling < 1e-6
    assert len(check.rejected) == 25


def test_interaction_samples_must_be_four_dimensional():
    with pytest.raises(ConfigError):
        hessian_det_check(1.0, np.zeros((3, 3)))
