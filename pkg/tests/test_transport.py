import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial import ConvexHull

from monge_ampere_lab.core import ma_atoms
from monge_ampere_lab.errors import ConfigError, GeometryError, RangeError, ShapeError
from monge_ampere_lab.transport import (ShapeSpec, brenier_potential, detect_singular_set, displacement_frames,
                                        map_error, power_diagram, sample_shape, solve_dual, split_ball_reference)
from monge_ampere_lab.transport.dual import hessian, initial_weights
from monge_ampere_lab.transport.frames import check_time
from monge_ampere_lab.transport.io import dump_dual, dump_frames, dump_singular_graph, load_dual
from monge_ampere_lab.transport.shapes import SampleSet
from monge_ampere_lab.transport.singular import distance_to_segments, graph_symmetry_defect, hausdorff_to_segments

SQUARE = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
AXIS = [[[0.0, -1.0], [0.0, 1.0]]]
AXES = [[[-1.0, 0.0], [1.0, 0.0]], [[0.0, -1.0], [0.0, 1.0]]]
DIHEDRAL = [np.diag([-1.0, 1.0]), np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])]


def solve_shape(name: str, count: int, **kwargs):
    spec = ShapeSpec(name, **kwargs)
    pair = spec.build()
    return solve_dual(pair.source_vertices(), sample_shape(spec, count, pair))


@pytest.fixture(scope='module')
def diamond_dual():
    return solve_shape('framed_diamond', 30)


@pytest.fixture(scope='module')
def split_dual():
    return solve_shape('split_ball', 60, vertices=64)


#### SHAPES ############################################################################################################
def test_framed_diamond_sites_avoid_the_source():
    samples = sample_shape(ShapeSpec('framed_diamond'), 200)
    x, y = np.abs(samples.sites).T
    assert np.all(np.maximum(x, y) <= 1.0 + 1e-12)
    assert np.all(x + y >= 1.0 - 1e-12)
    assert samples.total == pytest.approx(2.0, rel=1e-12)


def test_square_frame_sites_lie_in_the_frame():
    samples = sample_shape(ShapeSpec('square_frame'), 200)
    assert np.all(np.abs(samples.sites).max(axis=1) >= 0.8)
    assert samples.total == pytest.approx(1.6 ** 2, rel=1e-12)


def test_split_ball_and_pacman_targets():
    halves = sample_shape(ShapeSpec('split_ball'), 200).sites
    assert np.all(np.abs(halves[:, 0]) >= 1.0)
    pacman = sample_shape(ShapeSpec('pacman'), 200).sites
    assert np.all(pacman[:, 1] <= 2.0 * np.abs(pacman[:, 0]) + 1e-12)
    assert np.all(np.linalg.norm(pacman, axis=1) <= 1.0)


def test_sampling_is_deterministic():
    first = sample_shape(ShapeSpec('cats_eye'), 100)
    second = sample_shape(ShapeSpec('cats_eye'), 100)
    assert_allclose(first.sites, second.sites, rtol=0.0, atol=0.0)
    assert first.draws == second.draws


def test_nonconvex_source_is_rejected():
    corner = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]
    spec = ShapeSpec('custom', source=corner, target=SQUARE.tolist())
    with pytest.raises(ShapeError):
        spec.build()


@pytest.mark.parametrize('kwargs', [
    {'name': 'square_frame', 'lam': 1.2},
    {'name': 'pacman', 'slope': 0.0},
    {'name': 'cats_eye', 'radius_sq': 0.5},
    {'name': 'custom'},
])
def test_invalid_shapes_are_config_errors(kwargs):
    with pytest.raises(ConfigError):
        ShapeSpec(**kwargs)


def test_too_few_sites_is_a_config_error():
    with pytest.raises(ConfigError):
        sample_shape(ShapeSpec('split_ball'), 3)


#### POWER DIAGRAM #####################################################################################################
def test_power_cells_tile_the_source(rng):
    sites = rng.uniform(-1.5, 1.5, (50, 2))
    diagram = power_diagram(sites, rng.uniform(-0.1, 0.1, 50), SQUARE)
    assert diagram.areas.sum() == pytest.approx(4.0, rel=1e-9)
    assert np.all(diagram.areas >= 0.0)
    assert np.all(diagram.lengths > 0.0)
    assert np.all(diagram.pairs[:, 0] < diagram.pairs[:, 1])


def test_zero_weights_give_the_voronoi_halves():
    diagram = power_diagram(np.array([[-0.5, 0.0], [0.5, 0.0]]), np.zeros(2), SQUARE)
    assert_allclose(diagram.areas, [2.0, 2.0])
    assert_allclose(diagram.lengths, [2.0])
    assert_allclose(np.abs(diagram.segments[0, :, 0]), 0.0, atol=1e-12)


def test_duplicate_sites_are_rejected():
    sites = np.array([[0.0, 0.0], [0.5, 0.5], [0.0, 0.0]])
    with pytest.raises(GeometryError):
        power_diagram(sites, np.zeros(3), SQUARE)


def test_hessian_matches_finite_differences(rng):
    sites = rng.uniform(-0.9, 0.9, (12, 2))
    weights = rng.uniform(-0.05, 0.05, 12)
    matrix = hessian(power_diagram(sites, weights, SQUARE)).toarray()
    assert_allclose(matrix.sum(axis=1), 0.0, atol=1e-12)
    step = 1e-6
    for j in (0, 5, 11):
        shift = np.zeros(12)
        shift[j] = step
        numeric = (power_diagram(sites, weights + shift, SQUARE).areas
                   - power_diagram(sites, weights - shift, SQUARE).areas) / (2.0 * step)
        assert_allclose(matrix[:, j], numeric, atol=1e-5)


def test_initial_weights_leave_no_cell_empty():
    spec = ShapeSpec('cats_eye')
    pair = spec.build()
    samples = sample_shape(spec, 200, pair)
    source = pair.source_vertices()
    diagram = power_diagram(samples.sites, initial_weights(samples.sites, source), source)
    assert np.all(diagram.areas > 0.0)


#### DUAL ##############################################################################################################
def test_dual_matches_every_mass(diamond_dual):
    assert diamond_dual.converged
    assert diamond_dual.weights[0] == 0.0
    assert_allclose(diamond_dual.areas, diamond_dual.masses, rtol=1e-7)
    residuals = [record.residual for record in diamond_dual.history]
    assert all(later < earlier for earlier, later in zip(residuals, residuals[1:]))


def test_mass_mismatch_is_a_config_error(diamond_dual):
    samples = SampleSet(diamond_dual.sites, 2.0 * diamond_dual.masses)
    with pytest.raises(ConfigError):
        solve_dual(diamond_dual.source, samples)


def test_potential_is_maximal_on_its_own_cell(diamond_dual):
    centroids = diamond_dual.diagram.centroids()
    assert (diamond_dual.assign(centroids) == np.arange(len(centroids))).all()
    assert_allclose(diamond_dual.transport(centroids), diamond_dual.sites)


def test_brenier_atoms_are_the_site_polygons(diamond_dual):
    fn = brenier_potential(diamond_dual)
    atoms = ma_atoms(fn).atoms
    sites = diamond_dual.sites
    scores = fn.cloud.nodes @ sites.T - diamond_dual.shifts
    checked = 0
    for node in np.flatnonzero(fn.cloud.interior_mask & fn.active):
        incident = np.flatnonzero(scores[node] >= scores[node].max() - 1e-9)
        if len(incident) < 3:
            continue
        assert atoms[node] == pytest.approx(ConvexHull(sites[incident]).volume, rel=1e-6, abs=1e-12)
        checked += 1
    assert checked > 0


def test_assigned_pairs_are_cyclically_monotone(diamond_dual, rng):
    points = rng.uniform(-1.0, 1.0, (20000, 2))
    points = points[np.abs(points).sum(axis=1) < 1.0][:10000]
    maps = diamond_dual.transport(points)
    other = rng.permutation(len(points))
    pairing = np.einsum('ij,ij->i', maps - maps[other], points - points[other])
    assert pairing.min() >= -1e-9


def test_reflected_sites_reproduce_the_weights(diamond_dual):
    reference = solve_dual(diamond_dual.source, SampleSet(diamond_dual.sites, diamond_dual.masses), tol=1e-12)
    for reflection in (np.array([-1.0, 1.0]), np.array([1.0, -1.0])):
        mirrored = solve_dual(diamond_dual.source, SampleSet(diamond_dual.sites * reflection, diamond_dual.masses),
                              tol=1e-12)
        assert_allclose(mirrored.weights, reference.weights, atol=1e-8)


#### REFERENCE #########################################################################################################
def test_split_ball_reference_off_the_axis():
    value = split_ball_reference([0.5, 0.2])
    assert not value.singular
    assert_allclose(value.image, [1.5, 0.2])
    assert value.potential == pytest.approx(0.645)
    assert_allclose(split_ball_reference([-0.5, 0.2]).image, [-1.5, 0.2])


def test_split_ball_reference_on_the_axis():
    value = split_ball_reference([0.0, 0.3])
    assert value.singular
    assert_allclose(value.interval[0], [-1.0, 0.3])
    assert_allclose(value.interval[1], [1.0, 0.3])


def test_split_ball_reference_outside_the_disk():
    with pytest.raises(RangeError):
        split_ball_reference([1.0, 0.0])


#### FRAMES ############################################################################################################
def test_frames_start_in_the_cells_and_end_on_the_sites(diamond_dual):
    frames = displacement_frames(diamond_dual, [0.0, 0.5, 1.0])
    assert_allclose(frames.frame(0.0), frames.points)
    assert_allclose(frames.frame(1.0), diamond_dual.sites[frames.cells])
    assert np.mean(diamond_dual.assign(frames.points) == frames.cells) >= 0.99
    assert len(frames.frames()) == 3


@pytest.mark.parametrize('t', [-0.1, 1.5])
def test_times_outside_the_unit_interval(t, diamond_dual):
    with pytest.raises(ConfigError):
        check_time(t)
    with pytest.raises(ConfigError):
        displacement_frames(diamond_dual, [0.0, t])


#### SINGULAR ##########################################################################################################
def test_split_ball_graph_sits_on_the_axis(split_dual):
    graph = detect_singular_set(split_dual, threshold=1.5)
    assert not graph.empty
    assert np.all(graph.density >= 2.0)
    assert hausdorff_to_segments(graph, AXIS) <= 2.0 * split_dual.cell_size
    assert graph.polylines()


def test_high_threshold_gives_an_empty_graph(split_dual):
    graph = detect_singular_set(split_dual, threshold=10.0)
    assert graph.empty
    assert graph.total_length == 0.0
    assert graph.polylines() == []
    assert hausdorff_to_segments(graph, AXIS) == 0.0


def test_refinement_levels_must_share_the_source(split_dual, diamond_dual):
    with pytest.raises(ConfigError):
        detect_singular_set(split_dual, diamond_dual)


def test_distance_to_segments():
    points = np.array([[0.0, 1.0], [2.0, 0.0], [0.5, 0.0]])
    assert_allclose(distance_to_segments(points, [[[-1.0, 0.0], [1.0, 0.0]]]), [1.0, 1.0, 0.0])


#### IO ################################################################################################################
def test_dual_csv_rebuilds_the_diagram(tmp_path, diamond_dual):
    path = dump_dual(diamond_dual, tmp_path / 'dual.csv')
    assert path.read_text().splitlines()[0] == 'x,y,psi,mass,area'
    loaded = load_dual(path, diamond_dual.source)
    assert_allclose(loaded.weights, diamond_dual.weights, atol=1e-11)
    assert loaded.converged


def test_dual_csv_needs_the_weight_column(tmp_path, diamond_dual):
    path = tmp_path / 'broken.csv'
    path.write_text('x,y,mass\n0,0,1\n')
    with pytest.raises(ConfigError):
        load_dual(path, diamond_dual.source)


def test_dual_reruns_are_byte_identical(tmp_path):
    first = dump_dual(solve_shape('framed_diamond', 30), tmp_path / 'first.csv')
    second = dump_dual(solve_shape('framed_diamond', 30), tmp_path / 'second.csv')
    assert first.read_bytes() == second.read_bytes()


def test_graph_and_frame_files(tmp_path, split_dual):
    graph = detect_singular_set(split_dual, threshold=1.5)
    rows = dump_singular_graph(graph, tmp_path / 'singular.csv').read_text().splitlines()
    assert rows[0] == 'x1,y1,x2,y2,f'
    assert len(rows) == graph.size + 1
    paths = dump_frames(displacement_frames(split_dual, [0.0, 0.5]), tmp_path)
    assert [p.name for p in paths] == ['t_0.csv', 't_0.5.csv']


#### ACCEPTANCE ########################################################################################################
@pytest.mark.slow
def test_split_ball_map_converges():
    dual = solve_shape('split_ball', 1000)
    cell = dual.cell_size
    assert map_error(dual) <= (2.0 * cell) ** 2
    graph = detect_singular_set(dual, threshold=0.3)
    assert hausdorff_to_segments(graph, AXIS) <= 2.0 * cell
    assert abs(graph.mean_density() - 2.0) / 2.0 <= 0.1


@pytest.mark.slow
def test_singular_edges_persist_under_refinement():
    coarse = solve_shape('split_ball', 250)
    fine = solve_shape('split_ball', 1000)
    graph = detect_singular_set(coarse, fine, threshold=1.5)
    assert not graph.empty
    assert graph.persistent.all()


@pytest.mark.slow
def test_framed_diamond_graph_is_the_cross():
    dual = solve_shape('framed_diamond', 1000)
    graph = detect_singular_set(dual)
    assert not graph.empty
    assert hausdorff_to_segments(graph, AXES) <= 3.0 * dual.cell_size
    assert graph_symmetry_defect(graph, DIHEDRAL) <= dual.cell_size


@pytest.mark.slow
@pytest.mark.parametrize('name', ['pacman', 'cats_eye'])
def test_nonconvex_targets_leave_a_vertical_segment(name):
    dual = solve_shape(name, 1000)
    graph = detect_singular_set(dual)
    assert not graph.empty
    assert hausdorff_to_segments(graph, AXIS) <= 3.0 * dual.cell_size
    if name == 'cats_eye':
        assert np.abs(graph.points()[:, 1]).max() <= 0.9
