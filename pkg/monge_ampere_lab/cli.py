"""Command line front end: one run per invocation, artifacts and report.json in the output directory."""

import argparse
import json
import logging
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .barriers.admissibility import admissibility_check
from .barriers.interaction import barrier_constant_search, hessian_det_check, sample_grid
from .barriers.radial import growth_check, w_profile
from .const import (CAFFARELLI_LINE_DENSITY, DOMAIN, DUAL_FILE, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_VERIFICATION_FAILED,
                    LINE_DENSITY_TOLERANCE, PROFILE_FILE, REPORT_FILE, SINGULAR_FILE, SOLUTION_FILE)
from .core.cloud import PointCloud, Region
from .core.envelope import lower_convex_envelope
from .core.io import read_rows
from .core.measure import ma_atoms, ma_measure, subgradient_oracle
from .dto.config_dtos import (BarrierConfigDto, MeasureConfigDto, OtConfigDto, RenderConfigDto, RunConfigDto,
                              SolveConfigDto)
from .dto.report_dtos import CheckRecord, RunReport
from .entities.config_loader import ConfigLoader
from .enums.lab_enums import BarrierVariant, Command, ObstacleProfile, ScenarioKind, ShapeName, SweepMode
from .errors import ConfigError, LabError
from .render import frame_bounds, render_cells, render_frame, render_profile, render_singular_graph
from .solver.density import extract_singular_density
from .solver.io import dump_profile, dump_solution
from .solver.lifting import solve
from .solver.problem import ScenarioSpec, build_problem
from .solver.studies import radius_study, refinement_study
from .solver.verify import verify
from .transport.dual import DualSolution, solve_dual
from .transport.frames import displacement_frames
from .transport.io import dump_dual, dump_frames, dump_singular_graph, frame_name, load_dual
from .transport.power_diagram import TILING_TOLERANCE
from .transport.reference import map_error, potential_error
from .transport.shapes import ShapeSpec, sample_shape
from .transport.singular import SingularGraph, detect_singular_set, graph_symmetry_defect, hausdorff_to_segments

_LOGGER = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class Run:
    """Collects checks, results and artifacts of one command."""

    def __init__(self, config: RunConfigDto):
        self.config = config
        self.output = Path(config.output)
        self.report = RunReport(config.command.value, config.to_dict(encode_json=True), versions())

    def check(self, record: CheckRecord) -> None:
        self.report.checks.append(record)

    def result(self, key: str, value) -> None:
        self.report.results[key] = _plain(value)

    def artifact(self, path: Path) -> Path:
        self.report.artifacts.append(path.relative_to(self.output).as_posix())
        return path

    def path(self, name: str) -> Path:
        return self.output / name


def versions() -> Dict[str, str]:
    found = {DOMAIN: __version__}
    for package in ('numpy', 'scipy', 'shapely', 'lxml'):
        try:
            found[package] = version(package)
        except PackageNotFoundError:
            found[package] = 'unknown'
    return found


def _plain(value):
    """JSON friendly copy of numpy scalars, arrays and nested containers."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


#### SOLVE #############################################################################################################
def run_solve(run: Run, cfg: SolveConfigDto) -> None:
    spec = ScenarioSpec(**cfg.scenario_fields())
    mode = SweepMode(cfg.mode)
    sol = solve(build_problem(spec), cfg.tol, cfg.max_sweeps, mode, run.config.log_iterations)
    verification = verify(sol, spec, cfg.heights, cfg.residual_tol)
    for record in verification.checks:
        run.check(record)

    profile = extract_singular_density(sol, spec)
    relation = '>=' if cfg.f_min > 0.0 else '>'
    run.check(CheckRecord.compare(f'f on inner support {relation} {cfg.f_min:g}', profile.inner_min, cfg.f_min,
                                  relation))
    if spec.kind == ScenarioKind.CROSS:
        run.check(CheckRecord.compare('junction excess > 0', profile.junction_excess or 0.0, 0.0, '>'))

    run.result('nodes', sol.problem.cloud.size)
    run.result('sweeps', sol.sweeps)
    run.result('contact_nodes', int(sol.contact.sum()))
    run.result('profile', profile.summary())
    run.result('section_heights', verification.section_heights)
    run.result('section_ratios', verification.section_ratios)
    run.result('flat_pieces', verification.flat_pieces)

    if cfg.refine:
        study = refinement_study(spec, cfg.refine, cfg.tol, cfg.max_sweeps, mode)
        run.result('refinement', {'h_min': study.spacings, 'f_min_inner': study.inner_min,
                                  'relative_change': study.relative_change})
        run.check(CheckRecord.compare('f refinement change', study.relative_change, 0.25))
    if cfg.radii:
        radii = radius_study(spec, cfg.radii, cfg.tol, cfg.max_sweeps, mode)
        run.result('radius_study', {'radii': radii.radii, 'max_difference': radii.max_difference})
        run.check(CheckRecord.compare('radius stability on B_1', radii.max_difference, radii.threshold))

    run.artifact(dump_solution(sol, run.path(SOLUTION_FILE)))
    run.artifact(dump_profile(profile, run.path(PROFILE_FILE)))
    if run.config.svg:
        run.artifact(render_profile(profile.coords[:, 0], profile.density, run.path('profile.svg')))


#### OT ################################################################################################################
def build_shape(cfg: OtConfigDto) -> ShapeSpec:
    return ShapeSpec(name=ShapeName.parse(cfg.example), **cfg.shape.to_dict())


def shape_checks(run: Run, shape: ShapeSpec, dual: DualSolution, graph: SingularGraph) -> None:
    """Geometry of the singular set for the examples whose answer is known."""
    cell = dual.cell_size
    run.result('cell_size', cell)
    run.result('singular_edges', graph.size)
    run.result('singular_length', graph.total_length)
    run.result('mean_density', graph.mean_density())
    if graph.empty:
        return
    reflections = [np.diag([-1.0, 1.0]), np.diag([1.0, -1.0])]
    ends = graph.segments.reshape(-1, 2)

    if shape.name == ShapeName.SPLIT_BALL and shape.parts == 2:
        error = map_error(dual)
        run.result('map_mse', error)
        run.result('potential_error', potential_error(dual))
        run.check(CheckRecord.compare('map mean squared error', error, (2.0 * cell) ** 2))
        run.check(CheckRecord.compare('singular set distance to x = 0',
                                      hausdorff_to_segments(graph, [[[0.0, -1.0], [0.0, 1.0]]]), 2.0 * cell))
        run.check(CheckRecord.compare('|f - 2| / 2', abs(graph.mean_density() - 2.0) / 2.0, 0.1))
    elif shape.name == ShapeName.FRAMED_DIAMOND:
        axes = [[[-1.0, 0.0], [1.0, 0.0]], [[0.0, -1.0], [0.0, 1.0]]]
        run.check(CheckRecord.compare('singular set distance to the axes', hausdorff_to_segments(graph, axes),
                                      3.0 * cell))
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        run.check(CheckRecord.compare('singular set dihedral symmetry',
                                      graph_symmetry_defect(graph, reflections + [swap]), cell))
    elif shape.name in (ShapeName.PACMAN, ShapeName.CATS_EYE):
        run.check(CheckRecord.compare('singular set distance to the y axis',
                                      hausdorff_to_segments(graph, [[[0.0, -1.0], [0.0, 1.0]]]), 3.0 * cell))
        run.result('singular_y_range', [float(ends[:, 1].min()), float(ends[:, 1].max())])
        if shape.name == ShapeName.CATS_EYE:
            run.check(CheckRecord.compare('singular set max |y|', float(np.abs(ends[:, 1]).max()), 0.9))
    elif shape.name == ShapeName.SQUARE_FRAME:
        lam = shape.lam
        diagonals = [[[-lam, -lam], [lam, lam]], [[-lam, lam], [lam, -lam]]]
        run.result('diagonal_distance', hausdorff_to_segments(graph, diagonals))


def dual_checks(run: Run, dual: DualSolution, label: str = '') -> None:
    run.check(CheckRecord.compare(f'max relative area error{label}', dual.max_error, dual.tol))
    run.check(CheckRecord.compare(f'tiling defect{label}', dual.diagram.tiling_defect, TILING_TOLERANCE))
    residuals = [h.residual for h in dual.history]
    increases = sum(1 for a, b in zip(residuals, residuals[1:]) if b >= a)
    run.check(CheckRecord.compare(f'residual increases{label}', increases, 0))


def write_transport(run: Run, shape: ShapeSpec, dual: DualSolution, times: List[float],
                    per_cell: int, graph: Optional[SingularGraph] = None) -> None:
    frames = displacement_frames(dual, times, per_cell)
    for path in dump_frames(frames, run.output):
        run.artifact(path)
    if not run.config.svg:
        return
    bounds = frame_bounds([frames.points, frames.targets])
    for t in frames.times:
        name = frame_name(t).replace('.csv', '.svg')
        run.artifact(render_frame(frames.frame(t), frames.cells, run.path(f'frames/{name}'), bounds,
                                  f'{shape.name.value} t = {t:g}'))
    segments = graph.segments if graph is not None else None
    run.artifact(render_cells(dual.diagram.cells, dual.sites, run.path('cells.svg'), segments))


def run_ot(run: Run, cfg: OtConfigDto) -> None:
    shape = build_shape(cfg)
    pair = shape.build()
    source = pair.source_vertices()
    log = run.config.log_iterations

    dual = solve_dual(source, sample_shape(shape, cfg.sites, pair), cfg.tol, cfg.max_steps, log)
    dual_checks(run, dual)
    run.result('newton_steps', len(dual.history))
    run.result('newton_methods', [h.method for h in dual.history])
    fine = None
    if cfg.refine:
        fine = solve_dual(source, sample_shape(shape, 4 * cfg.sites, pair), cfg.tol, cfg.max_steps, log)
        dual_checks(run, fine, ' (4N)')
    graph = detect_singular_set(dual, fine, cfg.threshold)
    shape_checks(run, shape, dual, graph)

    run.artifact(dump_dual(dual, run.path(DUAL_FILE)))
    run.artifact(dump_singular_graph(graph, run.path(SINGULAR_FILE)))
    write_transport(run, shape, dual, cfg.frames, cfg.points_per_cell, graph)
    if run.config.svg:
        run.artifact(render_singular_graph(graph.segments, run.path('singular.svg')))


def run_interp(run: Run, cfg: OtConfigDto) -> None:
    if not cfg.dual:
        raise ConfigError('interp needs a stored dual, set ot.dual or pass --dual')
    shape = build_shape(cfg)
    pair = shape.build()
    dual = load_dual(cfg.dual, pair.source_vertices(), cfg.tol)
    dual_checks(run, dual)
    write_transport(run, shape, dual, cfg.frames, cfg.points_per_cell)


#### BARRIER ###########################################################################################################
def run_barrier(run: Run, cfg: BarrierConfigDto) -> None:
    if cfg.admissibility:
        report = admissibility_check(cfg.n, cfg.k, cfg.epsilon, cfg.rho, cfg.alpha, BarrierVariant(cfg.variant),
                                     directions=cfg.directions, weights=cfg.weights,
                                     profile=ObstacleProfile(cfg.profile))
        for record in report.records:
            run.check(record)
        run.result('implied_bound', report.implied_bound)
        run.result('admissibility', report.as_text().splitlines())

    if cfg.n >= 2 and cfg.growth_radii:
        growth = growth_check(cfg.n, cfg.growth_radii)
        run.result('growth', {'coefficients': growth.coefficients, 'max_fit_residual': growth.max_fit_residual,
                              'constant': growth.constant})
        run.result('w_at_radii', w_profile(cfg.n, np.asarray(growth.radii)))

    if cfg.constant_search:
        samples = sample_grid(cfg.samples_per_axis, cfg.slab)
        constant = barrier_constant_search(samples)
        at = hessian_det_check(constant, samples)
        quarter = hessian_det_check(constant / 4.0, samples)
        run.result('constant', constant)
        run.result('max_cross_coupling', at.max_cross_coupling)
        run.check(CheckRecord.compare('min det at C*', at.min_det, 1.0, '>='))
        run.check(CheckRecord.compare('min det at C*/4', quarter.min_det, 1.0, '<'))


#### MEASURE ###########################################################################################################
def sample_function(name: str, nodes: np.ndarray) -> np.ndarray:
    radius = np.linalg.norm(nodes, axis=1)
    if name == 'w':
        return w_profile(nodes.shape[1], radius)
    if name == 'caffarelli':
        return radius ** 2 / 2.0 + np.abs(nodes[:, 0])
    if name == 'quadratic':
        return radius ** 2 / 2.0
    return radius


def run_measure(run: Run, cfg: MeasureConfigDto) -> None:
    spec = cfg.region
    if spec.kind == 'ball':
        region = Region.ball(spec.center or [0.0, 0.0], spec.radius if spec.radius is not None else 1.0)
    else:
        if spec.lo is None or spec.hi is None:
            raise ConfigError('Rectangle regions need lo and hi')
        region = Region.rectangle(spec.lo, spec.hi)

    r = cfg.extent
    cloud = PointCloud.grid([-r, -r], [r, r], cfg.spacing)
    fn = lower_convex_envelope(cloud, sample_function(cfg.function, cloud.nodes))
    table = ma_atoms(fn)
    measure = ma_measure(fn, region, table)
    run.result('measure', measure)
    run.result('nodes', cloud.size)
    if cfg.oracle_resolution:
        run.result('oracle', subgradient_oracle(fn, region, cfg.oracle_resolution))
    if cfg.expected is not None:
        error = abs(measure - cfg.expected) / abs(cfg.expected)
        run.result('relative_error', error)
        run.check(CheckRecord.compare('relative measure error', error, cfg.rel_tol))
    if cfg.function == 'caffarelli':
        density = axis_line_density(fn, table.atoms, region, cfg.spacing)
        run.result('line_density', density)
        error = abs(density - CAFFARELLI_LINE_DENSITY) / CAFFARELLI_LINE_DENSITY
        run.check(CheckRecord.compare('line density error', error, LINE_DENSITY_TOLERANCE))


def axis_line_density(fn, atoms: np.ndarray, region: Region, spacing: float) -> float:
    """Excess mass per unit length of the nodes on {x = 0} inside the region."""
    nodes = fn.cloud.nodes
    on_axis = (np.abs(nodes[:, 0]) < 1e-9 * spacing) & region.contains(nodes) & fn.cloud.interior_mask
    if not on_axis.any():
        return float('nan')
    excess = atoms[on_axis] - spacing ** 2
    return float(excess.sum() / (on_axis.sum() * spacing))


#### RENDER ############################################################################################################
def run_render(run: Run, cfg: RenderConfigDto) -> None:
    if not cfg.input:
        raise ConfigError('render needs an input, set render.input or pass --input')
    source = Path(cfg.input)
    if cfg.kind == 'frames':
        files = sorted(source.glob('t_*.csv'))
        if not files:
            raise ConfigError(f'No frame files in {source}')
        frames = []
        for file in files:
            rows = read_rows(file)
            frames.append((file, np.array([[float(r['x']), float(r['y'])] for r in rows]).reshape(-1, 2),
                           np.array([int(r['cell']) for r in rows], dtype=int)))
        bounds = frame_bounds([points for _, points, _ in frames])
        for file, points, cells in frames:
            run.artifact(render_frame(points, cells, run.path(f'frames/{file.stem}.svg'), bounds, file.stem))
    elif cfg.kind == 'singular':
        rows = read_rows(source)
        segments = np.array([[float(r[k]) for k in ('x1', 'y1', 'x2', 'y2')] for r in rows]).reshape(-1, 2, 2)
        run.artifact(render_singular_graph(segments, run.path('singular.svg')))
    elif cfg.kind == 'profile':
        rows = read_rows(source)
        run.artifact(render_profile(np.array([float(r['s1']) for r in rows]), np.array([float(r['f']) for r in rows]),
                                    run.path('profile.svg')))
    else:
        pair = build_shape(run.config.ot).build()
        dual = load_dual(source, pair.source_vertices(), run.config.ot.tol)
        run.artifact(render_cells(dual.diagram.cells, dual.sites, run.path('cells.svg')))


RUNNERS = {
    Command.SOLVE: run_solve,
    Command.OT: run_ot,
    Command.INTERP: run_interp,
    Command.BARRIER: run_barrier,
    Command.MEASURE: run_measure,
    Command.RENDER: run_render,
}


def run(config: RunConfigDto) -> RunReport:
    """Executes the command and writes report.json; the timing block is the only nondeterministic part."""
    current = Run(config)
    current.output.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    RUNNERS[config.command](current, config.section())
    current.report.timing = {'seconds': time.perf_counter() - started}
    current.report.artifacts.sort()

    data = current.report.payload()
    data['timing'] = current.report.timing
    report_path = current.path(REPORT_FILE)
    report_path.write_text(json.dumps(data, sort_keys=True, indent=2) + '\n', encoding='utf-8')
    status = 'passed' if current.report.passed else 'FAILED'
    _LOGGER.info(f'{config.command.value} {status}, report at {report_path}')
    return current.report


#### ARGUMENTS #########################################################################################################
def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='YAML run config layered over the defaults')
    parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY.PATH=VALUE',
                        help='override one config value, may be repeated')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--log-level', default='WARNING', help='logging level (default WARNING)')
    parser.add_argument('--log-iterations', action='store_true', help='debug log every sweep or Newton step')
    parser.add_argument('--no-svg', action='store_true', help='skip the SVG figures')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=DOMAIN, description='Monge-Ampere obstacle and transport experiments')
    commands = parser.add_subparsers(dest='command', required=True)
    services = ConfigLoader().load_services()

    def add(command: Command) -> argparse.ArgumentParser:
        service = services[command.value]
        return commands.add_parser(command.value, help=service['name'], description=service['description'])

    solve_parser = add(Command.SOLVE)
    solve_parser.add_argument('--scenario', choices=[s.value for s in ScenarioKind])
    solve_parser.add_argument('--n', type=int)
    solve_parser.add_argument('--k', type=int)
    solve_parser.add_argument('--eps', type=float)
    solve_parser.add_argument('--alpha', type=float)
    solve_parser.add_argument('--h0', type=float)
    solve_parser.add_argument('--h-min', type=float)
    solve_parser.add_argument('--mode', choices=[m.value for m in SweepMode])
    solve_parser.add_argument('--refine', help='comma separated h_min ladder for the refinement study')

    for command in (Command.OT, Command.INTERP):
        ot_parser = add(command)
        ot_parser.add_argument('--example')
        ot_parser.add_argument('--frames', help='comma separated times in [0, 1]')
        if command == Command.OT:
            ot_parser.add_argument('--sites', type=int)
            ot_parser.add_argument('--threshold', type=float)
            ot_parser.add_argument('--no-refine', action='store_true', help='skip the 4N persistence level')
        else:
            ot_parser.add_argument('--dual', help='dual.csv written by an ot run')

    barrier_parser = add(Command.BARRIER)
    barrier_parser.add_argument('--admissibility', action='store_true')
    barrier_parser.add_argument('--variant', choices=[v.value for v in BarrierVariant])
    barrier_parser.add_argument('--eps', type=float)
    barrier_parser.add_argument('--rho', type=float)
    barrier_parser.add_argument('--alpha', type=float)
    barrier_parser.add_argument('--n', type=int)
    barrier_parser.add_argument('--k', type=int)
    barrier_parser.add_argument('--constant-search', action='store_true')

    measure_parser = add(Command.MEASURE)
    measure_parser.add_argument('--function', choices=['w', 'caffarelli', 'quadratic', 'cone'])
    measure_parser.add_argument('--spacing', type=float)
    measure_parser.add_argument('--extent', type=float)
    measure_parser.add_argument('--oracle-resolution', type=float)
    measure_parser.add_argument('--expected', type=float)

    render_parser = add(Command.RENDER)
    render_parser.add_argument('--kind', choices=['frames', 'singular', 'profile', 'cells'])
    render_parser.add_argument('--input')

    for sub in commands.choices.values():
        _common(sub)
    return parser


FLAG_KEYS = {
    Command.SOLVE: {'scenario': 'scenario', 'n': 'n', 'k': 'k', 'eps': 'epsilon', 'alpha': 'alpha', 'h0': 'h0',
                    'h_min': 'h_min', 'mode': 'mode'},
    Command.OT: {'example': 'example', 'sites': 'sites', 'threshold': 'threshold'},
    Command.INTERP: {'example': 'example', 'dual': 'dual'},
    Command.BARRIER: {'variant': 'variant', 'eps': 'epsilon', 'rho': 'rho', 'alpha': 'alpha', 'n': 'n', 'k': 'k'},
    Command.MEASURE: {'function': 'function', 'spacing': 'spacing', 'extent': 'extent',
                      'oracle_resolution': 'oracle_resolution', 'expected': 'expected'},
    Command.RENDER: {'kind': 'kind', 'input': 'input'},
}


def _float_list(text: str) -> str:
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError as e:
        raise ConfigError(f'Expected comma separated numbers, got {text!r}') from e
    return '[' + ', '.join(repr(v) for v in values) + ']'


def overrides_from_args(args: argparse.Namespace) -> List[str]:
    """Translates the command flags into key.path=value overrides."""
    command = Command(args.command)
    section = 'ot' if command == Command.INTERP else command.value
    items = [f'command={command.value}']
    if args.out:
        items.append(f'output={args.out}')
    if args.log_iterations:
        items.append('log_iterations=true')
    if args.no_svg:
        items.append('svg=false')
    for flag, key in FLAG_KEYS[command].items():
        value = getattr(args, flag, None)
        if value is not None:
            items.append(f'{section}.{key}={value}')
    if getattr(args, 'frames', None):
        items.append(f'ot.frames={_float_list(args.frames)}')
    if getattr(args, 'refine', None):
        items.append(f'solve.refine={_float_list(args.refine)}')
    if getattr(args, 'no_refine', False):
        items.append('ot.refine=false')
    if getattr(args, 'admissibility', False):
        items.append('barrier.admissibility=true')
    if getattr(args, 'constant_search', False):
        items.append('barrier.constant_search=true')
    return items + list(args.overrides)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT)
    try:
        config = ConfigLoader().load_run_config(args.config, overrides_from_args(args))
        report = run(config)
    except ConfigError as e:
        _LOGGER.error(f'Config error: {e}')
        return EXIT_CONFIG_ERROR
    except LabError as e:
        _LOGGER.error(f'{type(e).__name__}: {e}')
        return EXIT_VERIFICATION_FAILED
    if not report.passed:
        failed = [c.name for c in report.checks if not c.passed]
        _LOGGER.warning(f'Failed checks: {failed}')
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK
