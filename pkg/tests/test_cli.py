import json

import pytest

from monge_ampere_lab.cli import build_parser, main, overrides_from_args
from monge_ampere_lab.const import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_VERIFICATION_FAILED, REPORT_FILE
from monge_ampere_lab.entities.config_loader import ConfigLoader
from monge_ampere_lab.errors import ConfigError


def parse(*argv):
    return build_parser().parse_args(list(argv))


def read_report(directory):
    return json.loads((directory / REPORT_FILE).read_text(encoding='utf-8'))


#### ARGUMENTS #########################################################################################################
def test_solve_flags_become_overrides():
    args = parse('solve', '--scenario', 'cross', '--h-min', '0.02', '--refine', '0.04,0.02', '--no-svg',
                 '--set', 'solve.tol=1e-6')
    items = overrides_from_args(args)
    assert items[0] == 'command=solve'
    assert 'svg=false' in items
    assert 'solve.scenario=cross' in items
    assert 'solve.h_min=0.02' in items
    assert 'solve.refine=[0.04, 0.02]' in items
    assert items[-1] == 'solve.tol=1e-6'

    config = ConfigLoader().load_run_config(None, items)
    assert config.solve.refine == [0.04, 0.02]
    assert config.solve.tol == pytest.approx(1e-6)
    assert not config.svg


def test_interp_flags_land_in_the_ot_section():
    items = overrides_from_args(parse('interp', '--dual', 'out/dual.csv', '--frames', '0,1'))
    assert 'command=interp' in items
    assert 'ot.dual=out/dual.csv' in items
    assert 'ot.frames=[0.0, 1.0]' in items


def test_unreadable_frame_list():
    with pytest.raises(ConfigError):
        overrides_from_args(parse('ot', '--frames', '0,half'))


def test_unknown_choice_exits():
    with pytest.raises(SystemExit):
        parse('solve', '--scenario', 'circle')


#### RUNS ##############################################################################################################
def test_measure_run_writes_a_passing_report(tmp_path):
    code = main(['measure', '--function', 'caffarelli', '--spacing', '0.25', '--extent', '2', '--expected', '3',
                 '--oracle-resolution', '0.05', '--set', 'measure.region.kind=rectangle',
                 '--set', 'measure.region.lo=[-0.5, -0.5]', '--set', 'measure.region.hi=[0.5, 0.5]',
                 '--out', str(tmp_path)])
    assert code == EXIT_OK
    report = read_report(tmp_path)
    assert report['passed']
    assert report['command'] == 'measure'
    assert report['results']['measure'] == pytest.approx(3.0, rel=1e-9)
    assert report['results']['line_density'] == pytest.approx(2.0, rel=1e-9)
    checks = {check['name']: check for check in report['checks']}
    assert checks['line density error']['passed']
    assert report['config']['measure']['function'] == 'caffarelli'
    assert 'seconds' in report['timing']


def test_caffarelli_region_off_the_axis_fails_the_density_check(tmp_path):
    code = main(['measure', '--function', 'caffarelli', '--spacing', '0.25', '--extent', '2',
                 '--set', 'measure.region.kind=rectangle', '--set', 'measure.region.lo=[0.25, -0.5]',
                 '--set', 'measure.region.hi=[0.75, 0.5]', '--out', str(tmp_path)])
    assert code == EXIT_VERIFICATION_FAILED
    report = read_report(tmp_path)
    assert not report['passed']
    assert [c['name'] for c in report['checks'] if not c['passed']] == ['line density error']


def test_rectangle_region_needs_bounds(tmp_path):
    code = main(['measure', '--set', 'measure.region.kind=rectangle', '--out', str(tmp_path)])
    assert code == EXIT_CONFIG_ERROR


def test_barrier_admissibility_run(tmp_path):
    assert main(['barrier', '--admissibility', '--out', str(tmp_path)]) == EXIT_OK
    report = read_report(tmp_path)
    assert report['results']['implied_bound'] == pytest.approx(0.5)
    assert report['results']['growth']['constant'] is None
    assert all(check['passed'] for check in report['checks'])


def test_unknown_key_exits_with_a_config_error(tmp_path):
    assert main(['solve', '--set', 'solve.nope=1', '--out', str(tmp_path)]) == EXIT_CONFIG_ERROR


def test_render_without_input(tmp_path):
    assert main(['render', '--kind', 'singular', '--out', str(tmp_path)]) == EXIT_CONFIG_ERROR


def test_interp_without_a_dual(tmp_path):
    assert main(['interp', '--out', str(tmp_path)]) == EXIT_CONFIG_ERROR


def test_render_singular_from_csv(tmp_path):
    source = tmp_path / 'singular.csv'
    source.write_text('x1,y1,x2,y2,f\n0,-0.5,0,0.5,2\n', encoding='utf-8')
    out = tmp_path / 'render'
    assert main(['render', '--kind', 'singular', '--input', str(source), '--out', str(out)]) == EXIT_OK
    assert (out / 'singular.svg').is_file()
    assert read_report(out)['artifacts'] == ['singular.svg']


@pytest.mark.slow
def test_split_ball_run(tmp_path):
    code = main(['ot', '--example', 'split_ball', '--sites', '500', '--frames', '0,0.5,1', '--out', str(tmp_path)])
    assert code == EXIT_OK
    report = read_report(tmp_path)
    assert 'dual.csv' in report['artifacts']
    assert 'singular.csv' in report['artifacts']
    assert (tmp_path / 'frames' / 't_0.5.csv').is_file()

    interp = tmp_path / 'interp'
    assert main(['interp', '--example', 'split_ball', '--dual', str(tmp_path / 'dual.csv'), '--frames', '0.25',
                 '--out', str(interp)]) == EXIT_OK
    assert (interp / 'frames' / 't_0.25.csv').is_file()
