import numpy as np
from lxml import etree

from monge_ampere_lab.render import (SVG_NAMESPACE, frame_bounds, hue, render_cells, render_frame, render_profile,
                                     render_singular_graph)

NS = {'svg': SVG_NAMESPACE}
SQUARE = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def test_cell_figure_is_deterministic(tmp_path):
    cells = [SQUARE * 0.5, SQUARE * 0.5 + 1.0]
    sites = np.array([[0.0, 0.0], [1.0, 1.0]])
    first = render_cells(cells, sites, tmp_path / 'a.svg', segments=np.array([[[0.0, -1.0], [0.0, 1.0]]]))
    second = render_cells(cells, sites, tmp_path / 'b.svg', segments=np.array([[[0.0, -1.0], [0.0, 1.0]]]))
    assert first.read_bytes() == second.read_bytes()

    root = etree.parse(str(first)).getroot()
    polygons = root.findall('.//svg:g[@id="cells"]/svg:polygon', NS)
    assert [p.get('fill') for p in polygons] == [hue(0), hue(1)]
    assert len(root.findall('.//svg:g[@id="singular"]/svg:line', NS)) == 1


def test_empty_singular_graph_still_renders(tmp_path):
    root = etree.parse(str(render_singular_graph(np.empty((0, 2, 2)), tmp_path / 'g.svg'))).getroot()
    assert root.get('viewBox') == '0 0 600 600'
    assert root.findall('.//svg:g[@id="singular"]/svg:line', NS) == []
    assert len(root.findall('.//svg:g[@id="axes"]/svg:line', NS)) == 2


def test_frames_share_bounds(tmp_path):
    start = np.array([[0.0, 0.0], [0.5, 0.5]])
    end = np.array([[2.0, 0.0], [2.5, 0.5]])
    bounds = frame_bounds([start, end])
    assert bounds[0] < 0.0 and bounds[2] > 2.5
    path = render_frame(start, np.array([0, 1]), tmp_path / 't_0.svg', bounds, 't_0')
    root = etree.parse(str(path)).getroot()
    assert len(root.findall('.//svg:g[@id="points"]/svg:circle', NS)) == 2
    assert root.find('.//svg:text', NS).text == 't_0'


def test_profile_draws_the_reference_level(tmp_path):
    path = render_profile(np.array([0.1, -0.1, 0.0]), np.array([0.6, 0.55, 0.7]), tmp_path / 'p.svg')
    root = etree.parse(str(path)).getroot()
    assert root.find('.//svg:g[@id="reference"]/svg:polyline', NS).get('stroke-dasharray') == '4 3'
    assert root.find('.//svg:g[@id="profile"]/svg:polyline', NS) is not None


def test_hues_are_stable():
    assert hue(3) == hue(3)
    assert len({hue(i) for i in range(20)}) == 20
