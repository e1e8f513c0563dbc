"""Deterministic SVG figures: fixed viewport, fixed hue per cell index, fixed number formatting."""

import colorsys
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from lxml import etree

_LOGGER = logging.getLogger(__name__)

SVG_NAMESPACE = 'http://www.w3.org/2000/svg'
SIZE = 600
MARGIN = 40
GOLDEN = 0.618033988749895
DENSITY_REFERENCE = 0.5

Bounds = Tuple[float, float, float, float]


def svg_tag(name: str) -> str:
    return f'{{{SVG_NAMESPACE}}}{name}'


def fmt(value: float) -> str:
    return f'{value:.3f}'.rstrip('0').rstrip('.')


def hue(index: int) -> str:
    """Color of a cell; depends on the index only."""
    r, g, b = colorsys.hls_to_rgb((index * GOLDEN) % 1.0, 0.6, 0.55)
    return f'#{int(round(255 * r)):02x}{int(round(255 * g)):02x}{int(round(255 * b)):02x}'


class SvgCanvas:
    """Maps a world rectangle onto a fixed square viewport with the y axis pointing up."""

    def __init__(self, bounds: Bounds, size: int = SIZE, margin: int = MARGIN):
        lo_x, lo_y, hi_x, hi_y = bounds
        self.bounds = bounds
        self.size = size
        self.margin = margin
        self.scale = (size - 2 * margin) / max(hi_x - lo_x, hi_y - lo_y, 1e-12)
        self.root = etree.Element(svg_tag('svg'), nsmap={None: SVG_NAMESPACE})
        self.root.set('width', str(size))
        self.root.set('height', str(size))
        self.root.set('viewBox', f'0 0 {size} {size}')
        etree.SubElement(self.root, svg_tag('rect'), {'x': '0', 'y': '0', 'width': str(size), 'height': str(size),
                                                      'fill': 'white'})

    def to_view(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        lo_x, lo_y = self.bounds[0], self.bounds[1]
        x = self.margin + (points[:, 0] - lo_x) * self.scale
        y = self.size - self.margin - (points[:, 1] - lo_y) * self.scale
        return np.column_stack([x, y])

    def group(self, name: str) -> etree._Element:
        return etree.SubElement(self.root, svg_tag('g'), {'id': name})

    def polygon(self, parent, points: np.ndarray, fill: str, stroke: str = 'none', width: float = 0.5):
        view = self.to_view(points)
        attrs = {'points': ' '.join(f'{fmt(x)},{fmt(y)}' for x, y in view), 'fill': fill, 'stroke': stroke,
                 'stroke-width': fmt(width)}
        return etree.SubElement(parent, svg_tag('polygon'), attrs)

    def polyline(self, parent, points: np.ndarray, stroke: str, width: float = 1.0, dash: Optional[str] = None):
        view = self.to_view(points)
        attrs = {'points': ' '.join(f'{fmt(x)},{fmt(y)}' for x, y in view), 'fill': 'none', 'stroke': stroke,
                 'stroke-width': fmt(width)}
        if dash:
            attrs['stroke-dasharray'] = dash
        return etree.SubElement(parent, svg_tag('polyline'), attrs)

    def line(self, parent, start, end, stroke: str, width: float = 1.0):
        a, b = self.to_view(np.array([start, end]))
        return etree.SubElement(parent, svg_tag('line'), {'x1': fmt(a[0]), 'y1': fmt(a[1]), 'x2': fmt(b[0]),
                                                          'y2': fmt(b[1]), 'stroke': stroke,
                                                          'stroke-width': fmt(width)})

    def circle(self, parent, center, radius: float, fill: str):
        c = self.to_view(center)[0]
        return etree.SubElement(parent, svg_tag('circle'), {'cx': fmt(c[0]), 'cy': fmt(c[1]), 'r': fmt(radius),
                                                            'fill': fill})

    def text(self, parent, position, label: str, size: int = 12):
        p = self.to_view(position)[0]
        element = etree.SubElement(parent, svg_tag('text'), {'x': fmt(p[0]), 'y': fmt(p[1]),
                                                             'font-size': str(size), 'font-family': 'sans-serif'})
        element.text = label
        return element

    def axes(self):
        """Coordinate axes through the origin, clipped to the bounds."""
        lo_x, lo_y, hi_x, hi_y = self.bounds
        layer = self.group('axes')
        if lo_y <= 0.0 <= hi_y:
            self.line(layer, (lo_x, 0.0), (hi_x, 0.0), '#999999', 0.75)
        if lo_x <= 0.0 <= hi_x:
            self.line(layer, (0.0, lo_y), (0.0, hi_y), '#999999', 0.75)
        return layer

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(etree.tostring(self.root, pretty_print=True, xml_declaration=True, encoding='UTF-8'))
        _LOGGER.debug(f'Wrote {path}')
        return path


def padded_bounds(*arrays: np.ndarray, pad: float = 0.05) -> Bounds:
    points = np.vstack([np.asarray(a, dtype=float).reshape(-1, 2) for a in arrays if np.size(a)])
    if len(points) == 0:
        return -1.0, -1.0, 1.0, 1.0
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = max(float((hi - lo).max()), 1e-9)
    return lo[0] - pad * span, lo[1] - pad * span, hi[0] + pad * span, hi[1] + pad * span


def render_cells(cells: Sequence[np.ndarray], sites: np.ndarray, path: Union[str, Path],
                 segments: Optional[np.ndarray] = None) -> Path:
    """Power cells filled by site index, sites as dots, singular edges drawn over them."""
    canvas = SvgCanvas(padded_bounds(*[c for c in cells if len(c)], sites))
    layer = canvas.group('cells')
    for i, cell in enumerate(cells):
        if len(cell) >= 3:
            canvas.polygon(layer, cell, hue(i), '#ffffff', 0.3)
    dots = canvas.group('sites')
    for i, site in enumerate(sites):
        canvas.circle(dots, site, 1.2, hue(i))
    if segments is not None:
        _draw_segments(canvas, segments)
    return canvas.write(path)


def _draw_segments(canvas: SvgCanvas, segments: np.ndarray):
    layer = canvas.group('singular')
    for start, end in np.asarray(segments).reshape(-1, 2, 2):
        canvas.line(layer, start, end, '#1f3fbf', 2.0)


def render_frame(points: np.ndarray, cells: np.ndarray, path: Union[str, Path], bounds: Bounds,
                 label: Optional[str] = None) -> Path:
    """One interpolation frame; every frame of a run shares the bounds."""
    canvas = SvgCanvas(bounds)
    layer = canvas.group('points')
    for point, cell in zip(points, cells):
        canvas.circle(layer, point, 1.0, hue(int(cell)))
    if label:
        canvas.text(canvas.group('label'), (bounds[0], bounds[3]), label)
    return canvas.write(path)


def render_singular_graph(segments: np.ndarray, path: Union[str, Path], bounds: Optional[Bounds] = None) -> Path:
    """Singular edges over the coordinate axes; an empty graph still yields a valid figure."""
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    canvas = SvgCanvas(bounds or padded_bounds(segments, np.array([[-1.0, -1.0], [1.0, 1.0]])))
    canvas.axes()
    _draw_segments(canvas, segments)
    return canvas.write(path)


def render_profile(arclength: np.ndarray, density: np.ndarray, path: Union[str, Path],
                   reference: float = DENSITY_REFERENCE) -> Path:
    """f against the first support coordinate, with the dashed reference level."""
    order = np.argsort(arclength, kind='stable')
    s, f = np.asarray(arclength, dtype=float)[order], np.asarray(density, dtype=float)[order]
    top = max(float(f.max()) if len(f) else 0.0, reference) * 1.1
    lo = float(s.min()) if len(s) else -1.0
    hi = float(s.max()) if len(s) else 1.0
    canvas = SvgCanvas((lo, 0.0, hi, top))
    canvas.axes()
    guide = canvas.group('reference')
    canvas.polyline(guide, np.array([[lo, reference], [hi, reference]]), '#bf1f1f', 1.0, '4 3')
    canvas.text(guide, (lo, reference), f'f = {fmt(reference)}', 10)
    if len(s):
        canvas.polyline(canvas.group('profile'), np.column_stack([s, f]), '#1f3fbf', 1.5)
    return canvas.write(path)


def frame_bounds(frames: Iterable[np.ndarray]) -> Bounds:
    return padded_bounds(*frames)
