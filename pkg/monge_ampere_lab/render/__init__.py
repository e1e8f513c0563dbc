from .svg import (SVG_NAMESPACE, frame_bounds, hue, render_cells, render_frame, render_profile,
                  render_singular_graph)

__all__ = [
    'SVG_NAMESPACE', 'frame_bounds', 'hue', 'render_cells', 'render_frame', 'render_profile', 'render_singular_graph',
]
