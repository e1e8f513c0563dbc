from .dual import DualSolution, brenier_potential, solve_dual
from .frames import InterpolationFrames, displacement_frames
from .power_diagram import PowerDiagram, power_diagram
from .reference import map_error, potential_error, split_ball_reference
from .shapes import SampleSet, ShapePair, ShapeSpec, sample_shape
from .singular import SingularGraph, detect_singular_set

__all__ = [
    'DualSolution', 'brenier_potential', 'solve_dual', 'InterpolationFrames', 'displacement_frames',
    'PowerDiagram', 'power_diagram', 'map_error', 'potential_error', 'split_ball_reference', 'SampleSet',
    'ShapePair', 'ShapeSpec', 'sample_shape', 'SingularGraph', 'detect_singular_set',
]
