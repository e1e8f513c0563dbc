from enum import Enum


class NodeTag(Enum):
    INTERIOR = 'interior'
    BOUNDARY = 'boundary'
    OBSTACLE = 'obstacle'


class RegionKind(Enum):
    RECTANGLE = 'rectangle'
    BALL = 'ball'
    TUBE = 'tube'
    NODES = 'nodes'


class BarrierVariant(Enum):
    LOWER_D = 'lower_D'
    PHI_LINE = 'phi_line'
    PHI_POLYTOPE = 'phi_polytope'
    PHI_CROSS = 'phi_cross'
    CAFFARELLI = 'caffarelli'
    INTERACTION_4D = 'interaction4d'


class ObstacleProfile(Enum):
    TAIL = 'tail'
    QUADRATIC = 'quadratic'


class ScenarioKind(Enum):
    SEGMENT = 'segment'
    POLYTOPE_SKELETON = 'polytope_skeleton'
    CROSS = 'cross'
    SMOOTH_BOUNDARY = 'smooth_boundary'


class SweepMode(Enum):
    GAUSS_SEIDEL = 'gauss_seidel'
    JACOBI = 'jacobi'


class ShapeName(Enum):
    SPLIT_BALL = 'split_ball'
    FRAMED_DIAMOND = 'framed_diamond'
    SQUARE_FRAME = 'square_frame'
    PACMAN = 'pacman'
    CATS_EYE = 'cats_eye'
    FRAMED_POLYGON = 'framed_polygon'
    CUSTOM = 'custom'

    @staticmethod
    def parse(name: str) -> 'ShapeName':
        return ShapeName(name.lower().replace('-', '_'))


class Command(Enum):
    SOLVE = 'solve'
    OT = 'ot'
    BARRIER = 'barrier'
    MEASURE = 'measure'
    INTERP = 'interp'
    RENDER = 'render'
