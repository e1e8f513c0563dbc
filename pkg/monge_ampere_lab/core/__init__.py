from .cloud import PointCloud, Region
from .envelope import PLConvexFunction, check_monotonicity, lower_convex_envelope
from .legendre import conjugate_value, legendre_transform
from .measure import MAAtomTable, ma_atoms, ma_measure, subgradient_oracle
from .sections import FlatPiece, Section, flat_set_probe, section

__all__ = [
    'PointCloud', 'Region', 'PLConvexFunction', 'check_monotonicity', 'lower_convex_envelope',
    'conjugate_value', 'legendre_transform', 'MAAtomTable', 'ma_atoms', 'ma_measure', 'subgradient_oracle',
    'FlatPiece', 'Section', 'flat_set_probe', 'section',
]
