from .admissibility import admissibility_check
from .barrier import BarrierSpec, eval_barrier
from .interaction import barrier_constant_search, hessian_det_check
from .obstacle import INFINITY, ObstacleSpec, eval_obstacle, obstacle_values
from .radial import eval_w, growth_check, w_profile

__all__ = [
    'admissibility_check', 'BarrierSpec', 'eval_barrier', 'barrier_constant_search', 'hessian_det_check',
    'INFINITY', 'ObstacleSpec', 'eval_obstacle', 'obstacle_values', 'eval_w', 'growth_check', 'w_profile',
]
