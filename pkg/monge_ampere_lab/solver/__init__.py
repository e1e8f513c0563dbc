from .density import SingularDensityProfile, extract_singular_density
from .io import dump_profile, dump_solution
from .lifting import DiscreteSolution, solve
from .problem import DiscreteProblem, ScenarioSpec, build_problem
from .studies import radius_study, refinement_study
from .verify import verify

__all__ = [
    'SingularDensityProfile', 'extract_singular_density', 'dump_profile', 'dump_solution', 'DiscreteSolution',
    'solve', 'DiscreteProblem', 'ScenarioSpec', 'build_problem', 'radius_study', 'refinement_study', 'verify',
]
