from pathlib import Path
from typing import Union

from ..core.io import AXES, write_rows
from .density import SingularDensityProfile
from .lifting import DiscreteSolution


def dump_solution(sol: DiscreteSolution, path: Union[str, Path]) -> Path:
    """One row per node: `x,y[,z],u,atom,mu,tag,contact`."""
    problem = sol.problem
    cloud = problem.cloud
    header = list(AXES[:cloud.dim]) + ['u', 'atom', 'mu', 'tag', 'contact']
    rows = (list(x) + [u, a, m, str(t), bool(c)] for x, u, a, m, t, c in
            zip(cloud.nodes, sol.values, sol.atoms.atoms, problem.mu, cloud.tags, sol.contact))
    return write_rows(path, header, rows)


def dump_profile(profile: SingularDensityProfile, path: Union[str, Path]) -> Path:
    """One row per support sample: `s1[,s2],excess,cell,f`."""
    header = [f's{i + 1}' for i in range(profile.coords.shape[1])] + ['excess', 'cell', 'f']
    rows = (list(s) + [e, c, f] for s, e, c, f in
            zip(profile.coords, profile.excess, profile.cells, profile.density))
    return write_rows(path, header, rows)
