import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from ..const import FRAMES_DIR
from ..core.io import format_number, read_rows, write_rows
from ..errors import ConfigError
from .dual import DualSolution
from .frames import InterpolationFrames
from .power_diagram import power_diagram
from .shapes import SampleSet
from .singular import SingularGraph

_LOGGER = logging.getLogger(__name__)


def dump_singular_graph(graph: SingularGraph, path: Union[str, Path]) -> Path:
    rows = (list(s.ravel()) + [f] for s, f in zip(graph.segments, graph.density))
    return write_rows(path, ['x1', 'y1', 'x2', 'y2', 'f'], rows)


def frame_name(t: float) -> str:
    return f't_{format_number(float(t))}.csv'


def dump_frames(frames: InterpolationFrames, directory: Union[str, Path]) -> List[Path]:
    """One `x,y,cell` file per time under <directory>/frames."""
    target = Path(directory) / FRAMES_DIR
    paths = []
    for t in frames.times:
        rows = (list(p) + [int(c)] for p, c in zip(frames.frame(t), frames.cells))
        paths.append(write_rows(target / frame_name(t), ['x', 'y', 'cell'], rows))
    return paths


def dump_dual(dual: DualSolution, path: Union[str, Path]) -> Path:
    rows = (list(p) + [w, m, a] for p, w, m, a in zip(dual.sites, dual.weights, dual.masses, dual.areas))
    return write_rows(path, ['x', 'y', 'psi', 'mass', 'area'], rows)


def load_dual(path: Union[str, Path], source: np.ndarray, tol: float = 1e-7) -> DualSolution:
    """Rebuilds the power diagram of a stored dual over the given source polygon."""
    rows = read_rows(path)
    if not rows or not {'x', 'y', 'psi', 'mass'} <= set(rows[0]):
        raise ConfigError(f'{path} needs columns x,y,psi,mass')
    sites = np.array([[float(r['x']), float(r['y'])] for r in rows])
    weights = np.array([float(r['psi']) for r in rows])
    masses = np.array([float(r['mass']) for r in rows])
    dual = DualSolution(SampleSet(sites, masses), weights, power_diagram(sites, weights, source), [], tol)
    if not dual.converged:
        _LOGGER.warning(f'Stored dual {path} misses its masses by {dual.max_error:.3e} (relative)')
    return dual
