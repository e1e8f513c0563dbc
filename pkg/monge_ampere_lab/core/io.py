import csv
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from ..const import CSV_FORMAT
from ..errors import ConfigError
from .cloud import PointCloud
from .envelope import PLConvexFunction, lower_convex_envelope

_LOGGER = logging.getLogger(__name__)

AXES = ('x', 'y', 'z')


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return '1' if value else '0'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return CSV_FORMAT % float(value)


def write_rows(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    _LOGGER.debug(f'Wrote {path}')
    return path


def read_rows(path: Union[str, Path]) -> List[dict]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f'Input file {path} does not exist')
    with path.open(newline='', encoding='utf-8') as handle:
        return list(csv.DictReader(handle))


def dump_pl_function(fn: PLConvexFunction, path: Union[str, Path]) -> Path:
    header = list(AXES[:fn.dim]) + ['u', 'active']
    rows = (list(x) + [u, bool(a)] for x, u, a in zip(fn.cloud.nodes, fn.values, fn.active))
    return write_rows(path, header, rows)


def load_pl_function(path: Union[str, Path]) -> PLConvexFunction:
    """Reads `x,y[,z],u,active`; facets are recomputed, so the active column is informational."""
    rows = read_rows(path)
    if not rows:
        raise ConfigError(f'{path} holds no nodes')
    axes = [a for a in AXES if a in rows[0]]
    if len(axes) not in (2, 3) or 'u' not in rows[0]:
        raise ConfigError(f'{path} needs columns x,y[,z],u')

    nodes = np.array([[float(r[a]) for a in axes] for r in rows])
    values = np.array([float(r['u']) for r in rows])
    fn = lower_convex_envelope(PointCloud.from_points(nodes), values)

    if 'active' in rows[0]:
        stored = np.array([r['active'] in ('1', 'true', 'True') for r in rows])
        changed = int((stored != fn.active).sum())
        if changed:
            _LOGGER.warning(f'{changed} nodes in {path} changed their active flag on reload')
    return fn
