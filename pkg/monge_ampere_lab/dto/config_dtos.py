from dataclasses import dataclass, field
from typing import List, Optional

from dataclasses_json import dataclass_json

from ..enums.lab_enums import Command


#### SOLVE #############################################################################################################
@dataclass_json
@dataclass
class SolveConfigDto:
    scenario: str
    n: int
    k: int
    epsilon: float
    alpha: float
    rho: float
    radius: float
    h0: float
    h_min: float
    ratio: float
    boundary_radius: float
    profile: str
    cap: float
    boundary_offset: float
    tol: float
    max_sweeps: int
    mode: str
    heights: List[float]
    residual_tol: float
    f_min: float
    vertices: Optional[List[List[float]]] = None
    active_faces: Optional[List[int]] = None
    directions: Optional[List[List[float]]] = None
    weights: Optional[List[float]] = None
    arm_length: Optional[float] = None
    refine: Optional[List[float]] = None
    radii: Optional[List[float]] = None

    def scenario_fields(self) -> dict:
        """Keyword arguments of the scenario description."""
        names = ('n', 'k', 'epsilon', 'alpha', 'rho', 'radius', 'h0', 'h_min', 'ratio', 'vertices', 'active_faces',
                 'directions', 'weights', 'arm_length', 'boundary_radius', 'profile', 'cap', 'boundary_offset')
        data = {name: getattr(self, name) for name in names}
        data['kind'] = self.scenario
        return data


#### OT ################################################################################################################
@dataclass_json
@dataclass
class ShapeConfigDto:
    lam: float
    slope: float
    eccentricity: float
    radius_sq: float
    parts: int
    sides: int
    vertices: int
    source: Optional[List[List[float]]] = None
    target: Optional[List[List[float]]] = None


@dataclass_json
@dataclass
class OtConfigDto:
    example: str
    sites: int
    refine: bool
    frames: List[float]
    threshold: float
    tol: float
    max_steps: int
    points_per_cell: int
    shape: ShapeConfigDto
    dual: Optional[str] = None


#### BARRIER ###########################################################################################################
@dataclass_json
@dataclass
class BarrierConfigDto:
    variant: str
    admissibility: bool
    n: int
    k: int
    epsilon: float
    rho: float
    alpha: float
    profile: str
    growth_radii: List[float]
    constant_search: bool
    samples_per_axis: int
    slab: float
    directions: Optional[List[List[float]]] = None
    weights: Optional[List[float]] = None


#### MEASURE ###########################################################################################################
@dataclass_json
@dataclass
class RegionConfigDto:
    kind: str
    lo: Optional[List[float]] = None
    hi: Optional[List[float]] = None
    center: Optional[List[float]] = None
    radius: Optional[float] = None


@dataclass_json
@dataclass
class MeasureConfigDto:
    function: str
    spacing: float
    extent: float
    region: RegionConfigDto
    oracle_resolution: Optional[float] = None
    expected: Optional[float] = None
    rel_tol: float = 0.05


#### RENDER ############################################################################################################
@dataclass_json
@dataclass
class RenderConfigDto:
    kind: str
    input: Optional[str] = None


#### RUN ###############################################################################################################
@dataclass_json
@dataclass
class RunConfigDto:
    command: Command
    output: str
    solve: SolveConfigDto
    ot: OtConfigDto
    barrier: BarrierConfigDto
    measure: MeasureConfigDto
    render: RenderConfigDto
    svg: bool = True
    log_iterations: bool = False
    overrides: List[str] = field(default_factory=list)

    def section(self):
        """Parameters of the selected command; interp shares the ot section."""
        name = 'ot' if self.command == Command.INTERP else self.command.value
        return getattr(self, name)
