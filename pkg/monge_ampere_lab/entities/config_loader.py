import logging
import os
from typing import Any, Dict, List, Optional

import voluptuous as vol
import yaml
from benedict import benedict
from voluptuous import All, Any as AnyOf, Coerce, In, Length, Range

from ..dto.config_dtos import RunConfigDto
from ..enums.lab_enums import BarrierVariant, Command, ObstacleProfile, RegionKind, ScenarioKind, ShapeName, SweepMode
from ..errors import ConfigError

_LOGGER = logging.getLogger(__name__)

CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'config')

Number = Coerce(float)
Count = All(Coerce(int), Range(min=1))
Points = AnyOf(None, [[Number]])


def _values(enum) -> In:
    return In([e.value for e in enum])


SOLVE_SCHEMA = vol.Schema({
    vol.Required('scenario'): _values(ScenarioKind),
    vol.Required('n'): All(Coerce(int), In([2, 3])),
    vol.Required('k'): All(Coerce(int), Range(min=1)),
    vol.Required('epsilon'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('alpha'): All(Number, Range(min=0.0, max=1.0, min_included=False, max_included=False)),
    vol.Required('rho'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('radius'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('h0'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('h_min'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('ratio'): All(Number, Range(min=1.0, min_included=False)),
    vol.Required('boundary_radius'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('profile'): _values(ObstacleProfile),
    vol.Required('cap'): Number,
    vol.Required('boundary_offset'): Number,
    vol.Required('tol'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('max_sweeps'): Count,
    vol.Required('mode'): _values(SweepMode),
    vol.Required('heights'): All([Number], Length(min=1)),
    vol.Required('residual_tol'): Number,
    vol.Required('f_min'): Number,
    vol.Optional('vertices'): Points,
    vol.Optional('active_faces'): AnyOf(None, [Coerce(int)]),
    vol.Optional('directions'): Points,
    vol.Optional('weights'): AnyOf(None, [Number]),
    vol.Optional('arm_length'): AnyOf(None, Number),
    vol.Optional('refine'): AnyOf(None, All([Number], Length(min=2))),
    vol.Optional('radii'): AnyOf(None, All([Number], Length(min=2))),
}, extra=vol.PREVENT_EXTRA)

SHAPE_SCHEMA = vol.Schema({
    vol.Required('lam'): Number,
    vol.Required('slope'): Number,
    vol.Required('eccentricity'): Number,
    vol.Required('radius_sq'): Number,
    vol.Required('parts'): Coerce(int),
    vol.Required('sides'): Coerce(int),
    vol.Required('vertices'): Coerce(int),
    vol.Optional('source'): Points,
    vol.Optional('target'): Points,
}, extra=vol.PREVENT_EXTRA)

OT_SCHEMA = vol.Schema({
    vol.Required('example'): All(str, lambda name: ShapeName.parse(name).value),
    vol.Required('sites'): Count,
    vol.Required('refine'): bool,
    vol.Required('frames'): [Number],
    vol.Required('threshold'): Number,
    vol.Required('tol'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('max_steps'): Count,
    vol.Required('points_per_cell'): Count,
    vol.Required('shape'): SHAPE_SCHEMA,
    vol.Optional('dual'): AnyOf(None, str),
}, extra=vol.PREVENT_EXTRA)

BARRIER_SCHEMA = vol.Schema({
    vol.Required('variant'): _values(BarrierVariant),
    vol.Required('admissibility'): bool,
    vol.Required('n'): All(Coerce(int), Range(min=1)),
    vol.Required('k'): All(Coerce(int), Range(min=1)),
    vol.Required('epsilon'): Number,
    vol.Required('rho'): Number,
    vol.Required('alpha'): Number,
    vol.Required('profile'): _values(ObstacleProfile),
    vol.Required('growth_radii'): [Number],
    vol.Required('constant_search'): bool,
    vol.Required('samples_per_axis'): All(Coerce(int), Range(min=2)),
    vol.Required('slab'): All(Number, Range(min=0.0, max=1.0, min_included=False)),
    vol.Optional('directions'): Points,
    vol.Optional('weights'): AnyOf(None, [Number]),
}, extra=vol.PREVENT_EXTRA)

MEASURE_SCHEMA = vol.Schema({
    vol.Required('function'): In(['w', 'caffarelli', 'quadratic', 'cone']),
    vol.Required('spacing'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('extent'): All(Number, Range(min=0.0, min_included=False)),
    vol.Required('region'): vol.Schema({
        vol.Required('kind'): In([RegionKind.RECTANGLE.value, RegionKind.BALL.value]),
        vol.Optional('lo'): AnyOf(None, [Number]),
        vol.Optional('hi'): AnyOf(None, [Number]),
        vol.Optional('center'): AnyOf(None, [Number]),
        vol.Optional('radius'): AnyOf(None, Number),
    }, extra=vol.PREVENT_EXTRA),
    vol.Optional('oracle_resolution'): AnyOf(None, All(Number, Range(min=0.0, min_included=False))),
    vol.Optional('expected'): AnyOf(None, Number),
    vol.Optional('rel_tol'): Number,
}, extra=vol.PREVENT_EXTRA)

RENDER_SCHEMA = vol.Schema({
    vol.Required('kind'): In(['frames', 'singular', 'profile', 'cells']),
    vol.Optional('input'): AnyOf(None, str),
}, extra=vol.PREVENT_EXTRA)

RUN_SCHEMA = vol.Schema({
    vol.Required('command'): _values(Command),
    vol.Required('output'): str,
    vol.Required('svg'): bool,
    vol.Required('log_iterations'): bool,
    vol.Required('solve'): SOLVE_SCHEMA,
    vol.Required('ot'): OT_SCHEMA,
    vol.Required('barrier'): BARRIER_SCHEMA,
    vol.Required('measure'): MEASURE_SCHEMA,
    vol.Required('render'): RENDER_SCHEMA,
    vol.Optional('overrides'): [str],
}, extra=vol.PREVENT_EXTRA)


class ConfigLoader:
    defaults_name = 'defaults.yaml'
    scenarios_name = 'scenarios.yaml'
    services_name = 'services.yaml'

    def __init__(self, path: str = CONFIG_PATH):
        self.path = path

    def _read(self, path: str) -> Dict[str, Any]:
        if not os.path.isfile(path):
            raise ConfigError(f'Config file {path} does not exist')
        with open(path, 'r', encoding='utf-8') as file:
            try:
                yaml_data = yaml.safe_load(file)
            except yaml.YAMLError as e:
                raise ConfigError(f'Config file {path} is not valid YAML: {e}') from e
        if yaml_data is None:
            return {}
        if not isinstance(yaml_data, dict):
            raise ConfigError(f'Config file {path} must hold a mapping')
        return yaml_data

    def load_defaults(self) -> Dict[str, Any]:
        return self._read(os.path.join(self.path, self.defaults_name))

    def load_scenarios(self) -> Dict[str, Any]:
        return self._read(os.path.join(self.path, self.scenarios_name))

    def load_services(self) -> Dict[str, Any]:
        """Name, description and fields of every command, used for the CLI help."""
        return self._read(os.path.join(self.path, self.services_name))

    @staticmethod
    def parse_override(item: str):
        """`solve.h_min=0.02` -> ('solve.h_min', 0.02); values are read as YAML scalars or lists."""
        if '=' not in item:
            raise ConfigError(f'Override {item!r} must look like key.path=value')
        key, raw = item.split('=', 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(f'Override {item!r} has an unreadable value: {e}') from e
        return key.strip(), value

    @staticmethod
    def apply_overrides(data: benedict, overrides: List[str]) -> None:
        for item in overrides:
            key, value = ConfigLoader.parse_override(item)
            # only keys the defaults know, so typos fail here rather than in a long run
            if key not in data:
                raise ConfigError(f'Unknown config key {key!r}')
            data[key] = value

    def load_run_config(self, user_file: Optional[str] = None, overrides: Optional[List[str]] = None) -> RunConfigDto:
        """
        defaults.yaml, then the scenario presets, then the user file, then `key.path=value` overrides.
        Validation rejects unknown keys and out of range values.

        :raises ConfigError: for unreadable files, unknown keys or invalid values.
        """
        overrides = list(overrides or [])
        user = self._read(user_file) if user_file else {}

        data = benedict(self.load_defaults(), keypath_separator='.')
        data.merge(user)
        self.apply_overrides(data, overrides)

        scenario = data.get('solve.scenario')
        presets = self.load_scenarios().get(scenario) or {}
        if presets:
            _LOGGER.debug(f'Applying {scenario} presets {presets}')
            data = benedict(self.load_defaults(), keypath_separator='.')
            data.merge({'solve': presets})
            data.merge(user)
            self.apply_overrides(data, overrides)

        data['overrides'] = overrides
        try:
            validated = RUN_SCHEMA(data.dict())
        except vol.Invalid as e:
            raise ConfigError(f'Invalid config: {e}') from e
        return RunConfigDto.from_dict(validated)
