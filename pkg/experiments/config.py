"""
Experiment configs: JSON files naming a map, a potential and one block per subcommand.

Unknown keys are rejected before anything is computed.
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from induced_map.potentials import potential_from_config
from interval_maps.exceptions import DynZetaError
from interval_maps.families import map_from_config

logger = logging.getLogger(__name__)


class ConfigError(DynZetaError):
    """Config file is unreadable or violates the schema"""


MAP_KEYS = {'family', 'alpha', 'params'}
POTENTIAL_KEYS = {'kind', 'q', 'shift', 'v0', 'k', 'callable', 'v0_at_zero'}
CONTOUR_KEYS = {'line_real_part', 't_max', 'points_per_unit'}
OUTPUT_KEYS = {'format', 'path'}
OUTPUT_FORMATS = ('csv', 'json', 'both')

BLOCK_KEYS = {
    'trace': {'z', 'm_max', 'cutoff', 'source', 'mollified', 'eps'},
    'det': {'z', 'M', 'cutoff', 'source', 'u0', 'k'},
    'zeta': {'z_list', 'z_path', 'n_max', 'm_max', 'cutoff'},
    'spectrum': {'z', 'n_nodes', 'top', 'branch_cutoff', 'ulam_bits'},
    'eigenfun': {'z', 'n_nodes', 'index', 'grid_points', 'lambda', 'L_terms', 'bump_a'},
    'continue': {'x', 'f', 'z_path', 'eps', 'contour'},
    'lambda': {'z', 'm_max', 'cutoff', 'grid'},
    'pressure': {'which', 'n_max', 'cutoff'},
    'check': {'suite'},
}
TOP_LEVEL_KEYS = {'map', 'potential', 'output'} | set(BLOCK_KEYS)

# analytic test functions f accepted by the continue and check blocks
TEST_FUNCTIONS = {
    'one': np.ones_like,
    'x': lambda x: x,
    'x(1-x)': lambda x: x * (1 - x),
    'cos': np.cos,
    'exp': np.exp,
}


def _reject_unknown(data, allowed, where):
    if not isinstance(data, dict):
        raise ConfigError(f'{where} must be a JSON object')
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f'Unknown key(s) in {where}: {", ".join(unknown)}')


def parse_complex(value, name='z'):
    """A JSON number, a [re, im] pair or a string such as "0.5+0.3i" as a complex number"""
    if isinstance(value, bool):
        raise ConfigError(f'{name} must be a number, got {value!r}')
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(' ', '').replace('i', 'j'))
        except ValueError:
            pass
    raise ConfigError(f'{name} must be a number, a [re, im] pair or a complex string, got {value!r}')


def parse_complex_list(values, name):
    if not isinstance(values, list) or not values:
        raise ConfigError(f'{name} must be a non-empty list')
    return [parse_complex(v, f'{name}[{i}]') for i, v in enumerate(values)]


def config_hash(data):
    canonical = json.dumps(data, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


@dataclass
class ExperimentConfig:
    raw: dict
    map_spec: object
    potential: object
    blocks: dict = field(default_factory=dict)
    output_format: str = 'csv'
    output_path: Optional[str] = None

    @property
    def hash(self):
        return config_hash(self.raw)

    def block(self, name):
        return self.blocks.get(name, {})

    def test_function(self, name):
        try:
            return TEST_FUNCTIONS[name]
        except KeyError:
            raise ConfigError(f'Unknown test function {name!r}; choose from {", ".join(TEST_FUNCTIONS)}')


def parse_config(data):
    """
    Validate a decoded config and build its map and potential

    Args:
        data: dict decoded from JSON

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: on unknown keys, missing sections or invalid values
    """
    _reject_unknown(data, TOP_LEVEL_KEYS, 'config')
    if 'map' not in data:
        raise ConfigError("Config needs a 'map' section")
    _reject_unknown(data['map'], MAP_KEYS, 'map')
    potential_data = data.get('potential', {'kind': 'mql', 'q': 1.0})
    _reject_unknown(potential_data, POTENTIAL_KEYS, 'potential')

    blocks = {}
    for name, allowed in BLOCK_KEYS.items():
        if name in data:
            _reject_unknown(data[name], allowed, name)
            blocks[name] = data[name]
    if 'contour' in blocks.get('continue', {}):
        _reject_unknown(blocks['continue']['contour'], CONTOUR_KEYS, 'continue.contour')

    output = data.get('output', {})
    _reject_unknown(output, OUTPUT_KEYS, 'output')
    output_format = output.get('format', 'csv')
    if output_format not in OUTPUT_FORMATS:
        raise ConfigError(f'output.format must be one of {", ".join(OUTPUT_FORMATS)}, got {output_format!r}')

    try:
        map_spec = map_from_config(data['map'])
        potential = potential_from_config(potential_data)
    except DynZetaError as exc:
        raise ConfigError(f'Invalid map or potential: {exc}')
    except (TypeError, ValueError) as exc:
        raise ConfigError(f'Malformed map or potential parameters: {exc}')

    return ExperimentConfig(raw=data, map_spec=map_spec, potential=potential, blocks=blocks,
                            output_format=output_format, output_path=output.get('path'))


def load_config(path):
    """Read and validate a JSON config file"""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f'Cannot read config {path}: {exc}')
    except json.JSONDecodeError as exc:
        raise ConfigError(f'Config {path} is not valid JSON: {exc}')
    config = parse_config(data)
    logger.debug(f'Loaded config {path} (hash {config.hash})')
    return config
