"""
CSV and JSON writers for experiment results

Floats are written with 17 significant digits and rows in the order produced,
so identical configs give byte-identical files.
"""
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import django
import numpy as np
import scipy
from django.conf import settings

logger = logging.getLogger(__name__)

DYNZETA_VERSION = '1.0.0'


@dataclass
class Table:
    name: str
    header: List[str]
    rows: List[list] = field(default_factory=list)

    def add(self, *values):
        self.rows.append(list(values))


def format_value(value):
    """17 significant digits for floats, plain text otherwise"""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return f'{value:.17g}'
    if value is None:
        return ''
    return str(value)


def _jsonable(value):
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': _jsonable(value.real), 'im': _jsonable(value.imag)}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_csv(path, table):
    """Write one table; returns the path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])
    logger.info(f'Wrote {len(table.rows)} rows to {path}')
    return path


def envelope(config, subcommand, tables, summary, payload=None):
    """JSON document mirroring the CSV tables plus provenance"""
    return {
        'subcommand': subcommand,
        'config_hash': config.hash,
        'versions': {
            'dynzeta': DYNZETA_VERSION,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'django': django.get_version(),
        },
        'config': config.raw,
        'summary': summary,
        'tables': {
            t.name: {'header': t.header, 'rows': [[_jsonable(v) for v in row] for row in t.rows]} for t in tables
        },
        'results': _jsonable(payload or {}),
    }


def write_json(path, document):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write('\n')
    logger.info(f'Wrote JSON envelope to {path}')
    return path


def output_base(config, subcommand, out=None):
    """--out, then output.path from the config, then DYNZETA_OUTPUT_DIR/<subcommand>-<hash>"""
    if out:
        return Path(out)
    if config.output_path:
        return Path(config.output_path)
    return Path(settings.DYNZETA_OUTPUT_DIR) / f'{subcommand}-{config.hash}'


def write_outputs(config, subcommand, tables, summary, payload=None, out=None):
    """
    Write the tables in the configured format

    Args:
        config: ExperimentConfig
        subcommand: name used for default file names
        tables: list of Table
        summary: one-line summary stored in the JSON envelope
        payload: extra JSON results
        out: explicit base path (directory-like; files get table suffixes)

    Returns:
        list of written paths as strings
    """
    base = output_base(config, subcommand, out)
    paths = []
    if config.output_format in ('csv', 'both'):
        for table in tables:
            suffix = '' if len(tables) == 1 else f'-{table.name}'
            paths.append(write_csv(base.with_name(f'{base.name}{suffix}.csv'), table))
    if config.output_format in ('json', 'both'):
        document = envelope(config, subcommand, tables, summary, payload)
        paths.append(write_json(base.with_name(f'{base.name}.json'), document))
    return [str(p) for p in paths]
