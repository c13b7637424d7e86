"""CSV and JSON writers for command output; numbers are written repr-exact."""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from spinreg.exceptions import NumericError


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise NumericError(f'non-finite value {value} in output')
        return value
    return value


def json_text(document):
    return json.dumps(_plain(document), indent=2, sort_keys=True, allow_nan=False) + '\n'


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise NumericError(f'non-finite value {value} in output')
        return repr(value)
    return value


def csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    return path


def write_json(path, document):
    return write_text(path, json_text(document))


def write_csv(path, header, rows):
    return write_text(path, csv_text(header, rows))


def observable_columns(results):
    """Observable names present in every result, in a stable order."""
    if not results:
        return []
    names = set(results[0])
    for result in results[1:]:
        names &= set(result)
    return sorted(names)
