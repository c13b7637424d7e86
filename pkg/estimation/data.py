"""
Measured or simulated series and their CSV form.

CSV files carry a header row; a column name may end in a unit suffix
(``tau_s``, ``frequency_Hz``) which is kept as the series unit.
"""

import csv
import io
import math

import attrs
import numpy as np

from spinreg.exceptions import ConfigError

UNITS = ('s', 'ms', 'us', 'ns', 'Hz', 'kHz', 'MHz', 'rad', 'photons')


def _as_floats(value):
    return np.asarray(value, dtype=float).reshape(-1)


def _optional_floats(value):
    return None if value is None else _as_floats(value)


@attrs.frozen(eq=False)
class DataSeries:
    x: np.ndarray = attrs.field(converter=_as_floats)
    y: np.ndarray = attrs.field(converter=_as_floats)
    y_err: np.ndarray | None = attrs.field(default=None, converter=_optional_floats)
    x_name: str = 'x'
    y_name: str = 'y'

    def __attrs_post_init__(self):
        if self.x.shape != self.y.shape:
            raise ConfigError(f'x and y lengths differ ({len(self.x)} vs {len(self.y)})')
        if self.y_err is not None:
            if self.y_err.shape != self.y.shape:
                raise ConfigError('y_err length differs from y')
            if np.any(self.y_err <= 0):
                raise ConfigError('y_err entries must be > 0')
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ConfigError('data series contains non-finite values')
        if np.any(np.diff(self.x) <= 0):
            raise ConfigError('x values must be strictly increasing')

    def __len__(self):
        return len(self.x)

    @property
    def x_unit(self):
        return unit_of(self.x_name)


def unit_of(column):
    _, _, suffix = column.rpartition('_')
    return suffix if suffix in UNITS else ''


def read_series_csv(stream):
    """``x,y[,y_err]`` columns under a header row; errors name the line."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header:
        raise ConfigError('line 1: missing header row')
    header = [name.strip() for name in header]
    if len(header) not in (2, 3):
        raise ConfigError(f'line 1: expected 2 or 3 columns, got {len(header)}')
    rows = []
    for row in reader:
        if not row or not ''.join(row).strip() or row[0].lstrip().startswith('#'):
            continue
        if len(row) != len(header):
            raise ConfigError(f'line {reader.line_num}: expected {len(header)} columns, got {len(row)}')
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise ConfigError(f'line {reader.line_num}: non-numeric value in {",".join(row)!r}') from None
        if not all(math.isfinite(v) for v in values):
            raise ConfigError(f'line {reader.line_num}: non-finite value')
        if rows and values[0] <= rows[-1][0]:
            raise ConfigError(f'line {reader.line_num}: x values must be strictly increasing')
        rows.append(values)
    if not rows:
        raise ConfigError('no data rows')
    table = np.array(rows)
    y_err = table[:, 2] if len(header) == 3 else None
    return DataSeries(table[:, 0], table[:, 1], y_err, header[0], header[1])


def write_series_csv(series, stream):
    writer = csv.writer(stream, lineterminator='\n')
    header = [series.x_name, series.y_name]
    if series.y_err is not None:
        header.append(f'{series.y_name}_err')
    writer.writerow(header)
    for i in range(len(series)):
        row = [repr(float(series.x[i])), repr(float(series.y[i]))]
        if series.y_err is not None:
            row.append(repr(float(series.y_err[i])))
        writer.writerow(row)


def series_to_csv(series):
    buffer = io.StringIO()
    write_series_csv(series, buffer)
    return buffer.getvalue()


@attrs.frozen(eq=False)
class Grid2D:
    """Values on a (N, tau) grid; ``values[j, i]`` belongs to ``ns[j]`` and ``taus[i]``."""

    taus: np.ndarray = attrs.field(converter=_as_floats)
    ns: tuple = attrs.field(converter=lambda v: tuple(int(n) for n in v))
    values: np.ndarray = attrs.field(converter=lambda v: np.asarray(v, dtype=float))

    def __attrs_post_init__(self):
        if self.values.shape != (len(self.ns), len(self.taus)):
            raise ConfigError(
                f'grid values have shape {self.values.shape}, expected {(len(self.ns), len(self.taus))}'
            )
        if not np.all(np.isfinite(self.values)):
            raise ConfigError('grid contains non-finite values')

    def points(self):
        """(tau, N) pairs in row-major order, N outer."""
        return [(float(tau), n) for n in self.ns for tau in self.taus]


def read_grid_csv(stream):
    """Long-form ``tau_s,N,value`` rows; every (tau, N) pair must be present once."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or len(header) != 3:
        raise ConfigError('line 1: expected header tau,N,value')
    cells = {}
    for row in reader:
        if not row or not ''.join(row).strip():
            continue
        if len(row) != 3:
            raise ConfigError(f'line {reader.line_num}: expected 3 columns, got {len(row)}')
        try:
            tau, n, value = float(row[0]), int(row[1]), float(row[2])
        except ValueError:
            raise ConfigError(f'line {reader.line_num}: malformed row {",".join(row)!r}') from None
        if (tau, n) in cells:
            raise ConfigError(f'line {reader.line_num}: duplicate point tau={tau}, N={n}')
        cells[(tau, n)] = value
    taus = sorted({tau for tau, _ in cells})
    ns = sorted({n for _, n in cells})
    missing = [(t, n) for n in ns for t in taus if (t, n) not in cells]
    if missing or not cells:
        raise ConfigError(f'grid is incomplete: {len(missing)} (tau, N) points missing')
    values = [[cells[(t, n)] for t in taus] for n in ns]
    return Grid2D(taus, ns, values)


def write_grid_csv(grid, stream, value_name='contrast'):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('tau_s', 'N', value_name))
    for j, n in enumerate(grid.ns):
        for i, tau in enumerate(grid.taus):
            writer.writerow((repr(float(tau)), n, repr(float(grid.values[j, i]))))
