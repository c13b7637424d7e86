"""
Sweep axes and ``${name}`` substitution into script templates.

An axis is written ``name=start:stop:step`` (stop included) or
``name=v1,v2,...``; values carry the units of the DSL. Substituted values are
rendered canonically so the template sees ``8.395us`` rather than a float.
"""

import string
from decimal import Decimal

import attrs
from django.conf import settings

from seqlang import units
from spinreg.exceptions import ConfigError, SeqlangError

VARIABLES = {
    'tau': (units.DURATION, 's'),
    'duration': (units.DURATION, 's'),
    'frequency': (units.FREQUENCY, 'Hz'),
    'amplitude': (units.ANGLE, 'rad'),
    'N': (None, ''),
}

_FORMAT = {
    units.DURATION: units.format_duration,
    units.FREQUENCY: units.format_frequency,
    units.ANGLE: units.format_angle,
}


def max_grid_points():
    return settings.SPINREG.get('MAX_GRID_POINTS', 20000)


@attrs.frozen
class SweepAxis:
    name: str = attrs.field(validator=attrs.validators.in_(tuple(VARIABLES)))
    values: tuple = attrs.field(converter=tuple)

    def __attrs_post_init__(self):
        if not self.values:
            raise ConfigError(f'sweep over {self.name} is empty')

    @property
    def column(self):
        unit = VARIABLES[self.name][1]
        return f'{self.name}_{unit}' if unit else self.name

    def render(self, value):
        dimension = VARIABLES[self.name][0]
        return str(int(value)) if dimension is None else _FORMAT[dimension](value)


@attrs.frozen
class SweepSpec:
    """One or two axes; the first is the outer (slow) one."""

    outer: SweepAxis
    inner: SweepAxis | None = None

    def __attrs_post_init__(self):
        if self.inner is not None and self.inner.name == self.outer.name:
            raise ConfigError(f'both sweep axes vary {self.outer.name}')
        limit = max_grid_points()
        if len(self) > limit:
            raise ConfigError(f'sweep has {len(self)} points, more than the limit of {limit}')

    def __len__(self):
        return len(self.outer.values) * (len(self.inner.values) if self.inner else 1)

    @property
    def axes(self):
        return (self.outer,) if self.inner is None else (self.outer, self.inner)

    def points(self):
        """Dicts of axis values in row order, outer axis major."""
        if self.inner is None:
            return [{self.outer.name: v} for v in self.outer.values]
        return [{self.outer.name: v, self.inner.name: w}
                for v in self.outer.values for w in self.inner.values]


def _scalar(name, text):
    dimension = VARIABLES[name][0]
    text = text.strip()
    if dimension is None:
        try:
            value = int(text)
        except ValueError:
            raise ConfigError(f'{name} values must be integers, got {text!r}') from None
        if value < 1:
            raise ConfigError(f'{name} values must be >= 1, got {value}')
        return Decimal(value)
    try:
        return Decimal(repr(units.parse_quantity(text, dimension).value))
    except SeqlangError as exc:
        raise ConfigError(f'sweep {name}: {exc.message}') from None


def parse_axis(text):
    """``tau=8.391us:8.404us:1ns`` or ``N=20,40,80``."""
    name, sep, spec = text.partition('=')
    name = name.strip()
    if not sep:
        raise ConfigError(f'sweep {text!r} must read name=start:stop:step or name=v1,v2,...')
    if name not in VARIABLES:
        raise ConfigError(f'cannot sweep {name!r}; choose one of {", ".join(VARIABLES)}')
    integer = VARIABLES[name][0] is None
    if ':' in spec:
        parts = spec.split(':')
        if len(parts) != 3:
            raise ConfigError(f'sweep range {spec!r} must read start:stop:step')
        start, stop, step = (_scalar(name, part) for part in parts)
        if step <= 0:
            raise ConfigError(f'sweep step must be > 0, got {parts[2]!r}')
        count = int((stop - start) / step) + 1 if stop >= start else 0
        limit = max_grid_points()
        if count > limit:
            raise ConfigError(f'sweep over {name} has {count} points, more than the limit of {limit}')
        values = [start + k * step for k in range(count)]
    else:
        values = [_scalar(name, part) for part in spec.split(',') if part.strip()]
    return SweepAxis(name, [int(v) if integer else float(v) for v in values])


def parse_sweep(outer, inner=None):
    return SweepSpec(parse_axis(outer), parse_axis(inner) if inner else None)


def placeholders(template):
    return set(string.Template(template).get_identifiers())


def check_template(template, sweep):
    found = placeholders(template)
    missing = [axis.name for axis in sweep.axes if axis.name not in found]
    if missing:
        raise ConfigError('template has no placeholder for ' + ', '.join(f'${{{m}}}' for m in missing))
    unbound = sorted(found - {axis.name for axis in sweep.axes})
    if unbound:
        raise ConfigError('template placeholder(s) not swept: ' + ', '.join(f'${{{u}}}' for u in unbound))


def substitute(template, sweep, point):
    """Script text for one sweep point."""
    rendered = {axis.name: axis.render(point[axis.name]) for axis in sweep.axes}
    try:
        return string.Template(template).substitute(rendered)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f'cannot substitute template: {exc}') from None
