"""
Unit-carrying literals shared by the pulse DSL and the register config files.

Durations come out in seconds, frequencies in Hz (cyclic) and angles in
radians. Conversion to angular frequency happens at the call site.
"""

import math
import re
from decimal import Decimal, DecimalException
from fractions import Fraction

import attrs

from spinreg.exceptions import SeqlangError

DURATION = 'duration'
FREQUENCY = 'frequency'
ANGLE = 'angle'
NUMBER = 'number'

DURATION_UNITS = {'s': 0, 'ms': -3, 'us': -6, 'µs': -6, 'ns': -9}
FREQUENCY_UNITS = {'Hz': 0, 'kHz': 3, 'MHz': 6, 'GHz': 9}
ANGLE_UNITS = {'rad': None, 'deg': None}

_NUMBER = r'[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?'
_QUANTITY_RE = re.compile(rf'^(?P<number>{_NUMBER})(?P<unit>[A-Za-zµ]*)$')
_PI_RE = re.compile(r'^(?P<sign>[+-]?)(?P<num>\d*)pi(?:/(?P<den>\d+))?$')


@attrs.frozen
class Quantity:
    value: float
    dimension: str


def _scaled(number, exponent):
    try:
        return float(Decimal(number).scaleb(exponent))
    except (DecimalException, ValueError) as exc:
        raise SeqlangError(f'malformed number {number!r}') from exc


def parse_quantity(text, expect=None):
    """Parse ``8.395us``, ``150kHz``, ``pi/2``, ``90deg`` or a bare number."""
    text = text.strip()
    pi_match = _PI_RE.match(text)
    if pi_match:
        try:
            numerator = int(pi_match['num'] or 1)
            denominator = int(pi_match['den'] or 1)
            if denominator == 0:
                raise SeqlangError(f'division by zero in angle {text!r}')
            value = numerator * math.pi / denominator
        except (OverflowError, ValueError):
            raise SeqlangError(f'angle {text!r} is out of range') from None
        quantity = Quantity(-value if pi_match['sign'] == '-' else value, ANGLE)
        return _expect(quantity, expect, text)

    match = _QUANTITY_RE.match(text)
    if not match:
        raise SeqlangError(f'malformed quantity {text!r}')
    number, unit = match['number'], match['unit']
    if not unit:
        quantity = Quantity(_scaled(number, 0), NUMBER)
    elif unit in DURATION_UNITS:
        quantity = Quantity(_scaled(number, DURATION_UNITS[unit]), DURATION)
    elif unit in FREQUENCY_UNITS:
        quantity = Quantity(_scaled(number, FREQUENCY_UNITS[unit]), FREQUENCY)
    elif unit == 'rad':
        quantity = Quantity(_scaled(number, 0), ANGLE)
    elif unit == 'deg':
        quantity = Quantity(math.radians(_scaled(number, 0)), ANGLE)
    else:
        raise SeqlangError(f'unknown unit {unit!r} in {text!r}')
    return _expect(quantity, expect, text)


def _expect(quantity, expect, text):
    if expect is None or quantity.dimension == expect:
        return quantity
    raise SeqlangError(f'expected a {expect} but got {quantity.dimension} {text!r}')


def parse_duration(text):
    return parse_quantity(text, DURATION).value


def parse_frequency(text):
    """Cyclic frequency in Hz."""
    return parse_quantity(text, FREQUENCY).value


def parse_angular_frequency(text):
    return 2 * math.pi * parse_frequency(text)


def parse_angle(text):
    return parse_quantity(text, ANGLE).value


def _mantissa(value, exponent):
    digits = Decimal(repr(float(value))).scaleb(-exponent).normalize()
    text = format(digits, 'f')
    return text


def _with_unit(value, units):
    if value == 0:
        return f'0{units[-1][0]}'
    magnitude = Decimal(repr(float(value))).copy_abs()
    for unit, exponent in units:
        if magnitude >= Decimal(1).scaleb(exponent):
            return f'{_mantissa(value, exponent)}{unit}'
    unit, exponent = units[-1]
    return f'{_mantissa(value, exponent)}{unit}'


def format_duration(seconds):
    """Canonical rendering, e.g. 8.395e-6 -> ``8.395us``."""
    return _with_unit(seconds, [('s', 0), ('ms', -3), ('us', -6), ('ns', -9)])


def format_frequency(hertz):
    return _with_unit(hertz, [('GHz', 9), ('MHz', 6), ('kHz', 3), ('Hz', 0)])


def format_angle(radians):
    if radians == 0:
        return '0rad'
    fraction = Fraction(radians / math.pi).limit_denominator(16)
    numerator = abs(fraction.numerator)
    # pi form only when parsing it back gives the same float
    exact = numerator * math.pi / fraction.denominator
    if fraction != 0 and (exact if fraction > 0 else -exact) == radians:
        sign = '-' if fraction < 0 else ''
        head = '' if numerator == 1 else str(numerator)
        tail = '' if fraction.denominator == 1 else f'/{fraction.denominator}'
        return f'{sign}{head}pi{tail}'
    return f'{_mantissa(radians, 0)}rad'


def format_number(value):
    if float(value).is_integer():
        return str(int(value))
    return _mantissa(value, 0)
