"""
Pulse-program intermediate representation.

Programs are immutable trees. ``target`` is ``None`` for the electron and the
0-based nuclear spin index otherwise. Pulse carriers are absolute angular
frequencies; ``carrier=None`` means "on the channel's resonance": the frame
reference (plus the envelope's detuning) for MW, the electron-conditioned
nuclear line named by ``condition`` for RF.
"""

import math

import attrs
from django.conf import settings

from spinreg.exceptions import SequenceError

MW = 'mw'
RF = 'rf'
CHANNELS = (MW, RF)
ELECTRON_CONDITIONS = (None, 'up', 'down')
READOUT = 'readout'


def _non_negative(instance, attribute, value):
    if value < 0:
        raise SequenceError(f'{attribute.name} must be >= 0, got {value}')


@attrs.frozen
class Delay:
    tau: float = attrs.field(validator=_non_negative)

    def duration(self):
        return self.tau


@attrs.frozen
class Pulse:
    channel: str = attrs.field(validator=attrs.validators.in_(CHANNELS))
    envelope: object
    carrier: float | None = None
    target: int | None = None
    condition: str | None = attrs.field(default=None, validator=attrs.validators.in_(ELECTRON_CONDITIONS))

    def __attrs_post_init__(self):
        if self.channel == RF and self.target is None:
            raise SequenceError('an RF pulse needs a nuclear target')
        if self.channel == MW and self.target is not None:
            raise SequenceError('MW pulses act on the electron only')
        if self.channel == RF and self.carrier is None and self.condition is None:
            raise SequenceError('an RF pulse needs a carrier or an electron condition')

    def duration(self):
        return self.envelope.duration


@attrs.frozen
class Simultaneous:
    """Several tones played at once; the block lasts as long as its longest pulse."""

    pulses: tuple = attrs.field(converter=tuple)

    def __attrs_post_init__(self):
        if not self.pulses:
            raise SequenceError('a simultaneous block needs at least one pulse')
        for pulse in self.pulses:
            if not isinstance(pulse, Pulse):
                raise SequenceError('simultaneous blocks hold pulses only')

    def duration(self):
        return max(pulse.duration() for pulse in self.pulses)


@attrs.frozen
class Repeat:
    n: int
    body: tuple = attrs.field(converter=tuple)

    def __attrs_post_init__(self):
        if self.n < 1:
            raise SequenceError(f'repeat count must be >= 1, got {self.n}')

    def duration(self):
        return self.n * sum(element.duration() for element in self.body)


@attrs.frozen
class Barrier:
    label: str = ''

    def duration(self):
        return 0.0


@attrs.frozen
class Reset:
    """Re-initialize the electron to its F_e mixture, nuclei untouched."""

    def duration(self):
        return 0.0


@attrs.frozen
class Measure:
    label: str = ''

    def duration(self):
        return 0.0


@attrs.frozen
class Rotation:
    """Instantaneous ideal rotation about (cos phase, sin phase, 0)."""

    target: int | None
    angle: float
    phase: float = 0.0

    def duration(self):
        return 0.0


@attrs.frozen
class ConditionalPhase:
    """Instantaneous phase -1 on nuclear states matching ``states`` ((index, +-1) pairs)."""

    states: tuple = attrs.field(converter=lambda value: tuple(sorted(dict(value).items())))

    def duration(self):
        return 0.0


@attrs.frozen
class Noisy:
    """Apply ``body`` with probability ``fidelity``; free evolution otherwise."""

    fidelity: float
    body: tuple = attrs.field(converter=tuple)

    def __attrs_post_init__(self):
        if not 0.0 <= self.fidelity <= 1.0:
            raise SequenceError(f'fidelity must lie in [0, 1], got {self.fidelity}')

    def duration(self):
        return sum(element.duration() for element in self.body)


BLOCKS = (Repeat, Noisy)


@attrs.frozen
class PulseProgram:
    elements: tuple = attrs.field(default=(), converter=tuple)

    def __attrs_post_init__(self):
        limit = getattr(settings, 'SPINREG', {}).get('MAX_NESTING', 16)
        if nesting_depth(self.elements) > limit:
            raise SequenceError(f'program nesting exceeds {limit} levels')

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __add__(self, other):
        other_elements = other.elements if isinstance(other, PulseProgram) else tuple(other)
        return PulseProgram(self.elements + other_elements)

    def duration(self):
        return sum(element.duration() for element in self.elements)

    def flatten(self):
        """Elements with every Repeat unrolled (Noisy blocks stay)."""
        return tuple(_flatten(self.elements))

    def rf_targets(self):
        return sorted(set(_rf_targets(self.elements)))


def nesting_depth(elements):
    depth = 0
    for element in elements:
        if isinstance(element, BLOCKS):
            depth = max(depth, 1 + nesting_depth(element.body))
    return depth


def _flatten(elements):
    for element in elements:
        if isinstance(element, Repeat):
            for _ in range(element.n):
                yield from _flatten(element.body)
        else:
            yield element


def _rf_targets(elements):
    for element in elements:
        if isinstance(element, Pulse) and element.channel == RF:
            yield element.target
        elif isinstance(element, Simultaneous):
            yield from _rf_targets(element.pulses)
        elif isinstance(element, (Rotation,)) and element.target is not None:
            yield element.target
        elif isinstance(element, BLOCKS):
            yield from _rf_targets(element.body)


def is_pi_pulse(element, fraction=None):
    """MW pulses (or ideal electron rotations) whose area reaches ``fraction`` of pi."""
    if fraction is None:
        fraction = getattr(settings, 'SPINREG', {}).get('PI_AREA_FRACTION', 0.9)
    if isinstance(element, Pulse) and element.channel == MW:
        return abs(element.envelope.area()) >= fraction * math.pi
    if isinstance(element, Rotation) and element.target is None:
        return abs(element.angle) >= fraction * math.pi
    return False
