"""Canonical text for script trees and pulse programs."""

import math

from pulses.shapes import SINC
from sequences.program import (
    MW, Barrier, ConditionalPhase, Delay, Measure, Noisy, Pulse, PulseProgram, Repeat, Reset,
    Rotation, Simultaneous,
)
from spinmodel.hamiltonians import format_state_string

from . import units
from .nodes import ANGLE, COUNT, DURATION, FREQUENCY, PROBABILITY, Argument, Script, Statement

INDENT = '  '

_FORMATTERS = {
    DURATION: units.format_duration,
    FREQUENCY: units.format_frequency,
    ANGLE: units.format_angle,
    COUNT: str,
    PROBABILITY: units.format_number,
}

TWO_PI = 2 * math.pi


def _argument_text(statement, argument):
    kind = statement.signature.kind_of(argument.name)
    text = _FORMATTERS.get(kind, str)(argument.value)
    positional = [name for name, _ in statement.signature.positional]
    return text if argument.name in positional else f'{argument.name}={text}'


def _statement_lines(statement, depth):
    head = ' '.join([statement.name] + [_argument_text(statement, a) for a in statement.arguments])
    pad = INDENT * depth
    if statement.body is None:
        return [pad + head]
    lines = [f'{pad}{head} {{']
    for inner in statement.body:
        lines.extend(_statement_lines(inner, depth + 1))
    lines.append(pad + '}')
    return lines


def format_script(script):
    lines = []
    for statement in script:
        lines.extend(_statement_lines(statement, 0))
    return '\n'.join(lines) + '\n' if lines else ''


def _statement(name, body=None, **values):
    arguments = [Argument(key, value) for key, value in values.items() if value is not None]
    return Statement(name, sorted_arguments(name, arguments), body)


def sorted_arguments(name, arguments):
    order = {key: i for i, key in enumerate(Statement(name).signature.names())}
    return sorted(arguments, key=lambda argument: order[argument.name])


def _hertz(value):
    return None if value is None or value == 0 else value / TWO_PI


def _pulse(pulse):
    envelope = pulse.envelope
    values = {
        'phase': envelope.phase or None,
        'detune': _hertz(envelope.carrier_detuning),
        'carrier': _hertz(pulse.carrier),
    }
    if pulse.channel == MW:
        if envelope.kind == SINC:
            values.update(shape='sinc', bw=envelope.bandwidth)
        else:
            values['rabi'] = _hertz(envelope.peak_rabi)
        return _statement('mw', angle=envelope.area(), **values)
    return _statement(
        'rf', angle=envelope.area(), target=f'n{pulse.target + 1}',
        cond=f'e:{pulse.condition}' if pulse.condition else None,
        rabi=_hertz(envelope.peak_rabi), **values,
    )


def lift(elements):
    """Statements that lower back to ``elements``."""
    statements = []
    for element in elements:
        if isinstance(element, Delay):
            statements.append(_statement('wait', duration=element.tau))
        elif isinstance(element, Pulse):
            statements.append(_pulse(element))
        elif isinstance(element, Simultaneous):
            statements.append(_statement('simul', body=[_pulse(p) for p in element.pulses]))
        elif isinstance(element, Repeat):
            statements.append(_statement('repeat', body=lift(element.body), n=element.n))
        elif isinstance(element, Noisy):
            statements.append(_statement('noisy', body=lift(element.body), fidelity=element.fidelity))
        elif isinstance(element, Barrier):
            statements.append(_statement('barrier', label=element.label or None))
        elif isinstance(element, Reset):
            statements.append(_statement('reset_e'))
        elif isinstance(element, Measure):
            statements.append(_statement('measure_e', label=element.label or None))
        elif isinstance(element, Rotation):
            target = 'e' if element.target is None else f'n{element.target + 1}'
            statements.append(_statement('rot', angle=element.angle, target=target,
                                         phase=element.phase or None))
        elif isinstance(element, ConditionalPhase):
            statements.append(_statement('cz', cond=format_state_string(dict(element.states))))
        else:
            raise TypeError(f'cannot format {type(element).__name__}')
    return statements


def format_source(obj):
    """Canonical ``.sq`` text for a Script or a PulseProgram.

    Nested blocks indent by two spaces; quantities use the largest unit that
    keeps the mantissa >= 1.
    """
    if isinstance(obj, PulseProgram):
        obj = Script(lift(obj.elements))
    if not isinstance(obj, Script):
        raise TypeError(f'expected a Script or PulseProgram, got {type(obj).__name__}')
    return format_script(obj)
