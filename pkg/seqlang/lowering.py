"""Register-aware validation of a script tree and lowering to a PulseProgram."""

import logging
import math

from pulses.shapes import make_rect, make_sinc
from sequences.library import (
    BellOptions, bell_circuit, ce_not_n, cn_not_e, cphase_gate, rf_rotation, sedor_sequence,
)
from sequences.program import (
    MW, RF, Barrier, ConditionalPhase, Delay, Measure, Noisy, Pulse, PulseProgram, Repeat,
    Reset, Rotation, Simultaneous,
)
from spinmodel.hamiltonians import parse_state_string
from spinmodel.params import DriveParams
from spinreg.exceptions import InputError, SeqlangError

from .nodes import Script

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


def _branch(condition):
    """``e:up`` -> ``up``."""
    return condition.split(':', 1)[1] if condition else None


class Lowering:
    def __init__(self, params, drive=None, filename=None):
        self.params = params
        self.drive = drive or DriveParams()
        self.filename = filename

    def fail(self, message, span):
        return SeqlangError(message, span, self.filename)

    def block(self, statements):
        elements = []
        for statement in statements:
            elements.extend(self.statement(statement))
        return elements

    def statement(self, statement):
        handler = getattr(self, f'lower_{statement.name}')
        try:
            return list(handler(statement))
        except SeqlangError as exc:
            if exc.span is None:
                raise self.fail(exc.message, statement.span) from None
            raise
        except InputError as exc:
            raise self.fail(str(exc), statement.span) from None

    def spin(self, statement, name):
        label = statement.get(name)
        try:
            return self.params.spin_index(label)
        except InputError as exc:
            raise self.fail(str(exc), statement.span_of(name)) from None

    def flag(self, statement, name, default):
        value = statement.get(name)
        return default if value is None else value == 'yes'

    def angular(self, statement, name):
        value = statement.get(name)
        return None if value is None else TWO_PI * value

    def lower_wait(self, statement):
        return [Delay(statement.get('duration'))]

    def lower_mw(self, statement):
        angle = statement.get('angle')
        shape = statement.get('shape', 'rect')
        bandwidth = statement.get('bw')
        detuning = self.angular(statement, 'detune') or 0.0
        phase = statement.get('phase', 0.0)
        if shape == 'sinc':
            if bandwidth is None:
                raise self.fail('a sinc pulse needs bw=', statement.span)
            if statement.get('rabi') is not None:
                raise self.fail('a sinc pulse takes its amplitude from the angle; drop rabi=',
                                statement.span_of('rabi'))
            envelope = make_sinc(bandwidth, angle, carrier_detuning=detuning, phase=phase)
        else:
            if bandwidth is not None:
                raise self.fail('bw= applies to sinc pulses only', statement.span_of('bw'))
            rabi = self.angular(statement, 'rabi') or self.drive.mw_rabi
            envelope = make_rect(rabi, angle, carrier_detuning=detuning, phase=phase)
        return [Pulse(MW, envelope, carrier=self.angular(statement, 'carrier'))]

    def lower_rf(self, statement):
        target = self.spin(statement, 'target')
        angle = statement.get('angle')
        phase = statement.get('phase', 0.0)
        condition = _branch(statement.get('cond'))
        rabi = self.angular(statement, 'rabi') or self.drive.rf(target)
        carrier = self.angular(statement, 'carrier')
        detuning = self.angular(statement, 'detune') or 0.0
        if carrier is None and not detuning:
            return [rf_rotation(target, angle, rabi, phase=phase, condition=condition)]
        envelope = make_rect(rabi, angle, carrier_detuning=detuning, phase=phase)
        if condition is None and carrier is None:
            return [Simultaneous([
                Pulse(RF, envelope, target=target, condition='up'),
                Pulse(RF, envelope, target=target, condition='down'),
            ])]
        return [Pulse(RF, envelope, carrier=carrier, target=target, condition=condition)]

    def lower_repeat(self, statement):
        n = statement.get('n')
        if n < 1:
            raise self.fail(f'repeat count must be >= 1, got {n}', statement.span_of('n'))
        return [Repeat(n, self.block(statement.body))]

    def lower_simul(self, statement):
        pulses = []
        for inner in statement.body:
            for element in self.statement(inner):
                if isinstance(element, Simultaneous):
                    pulses.extend(element.pulses)
                elif isinstance(element, Pulse):
                    pulses.append(element)
                else:
                    raise self.fail('simul blocks hold mw and rf pulses only', inner.span)
        if not pulses:
            raise self.fail('simul block is empty', statement.span)
        return [Simultaneous(pulses)]

    def lower_noisy(self, statement):
        return [Noisy(statement.get('fidelity'), self.block(statement.body))]

    def lower_cnnote(self, statement):
        target = self.spin(statement, 'target')
        angle = statement.get('angle', math.pi)
        return cn_not_e(target, statement.get('state'), statement.get('bw'), self.params, angle=angle)

    def lower_cenotn(self, statement):
        target = self.spin(statement, 'target')
        rabi = self.angular(statement, 'rabi') or self.drive.rf(target)
        return ce_not_n(target, statement.get('state'), rabi, self.params)

    def lower_cphase(self, statement):
        ideal = self.flag(statement, 'ideal', False)
        return cphase_gate(statement.get('cond'), statement.get('bw'), self.params, ideal=ideal)

    def lower_cz(self, statement):
        return [ConditionalPhase(parse_state_string(statement.get('cond'), self.params))]

    def lower_bell(self, statement):
        options = BellOptions(
            ideal=self.flag(statement, 'ideal', True),
            condition=statement.get('cond'),
            bandwidth=statement.get('bw', 150e3),
            cphase_fidelity=statement.get('fidelity', 1.0),
            readout_basis=statement.get('basis', 'z'),
            drive=self.drive,
        )
        return bell_circuit(self.params, options)

    def lower_sedor(self, statement):
        sensor = self.spin(statement, 'sensor')
        target = self.spin(statement, 'target')
        return sedor_sequence(
            sensor, target, statement.get('tau'), self.params, self.drive,
            readout=self.flag(statement, 'readout', True),
            condition=_branch(statement.get('cond')) or 'down',
        )

    def lower_barrier(self, statement):
        return [Barrier(statement.get('label', ''))]

    def lower_rot(self, statement):
        label = statement.get('target')
        target = None if label == 'e' else self.spin(statement, 'target')
        return [Rotation(target, statement.get('angle'), statement.get('phase', 0.0))]

    def lower_reset_e(self, statement):
        return [Reset()]

    def lower_measure_e(self, statement):
        return [Measure(statement.get('label', ''))]


def validate(script, params, drive=None):
    """Lower a parsed script to a PulseProgram for the register ``params``."""
    if not isinstance(script, Script):
        raise TypeError(f'expected a parsed Script, got {type(script).__name__}')
    lowering = Lowering(params, drive, script.filename)
    elements = lowering.block(script.statements)
    try:
        program = PulseProgram(elements)
    except InputError as exc:
        span = script.statements[0].span if script.statements else None
        raise lowering.fail(str(exc), span) from None
    logger.debug('lowered %d statements to %d elements', len(script), len(program))
    return program
