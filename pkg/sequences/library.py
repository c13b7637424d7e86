"""Gate and sequence library for the electron-nuclear register."""

import itertools
import math

import attrs

from pulses.shapes import make_rect, make_sinc
from spinmodel.hamiltonians import electron_carrier, parse_state_string, resolved_spins
from spinmodel.params import DriveParams
from spinreg.exceptions import ConfigError, DimensionError, SequenceError

from .program import (
    MW, READOUT, RF, Barrier, ConditionalPhase, Delay, Noisy, Pulse, PulseProgram,
    Repeat, Reset, Rotation, Simultaneous,
)

X_PHASE = 0.0
Y_PHASE = math.pi / 2

DD_FAMILIES = ('xy', 'xy8', 'cpmg')
_DD_CELLS = {
    'xy': (X_PHASE, Y_PHASE),
    'xy8': (X_PHASE, Y_PHASE, X_PHASE, Y_PHASE, Y_PHASE, X_PHASE, Y_PHASE, X_PHASE),
    'cpmg': (X_PHASE,),
}

CONTROL_STATES = ('up', 'down')


def geometric_phase(detuning, omega_r):
    """Phase picked up by a full electron rotation driven at ``detuning``."""
    if not omega_r > 0:
        raise ConfigError(f'Rabi frequency must be > 0, got {omega_r}')
    return math.pi * (1 - detuning / math.hypot(detuning, omega_r))


def mw_pulse(envelope, phase=None, carrier=None):
    if phase is not None:
        envelope = envelope.shifted(phase=phase)
    return Pulse(MW, envelope, carrier=carrier)


def _check_spin(params, i):
    if not 0 <= i < params.K:
        raise DimensionError(f'spin index {i} outside register of {params.K} spins')


def xy_dd_block(tau, n_pulses, pi_pulse, family='xy'):
    """[tau/2 - pi - tau/2] blocks; the xy family alternates x and y pulses."""
    if family not in DD_FAMILIES:
        raise SequenceError(f'unknown decoupling family {family!r}; choose one of {", ".join(DD_FAMILIES)}')
    if n_pulses < 1:
        raise SequenceError(f'a decoupling block needs at least one pulse, got {n_pulses}')
    if tau <= pi_pulse.duration:
        raise SequenceError(
            f'inter-pulse spacing {tau:.6g} s is shorter than the pi pulse ({pi_pulse.duration:.6g} s)'
        )
    cell = _DD_CELLS[family]
    blocks = [
        (Delay(tau / 2), mw_pulse(pi_pulse, phase=phase), Delay(tau / 2))
        for phase in cell
    ]
    repeats, remainder = divmod(n_pulses, len(cell))
    elements = []
    body = tuple(itertools.chain.from_iterable(blocks))
    if repeats > 1:
        elements.append(Repeat(repeats, body))
    elif repeats == 1:
        elements.extend(body)
    for block in blocks[:remainder]:
        elements.extend(block)
    return PulseProgram(elements)


def conditional_rotation(tau, n, pi_pulse, family='xy'):
    """Decoupling block read as an electron-conditioned nuclear rotation."""
    return xy_dd_block(tau, n, pi_pulse, family=family)


def quarter_turn(params, half_pi_pulse):
    """Free precession that turns the nuclei by pi/2 about z between the two
    conditional rotations; the pi/2 pulse in between counts towards it."""
    return max(math.pi / (2 * params.omega_L_n) - half_pi_pulse.duration, 0.0)


def nuclear_init_sequence(tau_init, n, pi_pulse, half_pi_pulse, params=None, free_precession=None,
                          family='xy'):
    """Swap the electron polarization onto the spin resonant at ``tau_init``.

    pi/2_x, R(tau, N), pi/2_y, free precession, R(tau, N), electron reset. The
    free precession supplies the unconditional z rotation; by default it is a
    quarter turn at the nuclear Larmor frequency of ``params``.
    """
    if free_precession is None:
        if params is None:
            raise ConfigError('the free precession needs either an explicit value or the register')
        free_precession = quarter_turn(params, half_pi_pulse)
    if free_precession < 0:
        raise ConfigError(f'free precession must be >= 0, got {free_precession}')
    rotation = list(conditional_rotation(tau_init, n, pi_pulse, family))
    elements = [mw_pulse(half_pi_pulse, phase=X_PHASE)] + rotation + [mw_pulse(half_pi_pulse, phase=Y_PHASE)]
    if free_precession > 0:
        elements.append(Delay(free_precession))
    elements += rotation + [Reset()]
    return PulseProgram(elements)


def _line_states(params, bandwidth, fixed):
    resolved = resolved_spins(params, bandwidth)
    if not resolved:
        raise SequenceError(f'a {bandwidth / 1e3:g} kHz band resolves no nuclear spin')
    missing = [i for i in fixed if i not in resolved]
    if missing:
        names = ', '.join(f'n{i + 1}' for i in missing)
        raise SequenceError(f'spin(s) {names} are not resolved by a {bandwidth / 1e3:g} kHz band')
    free = [i for i in resolved if i not in fixed]
    for signs in itertools.product((1, -1), repeat=len(free)):
        states = dict(fixed)
        states.update(zip(free, signs))
        yield dict(sorted(states.items()))


def electron_lines(params, bandwidth, fixed=None):
    """Carrier detunings of every electron line consistent with ``fixed`` nuclear states."""
    return [electron_carrier(params, states) for states in _line_states(params, bandwidth, fixed or {})]


def cn_not_e(i, control_state, bandwidth, params, angle=math.pi):
    """Sinc pi pulses on every electron line with spin ``i`` in ``control_state``."""
    _check_spin(params, i)
    if control_state not in CONTROL_STATES:
        raise ConfigError(f'control state must be up or down, got {control_state!r}')
    sign = 1 if control_state == 'up' else -1
    envelope = make_sinc(bandwidth, angle)
    return PulseProgram(
        Pulse(MW, envelope, carrier=params.omega_L_e + detuning)
        for detuning in electron_lines(params, bandwidth, {i: sign})
    )


def sinc_all_lines(params, bandwidth, angle):
    """One sinc pulse per electron line of the resolved spins."""
    envelope = make_sinc(bandwidth, angle)
    return PulseProgram(
        Pulse(MW, envelope, carrier=params.omega_L_e + detuning)
        for detuning in electron_lines(params, bandwidth)
    )


def ce_not_n(i, control_state, omega_r, params):
    """Rect RF pi pulse on the nuclear line of spin ``i`` for the given electron state."""
    _check_spin(params, i)
    if control_state not in CONTROL_STATES:
        raise ConfigError(f'control state must be up or down, got {control_state!r}')
    return PulseProgram([Pulse(RF, make_rect(omega_r, math.pi), target=i, condition=control_state)])


def rf_rotation(target, angle, omega_r, phase=0.0, condition=None):
    """Nuclear rotation; unconditional rotations drive both electron-conditioned lines at once."""
    envelope = make_rect(omega_r, angle, phase=phase)
    if condition is not None:
        return Pulse(RF, envelope, target=target, condition=condition)
    return Simultaneous([
        Pulse(RF, envelope, target=target, condition='up'),
        Pulse(RF, envelope, target=target, condition='down'),
    ])


def _merge(blocks):
    pulses = []
    for block in blocks:
        pulses.extend(block.pulses if isinstance(block, Simultaneous) else [block])
    return Simultaneous(pulses)


def cphase_gate(condition, bandwidth, params, ideal=False):
    """Electron 2pi rotation on the line picked by ``condition``.

    ``condition`` is a state string (``d1d2u3``) or an index -> sign mapping and
    must fix every spin the band resolves.
    """
    states = parse_state_string(condition, params) if isinstance(condition, str) else dict(condition)
    for i in states:
        _check_spin(params, i)
    resolved = set(resolved_spins(params, bandwidth))
    unresolved = sorted(set(states) - resolved)
    if unresolved:
        names = ', '.join(f'n{i + 1}' for i in unresolved)
        raise SequenceError(f'condition references spin(s) {names} not resolved at {bandwidth / 1e3:g} kHz')
    open_spins = sorted(resolved - set(states))
    if open_spins:
        names = ', '.join(f'n{i + 1}' for i in open_spins)
        raise SequenceError(f'condition leaves resolved spin(s) {names} unspecified')
    if ideal:
        return PulseProgram([ConditionalPhase(states)])
    envelope = make_sinc(bandwidth, 2 * math.pi)
    return PulseProgram([Pulse(MW, envelope, carrier=params.omega_L_e + electron_carrier(params, states))])


BASES = ('z', 'x', 'y')
_BASIS_PHASE = {'x': Y_PHASE, 'y': math.pi}


@attrs.frozen
class BellOptions:
    ideal: bool = True
    condition: str | None = None
    bandwidth: float = 150e3
    cphase_fidelity: float = 1.0
    readout_basis: str = attrs.field(default='z', validator=attrs.validators.in_(BASES))
    drive: DriveParams = attrs.Factory(DriveParams)

    def condition_for(self, params):
        if self.condition:
            return self.condition
        return 'd1d2u3' if params.K >= 3 else 'd1d2'


def bell_circuit(params, options=None):
    """pi/2 on n1 and n2, CPhase, pi/2 on n1, then optional readout-basis rotations."""
    options = options or BellOptions()
    if params.K < 2:
        raise DimensionError(f'the Bell circuit needs two nuclear spins, register has {params.K}')

    def rotate(targets, phase):
        if options.ideal:
            return [Rotation(t, math.pi / 2, phase) for t in targets]
        return [_merge(rf_rotation(t, math.pi / 2, options.drive.rf(t), phase=phase) for t in targets)]

    gate = list(cphase_gate(options.condition_for(params), options.bandwidth, params, ideal=options.ideal))
    if options.cphase_fidelity < 1:
        gate = [Noisy(options.cphase_fidelity, gate)]
    elements = rotate((0, 1), Y_PHASE) + gate + rotate((0,), Y_PHASE)
    if options.readout_basis != 'z':
        elements += rotate((0, 1), _BASIS_PHASE[options.readout_basis])
    return PulseProgram(elements)


def sedor_sequence(sensor, target, tau, params, drive=None, readout=True, condition='down'):
    """Echo on ``sensor`` with a simultaneous pi on ``target`` at the refocusing point.

    ``tau`` is each free-evolution half; with readout the sensor's <sigma_z>
    follows cos(C tau).
    """
    drive = drive or DriveParams()
    _check_spin(params, sensor)
    _check_spin(params, target)
    if sensor == target:
        raise SequenceError('SEDOR needs distinct sensor and target spins')
    elements = [
        rf_rotation(sensor, math.pi / 2, drive.rf(sensor), Y_PHASE, condition),
        Delay(tau),
        _merge([
            rf_rotation(sensor, math.pi, drive.rf(sensor), X_PHASE, condition),
            rf_rotation(target, math.pi, drive.rf(target), X_PHASE, condition),
        ]),
        Delay(tau),
    ]
    elements.append(Barrier(READOUT))
    if readout:
        elements.append(rf_rotation(sensor, math.pi / 2, drive.rf(sensor), -Y_PHASE, condition))
    return PulseProgram(elements)
