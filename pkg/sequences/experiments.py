"""Standard experiments as lists of pulse programs plus the observable each reads."""

import logging
import math

import attrs

from measurement.bell import (
    BELL_COEFFICIENTS, bell_fidelity, correlators_from_populations, correlators_from_state,
    readout_populations,
)
from measurement.readout import electron_populations, normalized_readout
from pulses.shapes import RECT, Envelope, make_rect
from spinmodel.hamiltonians import initial_density_matrix
from spinmodel.params import DriveParams, Frame
from spinmodel.presets import LOW_POWER_RABI
from spinreg.exceptions import ConfigError, UnknownExperimentError

from .engine import propagate, spin_expectations
from .library import (
    Y_PHASE, BellOptions, bell_circuit, mw_pulse, nuclear_init_sequence,
    sedor_sequence, sinc_all_lines, xy_dd_block,
)
from .program import MW, READOUT, RF, Barrier, Delay, Pulse, PulseProgram, Rotation

logger = logging.getLogger(__name__)

KINDS = (
    'ramsey', 'hahn', 'cpmg', 'xy', 'rabi', 'low_power_rabi',
    'nuclear_ramsey', 'nuclear_rabi', 'nuclear_init', 'sinc_amplitude', 'sedor',
)


@attrs.frozen
class ExperimentPlan:
    kind: str
    x: tuple = attrs.field(converter=tuple)
    programs: tuple = attrs.field(converter=tuple)
    observable: str = 'sz_e'
    nuclear_state: tuple | None = None

    def initial_state(self, params):
        return initial_density_matrix(params, self.nuclear_state)


def _electron_pulses(drive):
    pi = make_rect(drive.mw_rabi, math.pi)
    half = make_rect(drive.mw_rabi, math.pi / 2)
    return pi, half


def _echo_family(tau, half, pi, n, family, projection):
    return PulseProgram(
        [mw_pulse(half, phase=Y_PHASE)]
        + list(xy_dd_block(tau, n, pi, family))
        + [Barrier(READOUT), mw_pulse(half, phase=Y_PHASE if projection > 0 else -Y_PHASE)]
    )


def _ramsey(tau, options, drive):
    detuning = options.get('detuning', 0.0)
    half = make_rect(options.get('rabi', drive.mw_rabi), math.pi / 2, carrier_detuning=detuning)
    return PulseProgram([
        mw_pulse(half, phase=Y_PHASE), Delay(tau), Barrier(READOUT), mw_pulse(half, phase=Y_PHASE),
    ])


def _rabi(duration, options, default_rabi):
    if duration <= 0:
        return PulseProgram([Barrier(READOUT)])
    envelope = Envelope(RECT, duration, options.get('rabi', default_rabi),
                        carrier_detuning=options.get('detuning', 0.0))
    return PulseProgram([Pulse(MW, envelope), Barrier(READOUT)])


def _branch_prefix(branch):
    if branch not in ('up', 'down'):
        raise ConfigError(f'electron branch must be up or down, got {branch!r}')
    return [Rotation(None, math.pi)] if branch == 'up' else []


def _nuclear_ramsey(tau, options, drive):
    target = options.get('target', 0)
    branch = options.get('branch', 'down')
    half = make_rect(drive.rf(target), math.pi / 2, carrier_detuning=options.get('detuning', 0.0))
    pulse = Pulse(RF, half.shifted(phase=Y_PHASE), target=target, condition=branch)
    return PulseProgram(_branch_prefix(branch) + [pulse, Delay(tau), Barrier(READOUT), pulse])


def _nuclear_rabi(duration, options, drive):
    target = options.get('target', 0)
    branch = options.get('branch', 'down')
    prefix = _branch_prefix(branch)
    if duration <= 0:
        return PulseProgram(prefix + [Barrier(READOUT)])
    envelope = Envelope(RECT, duration, options.get('rabi', drive.rf(target)))
    return PulseProgram(prefix + [Pulse(RF, envelope, target=target, condition=branch), Barrier(READOUT)])


def experiment_plan(kind, sweep, params, drive=None, **options):
    """Programs for every sweep value of ``kind``; ``options`` tune the experiment."""
    if kind not in KINDS:
        raise UnknownExperimentError(f'unknown experiment {kind!r}; choose one of {", ".join(KINDS)}')
    sweep = tuple(float(value) for value in sweep)
    if not sweep:
        raise ConfigError('sweep must contain at least one value')
    drive = drive or DriveParams()
    pi, half = _electron_pulses(drive)
    target = options.get('target', 0)
    nuclear_state = None
    observable = 'sz_e'

    if kind == 'ramsey':
        programs = [_ramsey(tau, options, drive) for tau in sweep]
    elif kind == 'hahn':
        programs = [_echo_family(2 * tau, half, pi, 1, 'xy', 1) for tau in sweep]
    elif kind in ('cpmg', 'xy'):
        family = options.get('family', 'cpmg' if kind == 'cpmg' else 'xy')
        n = int(options.get('n', 32 if kind == 'cpmg' else 48))
        projection = options.get('projection', 1)
        programs = [_echo_family(tau, half, pi, n, family, projection) for tau in sweep]
    elif kind == 'rabi':
        programs = [_rabi(d, options, drive.mw_rabi) for d in sweep]
    elif kind == 'low_power_rabi':
        programs = [_rabi(d, options, LOW_POWER_RABI) for d in sweep]
    elif kind == 'nuclear_ramsey':
        programs = [_nuclear_ramsey(tau, options, drive) for tau in sweep]
        nuclear_state, observable = _polarized(params, target), f'sz_n{target + 1}'
    elif kind == 'nuclear_rabi':
        programs = [_nuclear_rabi(d, options, drive) for d in sweep]
        nuclear_state, observable = _polarized(params, target), f'sz_n{target + 1}'
    elif kind == 'nuclear_init':
        n = int(options.get('n', 24))
        free = options.get('free_precession')
        programs = [nuclear_init_sequence(tau, n, pi, half, params, free) for tau in sweep]
        observable = f'sz_n{target + 1}'
    elif kind == 'sinc_amplitude':
        bandwidth = options.get('bandwidth', 500e3)
        programs = [
            sinc_all_lines(params, bandwidth, a) + [Barrier(READOUT)] if a > 0 else PulseProgram([Barrier(READOUT)])
            for a in sweep
        ]
        observable = 'inversion'
    else:
        sensor = options.get('sensor', 0)
        programs = [
            sedor_sequence(sensor, target, tau, params, drive, condition=options.get('condition', 'down'))
            for tau in sweep
        ]
        nuclear_state, observable = _polarized(params, sensor), f'sz_n{sensor + 1}'
    return ExperimentPlan(kind, sweep, programs, observable, nuclear_state)


def standard_experiments(kind, sweep, params, drive=None, **options):
    """One program per sweep value."""
    return list(experiment_plan(kind, sweep, params, drive, **options).programs)


def _polarized(params, index):
    if not 0 <= index < params.K:
        raise ConfigError(f'spin n{index + 1} not in register of {params.K} spins')
    return tuple('up' if i == index else 'mixed' for i in range(params.K))


def observable_value(name, rho, params, counter=None):
    """Scalar observable of a final state: sz_e, sz_n<i>, p_down, normalized or inversion."""
    if name.startswith('sz_'):
        values = spin_expectations(rho, params.K)
        if name not in values:
            raise ConfigError(f'unknown observable {name!r}')
        return values[name]
    _, p_down = electron_populations(rho)
    if name == 'p_down':
        return p_down
    if name == 'normalized':
        return normalized_readout(p_down, params.f_e, counter)
    if name == 'inversion':
        return 1 - normalized_readout(p_down, params.f_e, counter)
    raise ConfigError(f'unknown observable {name!r}')


def run_plan(plan, params, frame=None, max_dt=None, decoherence=True):
    """Evaluate ``plan`` point by point; returns the observable values in sweep order."""
    frame = frame or Frame.exact(params)
    rho0 = plan.initial_state(params)
    values = []
    for program in plan.programs:
        result = propagate(program, params, frame, rho0, max_dt=max_dt, decoherence=decoherence)
        values.append(observable_value(plan.observable, result.final_state, params))
    logger.info('%s: %d points evaluated', plan.kind, len(values))
    return values


@attrs.frozen
class BellReport:
    populations: dict
    correlators: object
    fidelity: float
    state_fidelity: float


def simulate_bell(params, options=None, frame=None, readout_fidelity=None, decoherence=False, max_dt=None):
    """Run the Bell circuit in the z, x and y readout settings and score the result.

    ``readout_fidelity`` (per spin) misassigns populations symmetrically before
    the correlators are formed.
    """
    options = options or BellOptions()
    frame = frame or Frame.fast(params)
    rho0 = initial_density_matrix(params, ['up'] * params.K)
    fidelities = None if readout_fidelity is None else (readout_fidelity, readout_fidelity)
    populations = {}
    state_fidelity = None
    for basis in ('z', 'x', 'y'):
        program = bell_circuit(params, attrs.evolve(options, readout_basis=basis))
        rho = propagate(program, params, frame, rho0, max_dt=max_dt, decoherence=decoherence).final_state
        populations[basis] = readout_populations(rho, (0, 1), fidelities)
        if basis == 'z':
            state_fidelity = bell_fidelity(correlators_from_state(rho), BELL_COEFFICIENTS['psi_plus'])
    correlators = correlators_from_populations(populations['z'], populations['x'], populations['y'])
    return BellReport(
        populations=populations,
        correlators=correlators,
        fidelity=bell_fidelity(correlators, BELL_COEFFICIENTS['psi_plus']),
        state_fidelity=state_fidelity,
    )
