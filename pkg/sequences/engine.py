"""
Time evolution of pulse programs.

Every drive is written in the frame's rotating picture. A tone with carrier
detuning delta on a channel whose sigma_z commutes with the static Hamiltonian
is integrated in a frame co-rotating with the tone, which keeps rectangular
pulses exact at any detuning:

    U = exp(-i delta T sz / 2) * prod_k exp(-i (H0 - delta sz / 2 + D_k) dt)

Other drives (multi-tone blocks, RF in a lab nuclear frame) are stepped
piecewise with the tone phase evaluated at each step midpoint. Tone phases
follow a coherent local oscillator: a pulse starting at t0 with phase phi
carries phase phi + delta * t0.
"""

import logging
import math

import attrs
import numpy as np
from django.conf import settings

from linalg.operators import (
    SIGMA_X, SIGMA_Y, SIGMA_Z, check_density_matrix, dagger, eigh, embed,
    expm_hermitian, expm_hermitian_batch, expectation, kron, ordered_product,
    partial_trace,
)
from pulses.shapes import RECT, default_max_dt, sample
from spinmodel.hamiltonians import (
    ELECTRON, build_static_hamiltonian, electron_state, mw_drive_hamiltonian,
    nuclear_qubit, rf_drive_hamiltonian, rf_resonance_frequencies,
)
from spinmodel.params import TWO_PI
from spinreg.exceptions import DimensionError, SequenceError

from .decoherence import apply_decoherence_envelope, apply_nuclear_dephasing
from .program import (
    MW, READOUT, Barrier, ConditionalPhase, Delay, Measure, Noisy, Pulse,
    PulseProgram, Repeat, Reset, Rotation, Simultaneous, is_pi_pulse,
)

logger = logging.getLogger(__name__)


@attrs.define
class EvolutionResult:
    final_state: np.ndarray
    wall_time_simulated: float
    pulse_count: int
    total_pulses: int = 0
    records: list = attrs.Factory(list)


@attrs.define
class _Step:
    unitary: np.ndarray
    duration: float
    pi_pulses: int
    pulses: int


def spin_expectations(rho, n_spins):
    """<sigma_z> of the electron and every nuclear spin, keyed sz_e, sz_n1, ..."""
    n_qubits = 1 + n_spins
    values = {'sz_e': expectation(rho, embed(SIGMA_Z, ELECTRON, n_qubits))}
    for i in range(n_spins):
        values[f'sz_n{i + 1}'] = expectation(rho, embed(SIGMA_Z, nuclear_qubit(i), n_qubits))
    return values


def rotation_unitary(target, angle, phase, n_qubits):
    axis = math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y
    single = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * axis
    qubit = ELECTRON if target is None else nuclear_qubit(target)
    return embed(single, qubit, n_qubits)


def conditional_phase_diagonal(states, n_qubits):
    """+-1 diagonal: -1 where every listed nuclear spin matches its sign."""
    indices = np.arange(2 ** n_qubits)
    match = np.ones(indices.shape, dtype=bool)
    for i, sign in states:
        qubit = nuclear_qubit(i)
        if not 0 < qubit < n_qubits:
            raise DimensionError(f'conditional phase references missing spin n{i + 1}')
        bit = (indices >> (n_qubits - 1 - qubit)) & 1
        match &= bit == (0 if sign > 0 else 1)
    return np.where(match, -1.0, 1.0).astype(complex)


def _is_unitary(element):
    if isinstance(element, (Reset, Measure, Noisy)):
        return False
    if isinstance(element, Barrier):
        return element.label != READOUT
    if isinstance(element, Repeat):
        return all(_is_unitary(child) for child in element.body)
    return True


class Propagator:
    """Evolves density matrices under one register, frame and step policy."""

    def __init__(self, params, frame, max_dt=None, decoherence=True, nuclear_dephasing=False):
        frame.check(params)
        if max_dt is not None and not max_dt > 0:
            raise SequenceError(f'max_dt must be > 0, got {max_dt}')
        self.params = params
        self.frame = frame
        self.max_dt = max_dt
        self.decoherence = decoherence
        self.nuclear_dephasing = nuclear_dephasing
        self.n_qubits = params.n_qubits
        self.h0 = build_static_hamiltonian(params, frame)
        self._w0, self._v0 = eigh(self.h0)
        self._spread = float(self._w0[-1] - self._w0[0]) / TWO_PI
        self._commutes = {}
        self._cache = {}
        self.check_states = getattr(settings, 'SPINREG', {}).get('CHECK_STATES', True)

    # static pieces

    def free(self, tau):
        return (self._v0 * np.exp(-1j * self._w0 * tau)) @ dagger(self._v0)

    def _qubit(self, pulse):
        return ELECTRON if pulse.channel == MW else nuclear_qubit(pulse.target)

    def _reference(self, pulse):
        return self.frame.electron_ref if pulse.channel == MW else self.frame.nuclear_refs[pulse.target]

    def resonances(self, i):
        """Electron-conditioned nuclear lines (up, down) as seen in this frame."""
        if self.frame.secular:
            spin = self.params.spins[i]
            return self.params.omega_L_n + spin.a_par / 2, self.params.omega_L_n - spin.a_par / 2
        return rf_resonance_frequencies(self.params, i)

    def carrier(self, pulse):
        if pulse.carrier is not None:
            return pulse.carrier
        if pulse.channel == MW:
            return self.frame.electron_ref + pulse.envelope.carrier_detuning
        up, down = self.resonances(pulse.target)
        return (up if pulse.condition == 'up' else down) + pulse.envelope.carrier_detuning

    def detuning(self, pulse):
        return self.carrier(pulse) - self._reference(pulse)

    def _commutes_with(self, qubit):
        if qubit not in self._commutes:
            sz = embed(SIGMA_Z, qubit, self.n_qubits)
            scale = max(np.max(np.abs(self.h0)), 1.0)
            self._commutes[qubit] = bool(np.max(np.abs(self.h0 @ sz - sz @ self.h0)) < 1e-12 * scale)
        return self._commutes[qubit]

    def _drive(self, pulse, rabi, phase):
        if pulse.channel == MW:
            return mw_drive_hamiltonian(rabi, phase, self.n_qubits)
        return rf_drive_hamiltonian(pulse.target, rabi, phase, self.n_qubits)

    def _step_size(self, duration, max_delta):
        if self.max_dt:
            return self.max_dt
        return default_max_dt(duration, self._spread + max_delta / TWO_PI)

    # pulses

    def _tone(self, pulse, t0):
        delta = self.detuning(pulse)
        offset = math.fmod(delta * t0, TWO_PI)
        key = (pulse, round(offset, 12))
        if key in self._cache:
            return self._cache[key]
        qubit = self._qubit(pulse)
        if self._commutes_with(qubit):
            unitary = self._co_rotating(pulse, qubit, delta, offset)
        else:
            unitary = self._piecewise((pulse,), t0)
        self._cache[key] = unitary
        return unitary

    def _co_rotating(self, pulse, qubit, delta, offset):
        env = pulse.envelope
        sz_diag = np.diag(embed(SIGMA_Z, qubit, self.n_qubits)).real
        h_frame = self.h0 - delta / 2 * np.diag(sz_diag)
        if env.kind == RECT:
            u = expm_hermitian(h_frame + self._drive(pulse, env.peak_rabi, env.phase + offset), env.duration)
        else:
            steps = sample(env, self._step_size(env.duration, abs(delta)))
            hs = np.stack([
                h_frame + self._drive(pulse, rabi, phase + offset)
                for rabi, phase in zip(steps.rabi, steps.phase)
            ])
            u = ordered_product(expm_hermitian_batch(hs, steps.dt))
        frame_turn = np.exp(-1j * delta * env.duration / 2 * sz_diag)
        return frame_turn[:, None] * u

    def _piecewise(self, pulses, t0):
        duration = max(pulse.duration() for pulse in pulses)
        tones = [(pulse, self.detuning(pulse)) for pulse in pulses]
        max_delta = max(abs(delta) for _, delta in tones)
        n_steps = max(1, math.ceil(duration / self._step_size(duration, max_delta) - 1e-9))
        dt = duration / n_steps
        edges = np.linspace(0.0, duration, n_steps + 1)
        mids = (edges[:-1] + edges[1:]) / 2
        hs = np.repeat(self.h0[None, :, :], n_steps, axis=0)
        for pulse, delta in tones:
            env = pulse.envelope
            clipped = np.minimum(edges, env.duration)
            signed = np.diff(env.primitive(clipped)) / dt
            qubit = self._qubit(pulse)
            for k in np.nonzero(signed)[0]:
                phase = env.phase + delta * (t0 + mids[k])
                axis = math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y
                hs[k] = hs[k] + embed(signed[k] / 2 * axis, qubit, self.n_qubits)
        return ordered_product(expm_hermitian_batch(hs, dt))

    # elements

    def _time_invariant(self, elements):
        """True when no tone in ``elements`` carries a detuning-dependent phase."""
        for element in elements:
            if isinstance(element, Pulse) and self.detuning(element) != 0:
                return False
            if isinstance(element, Simultaneous) and any(self.detuning(p) != 0 for p in element.pulses):
                return False
            if isinstance(element, Repeat) and not self._time_invariant(element.body):
                return False
        return True

    def step(self, element, t0):
        """Unitary, duration and pulse counts of a unitary element starting at t0."""
        dim = 2 ** self.n_qubits
        if isinstance(element, Delay):
            return _Step(self.free(element.tau), element.tau, 0, 0)
        if isinstance(element, Pulse):
            return _Step(self._tone(element, t0), element.duration(), int(is_pi_pulse(element)), 1)
        if isinstance(element, Simultaneous):
            if len(element.pulses) == 1:
                return self.step(element.pulses[0], t0)
            unitary = self._piecewise(element.pulses, t0)
            pi = int(any(is_pi_pulse(p) for p in element.pulses))
            return _Step(unitary, element.duration(), pi, len(element.pulses))
        if isinstance(element, Rotation):
            if element.target is not None and element.target >= self.params.K:
                raise SequenceError(f'rotation target n{element.target + 1} not in register')
            unitary = rotation_unitary(element.target, element.angle, element.phase, self.n_qubits)
            return _Step(unitary, 0.0, int(is_pi_pulse(element)), 0)
        if isinstance(element, ConditionalPhase):
            return _Step(np.diag(conditional_phase_diagonal(element.states, self.n_qubits)), 0.0, 0, 0)
        if isinstance(element, Barrier):
            return _Step(np.eye(dim, dtype=complex), 0.0, 0, 0)
        if isinstance(element, Repeat):
            body = self.sequence(element.body, t0)
            if self._time_invariant(element.body):
                unitary = np.linalg.matrix_power(body.unitary, element.n)
            else:
                unitary = body.unitary
                for r in range(1, element.n):
                    unitary = self.sequence(element.body, t0 + r * body.duration).unitary @ unitary
            return _Step(unitary, element.n * body.duration, element.n * body.pi_pulses, element.n * body.pulses)
        raise SequenceError(f'{type(element).__name__} is not a unitary element')

    def sequence(self, elements, t0):
        dim = 2 ** self.n_qubits
        total = _Step(np.eye(dim, dtype=complex), 0.0, 0, 0)
        for element in elements:
            part = self.step(element, t0 + total.duration)
            total = _Step(part.unitary @ total.unitary, total.duration + part.duration,
                          total.pi_pulses + part.pi_pulses, total.pulses + part.pulses)
        return total

    # density matrices

    def run(self, program, rho0, record=False):
        rho0 = check_density_matrix(rho0)
        if rho0.shape[0] != 2 ** self.n_qubits:
            raise DimensionError(
                f'initial state of dimension {rho0.shape[0]} does not match register dimension '
                f'{2 ** self.n_qubits}'
            )
        for target in program.rf_targets():
            if target >= self.params.K:
                raise SequenceError(f'RF target n{target + 1} not in register of {self.params.K} spins')
        logger.debug('propagating %d elements over %.6g s', len(program), program.duration())
        state = _State(rho=rho0, record=record)
        for element in program:
            self._apply(element, state)
            if self.check_states:
                check_density_matrix(state.rho)
            if record:
                state.snapshot(self.params.K, type(element).__name__.lower())
        if not state.decohered:
            self._decohere(state)
        return EvolutionResult(
            final_state=state.rho,
            wall_time_simulated=state.t,
            pulse_count=state.pi_pulses,
            total_pulses=state.pulses,
            records=state.records,
        )

    def _decohere(self, state):
        state.decohered = True
        if not self.decoherence:
            return
        # the envelope is indexed by the spacing between pi pulses
        spacing = state.t / max(state.pi_pulses, 1)
        state.rho = apply_decoherence_envelope(state.rho, spacing, state.pi_pulses, self.params)
        if self.nuclear_dephasing:
            state.rho = apply_nuclear_dephasing(state.rho, state.t, self.params)

    def _apply(self, element, state):
        if _is_unitary(element):
            part = self.step(element, state.t)
            state.rho = part.unitary @ state.rho @ dagger(part.unitary)
            state.advance(part)
        elif isinstance(element, Repeat):
            for _ in range(element.n):
                for child in element.body:
                    self._apply(child, state)
        elif isinstance(element, Noisy):
            if not all(_is_unitary(child) for child in element.body):
                raise SequenceError('a noisy block may only hold unitary elements')
            part = self.sequence(element.body, state.t)
            idle = self.free(part.duration)
            state.rho = (element.fidelity * (part.unitary @ state.rho @ dagger(part.unitary))
                         + (1 - element.fidelity) * (idle @ state.rho @ dagger(idle)))
            state.advance(part)
        elif isinstance(element, Reset):
            state.rho = self.reset_electron(state.rho)
        elif isinstance(element, Measure):
            state.snapshot(self.params.K, element.label or 'measure')
        elif isinstance(element, Barrier):
            if not state.decohered:
                self._decohere(state)

    def reset_electron(self, rho):
        electron = electron_state(self.params.f_e)
        if self.params.K == 0:
            return electron.astype(complex)
        nuclear = partial_trace(rho, list(range(1, self.n_qubits)), [2] * self.n_qubits)
        return kron(electron, nuclear)


@attrs.define
class _State:
    rho: np.ndarray
    record: bool = False
    t: float = 0.0
    pi_pulses: int = 0
    pulses: int = 0
    decohered: bool = False
    records: list = attrs.Factory(list)

    def advance(self, part):
        self.t += part.duration
        self.pi_pulses += part.pi_pulses
        self.pulses += part.pulses

    def snapshot(self, n_spins, label):
        entry = {'t': self.t, 'label': label}
        entry.update(spin_expectations(self.rho, n_spins))
        self.records.append(entry)


def propagate(program, params, frame, rho0, max_dt=None, decoherence=True,
              nuclear_dephasing=False, record=False):
    """Evolve ``rho0`` through ``program``; decoherence is applied once, at the
    first ``readout`` barrier or at the end of the program.

    The envelope sees the mean pi-pulse spacing (elapsed time over the pulse
    count N), so the coherence time measured in total evolution time scales
    as tau_c0 * N^chi.
    """
    if not isinstance(program, PulseProgram):
        program = PulseProgram(program)
    propagator = Propagator(params, frame, max_dt=max_dt, decoherence=decoherence,
                            nuclear_dephasing=nuclear_dephasing)
    return propagator.run(program, rho0, record=record)


def program_unitary(program, params, frame, max_dt=None):
    """Total unitary of a program built from unitary elements only."""
    if not isinstance(program, PulseProgram):
        program = PulseProgram(program)
    for element in program:
        if not _is_unitary(element):
            raise SequenceError(f'{type(element).__name__} has no unitary representation')
    return Propagator(params, frame, max_dt=max_dt).sequence(program.elements, 0.0).unitary
