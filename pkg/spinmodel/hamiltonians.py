"""Static and drive Hamiltonians of the electron-nuclear register."""

import logging
import math

import numpy as np

from linalg.operators import (
    PROJ_DOWN, PROJ_UP, SIGMA_X, SIGMA_Y, SIGMA_Z, embed, embed_pair, kron,
)
from spinreg.exceptions import ConfigError, DimensionError

from .params import TWO_PI

logger = logging.getLogger(__name__)

ELECTRON = 0


def nuclear_qubit(i):
    return 1 + i


def build_static_hamiltonian(params, frame):
    """Time-independent register Hamiltonian in ``frame``."""
    frame.check(params)
    n = params.n_qubits
    sz_e = embed(SIGMA_Z, ELECTRON, n)
    h = (params.omega_L_e - frame.electron_ref) / 2 * sz_e
    for i, spin in enumerate(params.spins):
        q = nuclear_qubit(i)
        h = h + (params.omega_L_n - frame.nuclear_refs[i]) / 2 * embed(SIGMA_Z, q, n)
        h = h + spin.a_par / 4 * embed_pair(SIGMA_Z, ELECTRON, SIGMA_Z, q, n)
        if not frame.secular or frame.nuclear_refs[i] == 0:
            h = h + spin.a_perp / 4 * embed_pair(SIGMA_Z, ELECTRON, SIGMA_X, q, n)
    for (i, j), strength in params.nn_couplings:
        h = h + strength / 4 * embed_pair(SIGMA_Z, nuclear_qubit(i), SIGMA_Z, nuclear_qubit(j), n)
    return h


def _transverse(omega_r, phase):
    return omega_r / 2 * (math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y)


def mw_drive_hamiltonian(omega_r, phase, n_qubits):
    """Omega/2 (cos phi sx + sin phi sy) on the electron."""
    if omega_r < 0:
        raise ConfigError(f'Rabi frequency must be >= 0, got {omega_r}')
    return embed(_transverse(omega_r, phase), ELECTRON, n_qubits)


def rf_drive_hamiltonian(target, omega_r, phase, n_qubits):
    """Omega/2 (cos phi sx + sin phi sy) on nuclear spin ``target``."""
    if not 0 <= target < n_qubits - 1:
        raise DimensionError(f'nuclear spin index {target} outside register of {n_qubits - 1} spins')
    if omega_r < 0:
        raise ConfigError(f'Rabi frequency must be >= 0, got {omega_r}')
    return embed(_transverse(omega_r, phase), nuclear_qubit(target), n_qubits)


def channel_sigma_z(channel_qubit, n_qubits):
    return embed(SIGMA_Z, channel_qubit, n_qubits)


def rf_resonance_frequencies(params, i):
    """(omega_up, omega_down) nuclear transition frequencies for electron up/down."""
    if not 0 <= i < params.K:
        raise DimensionError(f'nuclear spin index {i} outside register of {params.K} spins')
    spin = params.spins[i]
    up = math.hypot(params.omega_L_n + spin.a_par / 2, spin.a_perp / 2)
    down = math.hypot(params.omega_L_n - spin.a_par / 2, spin.a_perp / 2)
    return up, down


NUCLEAR_STATES = {
    'mixed': np.eye(2, dtype=complex) / 2,
    'up': PROJ_UP,
    'down': PROJ_DOWN,
}


def electron_state(f_e):
    return f_e * PROJ_DOWN + (1 - f_e) * PROJ_UP


def initial_density_matrix(params, nuclear_state=None):
    """(F_e |down><down| + (1 - F_e) |up><up|) x per-spin nuclear states."""
    nuclear_state = list(nuclear_state or ['mixed'] * params.K)
    if len(nuclear_state) != params.K:
        raise DimensionError(f'{len(nuclear_state)} nuclear states given for {params.K} spins')
    rho = electron_state(params.f_e)
    for state in nuclear_state:
        if state not in NUCLEAR_STATES:
            raise ConfigError(f'unknown nuclear state {state!r}; choose mixed, up or down')
        rho = kron(rho, NUCLEAR_STATES[state])
    return rho


def resolved_spins(params, bandwidth):
    """Spins whose electron lines a sinc band of ``bandwidth`` Hz separates.

    A line pair split by A_par falls outside a flat band of width B once
    |A_par| / 2pi > B / 2.
    """
    return [i for i, spin in enumerate(params.spins) if abs(spin.a_par) / TWO_PI > bandwidth / 2]


def electron_carrier(params, states):
    """Electron line detuning from the Larmor frequency for fixed nuclear states.

    ``states`` maps spin index to +1 (up) or -1 (down).
    """
    return sum(sign * params.spins[i].a_par / 2 for i, sign in states.items())


def parse_state_string(text, params):
    """``d1d2u3`` -> {0: -1, 1: -1, 2: +1}."""
    states = {}
    position = 0
    while position < len(text):
        letter = text[position]
        if letter not in 'ud':
            raise ConfigError(f'state string {text!r}: expected u or d at offset {position}')
        end = position + 1
        while end < len(text) and text[end].isdigit():
            end += 1
        if end == position + 1:
            raise ConfigError(f'state string {text!r}: missing spin number after {letter!r}')
        index = int(text[position + 1:end]) - 1
        if not 0 <= index < params.K:
            raise ConfigError(f'state string {text!r}: spin n{index + 1} not in register')
        if index in states:
            raise ConfigError(f'state string {text!r}: spin n{index + 1} given twice')
        states[index] = 1 if letter == 'u' else -1
        position = end
    return states


def format_state_string(states):
    return ''.join(f"{'u' if sign > 0 else 'd'}{i + 1}" for i, sign in sorted(states.items()))
