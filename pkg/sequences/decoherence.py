"""Post-hoc coherence envelopes applied once per program."""

import math

import numpy as np

from spinreg.exceptions import ConfigError


def decoherence_time(params, n_pulses):
    """tau_c = tau_c0 * N^(chi - 1) with N = max(n_pulses, 1)."""
    n = max(int(n_pulses), 1)
    return params.tau_c0 * n ** (params.chi - 1)


def coherence_time(params, n_pulses):
    """Decay time in total evolution time, tau_c0 * N^chi."""
    return max(int(n_pulses), 1) * decoherence_time(params, n_pulses)


def coherence_factor(elapsed, tau_c, beta):
    if elapsed < 0:
        raise ConfigError(f'elapsed time must be >= 0, got {elapsed}')
    if math.isinf(tau_c) or elapsed == 0:
        return 1.0
    return math.exp(-((elapsed / tau_c) ** beta))


def apply_decoherence_envelope(rho, elapsed, n_pulses, params):
    """Scale the electron off-diagonal blocks by exp(-(elapsed / tau_c)^beta)."""
    factor = coherence_factor(elapsed, decoherence_time(params, n_pulses), params.beta)
    rho = np.array(rho, dtype=complex)
    half = rho.shape[0] // 2
    rho[:half, half:] *= factor
    rho[half:, :half] *= factor
    return rho


def _bit_columns(n_qubits):
    indices = np.arange(2 ** n_qubits)
    return (indices[:, None] >> np.arange(n_qubits - 1, -1, -1)[None, :]) & 1


def apply_nuclear_dephasing(rho, elapsed, params):
    """Per-spin exp(-(t / T2*)^beta) on nuclear coherences; spins without T2* are skipped."""
    rho = np.array(rho, dtype=complex)
    bits = _bit_columns(params.n_qubits)
    for i, spin in enumerate(params.spins):
        if not spin.t2_star:
            continue
        factor = coherence_factor(elapsed, spin.t2_star, params.beta)
        column = bits[:, 1 + i]
        rho[column[:, None] != column[None, :]] *= factor
    return rho
