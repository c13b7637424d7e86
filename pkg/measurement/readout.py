"""Electron readout: contrast, populations and F_e normalization."""

import logging

import attrs
import numpy as np

from linalg.operators import SIGMA_Z, embed, expectation, n_qubits_of, partial_trace
from spinreg.exceptions import ConfigError

logger = logging.getLogger(__name__)


@attrs.define
class ClampCounter:
    """Counts normalized readouts that fell outside [0, 1] and were clamped."""

    count: int = 0

    def hit(self, value):
        self.count += 1
        logger.warning('normalized readout %.6g clamped to [0, 1]', value)


def electron_contrast(rho):
    """tr(rho sigma_z) on the electron."""
    return expectation(rho, embed(SIGMA_Z, 0, n_qubits_of(rho)))


def electron_populations(rho):
    """(p_up, p_down) of the electron."""
    n = n_qubits_of(rho)
    reduced = partial_trace(rho, [0], [2] * n)
    return float(reduced[0, 0].real), float(reduced[1, 1].real)


def normalized_readout(p_down, f_e, counter=None):
    """(p_down - (1 - F_e)) / (2 F_e - 1), clamped to [0, 1]."""
    if f_e == 0.5:
        raise ConfigError('F_e = 0.5: the electron cannot be initialized, readout normalization is undefined')
    if not 0.5 < f_e <= 1:
        raise ConfigError(f'F_e must lie in (0.5, 1], got {f_e}')
    value = (p_down - (1 - f_e)) / (2 * f_e - 1)
    if value < 0 or value > 1:
        if counter is not None:
            counter.hit(value)
        value = float(np.clip(value, 0.0, 1.0))
    return value


def differential_contrast(plus, minus):
    """Half the difference of readouts taken with +x and -x projection pulses."""
    return (plus - minus) / 2


def nuclear_populations(rho, spins):
    """Computational-basis populations of the listed nuclear spins (0-based), up first."""
    n = n_qubits_of(rho)
    reduced = partial_trace(rho, [1 + i for i in spins], [2] * n)
    return np.clip(np.real(np.diag(reduced)), 0.0, None)
