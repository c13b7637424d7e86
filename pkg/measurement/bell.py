"""Two-spin correlators and Bell-state fidelity."""

import attrs
import numpy as np

from linalg.operators import PAULI, expectation, kron, n_qubits_of, partial_trace
from spinreg.exceptions import ConfigError, DimensionError

from .readout import nuclear_populations

# Population order of a two-spin readout: up-up, up-down, down-up, down-down.
PARITY = np.array([1.0, -1.0, -1.0, 1.0])

BELL_COEFFICIENTS = {
    'psi_plus': (-1, 1, 1),
    'psi_minus': (-1, -1, -1),
    'phi_plus': (1, -1, 1),
    'phi_minus': (1, 1, -1),
}


def _correlator(instance, attribute, value):
    if abs(value) > 1 + 1e-9:
        raise ConfigError(f'correlator {attribute.name} = {value} exceeds 1 in magnitude')


@attrs.frozen
class CorrelatorSet:
    zz: float = attrs.field(validator=_correlator)
    yy: float = attrs.field(validator=_correlator)
    xx: float = attrs.field(validator=_correlator)

    @property
    def ii(self):
        return 1.0


def bell_fidelity(correlators, coefficients=BELL_COEFFICIENTS['psi_plus']):
    """(1 + c_zz zz + c_yy yy + c_xx xx) / 4."""
    if isinstance(coefficients, str):
        try:
            coefficients = BELL_COEFFICIENTS[coefficients]
        except KeyError:
            raise ConfigError(f'unknown Bell state {coefficients!r}') from None
    if len(coefficients) != 3 or any(c not in (-1, 1) for c in coefficients):
        raise ConfigError(f'Bell coefficients must be three values of +-1, got {coefficients}')
    c_zz, c_yy, c_xx = coefficients
    return (correlators.ii + c_zz * correlators.zz + c_yy * correlators.yy + c_xx * correlators.xx) / 4


def correlator_from_populations(populations):
    p = np.asarray(populations, dtype=float)
    if p.shape != (4,):
        raise DimensionError(f'expected 4 populations, got shape {p.shape}')
    if np.any(p < 0):
        raise ConfigError('populations must be non-negative')
    total = p.sum()
    if total == 0:
        raise ConfigError('all-zero population vector')
    return float(np.dot(PARITY, p / total))


def correlators_from_populations(z, x, y):
    """Correlators from the population vectors of the Z, X and Y readout settings."""
    return CorrelatorSet(
        zz=correlator_from_populations(z),
        yy=correlator_from_populations(y),
        xx=correlator_from_populations(x),
    )


def correlators_from_state(rho, spins=(0, 1)):
    """Correlators read directly from a density matrix (0-based nuclear spins)."""
    n = n_qubits_of(rho)
    reduced = partial_trace(rho, [1 + i for i in spins], [2] * n)
    return CorrelatorSet(
        zz=expectation(reduced, kron(PAULI['z'], PAULI['z'])),
        yy=expectation(reduced, kron(PAULI['y'], PAULI['y'])),
        xx=expectation(reduced, kron(PAULI['x'], PAULI['x'])),
    )


def confusion_matrix(fidelity):
    return np.array([[fidelity, 1 - fidelity], [1 - fidelity, fidelity]])


def apply_readout_confusion(populations, fidelities):
    """Symmetric per-spin misassignment applied to a two-spin population vector."""
    first, second = fidelities
    for f in fidelities:
        if not 0 <= f <= 1:
            raise ConfigError(f'readout fidelity must lie in [0, 1], got {f}')
    matrix = np.kron(confusion_matrix(first), confusion_matrix(second))
    return matrix @ np.asarray(populations, dtype=float)


def readout_populations(rho, spins=(0, 1), fidelities=None):
    populations = nuclear_populations(rho, spins)
    if fidelities is not None:
        populations = apply_readout_confusion(populations, fidelities)
    return populations
