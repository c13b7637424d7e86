"""
Dense complex operators on the register Hilbert space.

Matrices are plain ``numpy`` arrays of dtype complex128 in row-major order.
The electron is qubit 0 (most significant), nuclear spins follow in order.
Basis state index 0 of each qubit is |up> (sigma_z = +1), index 1 is |down>.
"""

import logging
from functools import reduce

import numpy as np

from spinreg.exceptions import DimensionError, EigenSolverError, RegisterTooLarge

from .constants import max_dimension, tolerance

logger = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PROJ_UP = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_DOWN = np.array([[0, 0], [0, 1]], dtype=complex)

PAULI = {'i': I2, 'x': SIGMA_X, 'y': SIGMA_Y, 'z': SIGMA_Z}


def kron(a, b, *more):
    """Kronecker product; refuses results larger than the configured register."""
    result = np.asarray(a, dtype=complex)
    for factor in (b,) + more:
        factor = np.asarray(factor, dtype=complex)
        rows = result.shape[0] * factor.shape[0]
        cols = result.shape[1] * factor.shape[1]
        if max(rows, cols) > max_dimension():
            raise RegisterTooLarge(
                f'operator dimension {rows}x{cols} exceeds the configured maximum {max_dimension()}'
            )
        result = np.kron(result, factor)
    return result


def embed(op, index, n_qubits):
    """Place a single-qubit operator at ``index`` in an ``n_qubits`` register."""
    if not 0 <= index < n_qubits:
        raise DimensionError(f'qubit index {index} outside register of {n_qubits} qubits')
    factors = [I2] * n_qubits
    factors[index] = op
    return reduce(kron, factors)


def embed_pair(op_a, index_a, op_b, index_b, n_qubits):
    """Product of two single-qubit operators on distinct qubits."""
    if index_a == index_b:
        raise DimensionError('pair operator needs two distinct qubits')
    factors = [I2] * n_qubits
    factors[index_a] = op_a
    factors[index_b] = op_b
    return reduce(kron, factors)


def n_qubits_of(matrix):
    dim = matrix.shape[0]
    n = int(round(np.log2(dim)))
    if 2 ** n != dim:
        raise DimensionError(f'dimension {dim} is not a power of two')
    return n


def dagger(m):
    return np.conj(np.transpose(m))


def is_hermitian(m, tol=None):
    tol = tolerance('hermitian') if tol is None else tol
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m)), initial=0.0) < tol


def check_unitary(u, tol=None):
    tol = tolerance('unitarity') if tol is None else tol
    u = np.asarray(u)
    error = np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])), initial=0.0)
    if error >= tol:
        raise EigenSolverError(f'operator is not unitary (max deviation {error:.3e})')
    return u


def check_density_matrix(rho):
    """Validate hermiticity, unit trace and positivity; returns ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f'density matrix must be square, got shape {rho.shape}')
    n_qubits_of(rho)
    if not is_hermitian(rho, tolerance('density_hermitian')):
        raise EigenSolverError('density matrix is not Hermitian')
    trace = np.trace(rho)
    if abs(trace - 1) >= tolerance('trace'):
        raise EigenSolverError(f'density matrix trace {trace.real:.12f} differs from 1')
    smallest = np.linalg.eigvalsh(rho).min()
    if smallest < tolerance('positivity'):
        raise EigenSolverError(f'density matrix has negative eigenvalue {smallest:.3e}')
    return rho


def partial_trace(rho, keep, dims):
    """Reduced density matrix over the subsystems listed in ``keep``."""
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    keep = sorted(set(keep))
    if not keep:
        raise DimensionError('partial trace needs at least one kept subsystem')
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionError(f'subsystem dims {dims} do not match matrix dimension {rho.shape[0]}')
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f'kept subsystems {keep} outside {len(dims)} subsystems')

    n = len(dims)
    tensor = rho.reshape(dims + dims)
    remaining = n
    for axis in reversed(range(n)):
        if axis in keep:
            continue
        tensor = np.trace(tensor, axis1=axis, axis2=axis + remaining)
        remaining -= 1
    kept_dim = int(np.prod([dims[k] for k in keep]))
    return tensor.reshape(kept_dim, kept_dim)


def eigh(h):
    """Hermitian eigendecomposition; ``h == v @ diag(w) @ v^dagger``."""
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f'eigensolver did not converge: {exc}') from exc


def expm_hermitian(h, t):
    """exp(-i h t) for Hermitian ``h`` through its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, max(tolerance('hermitian'), tolerance('hermitian') * np.max(np.abs(h), initial=1.0))):
        raise DimensionError('generator is not Hermitian')
    w, v = eigh(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def unitary_action(u, rho):
    return u @ rho @ dagger(u)


def expectation(rho, op):
    return float(np.real(np.trace(rho @ op)))


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))


def state_fidelity(rho, psi):
    """<psi| rho |psi> for a normalized pure state ``psi``."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape[0] != rho.shape[0]:
        raise DimensionError(f'state of length {psi.shape[0]} does not match dimension {rho.shape[0]}')
    norm = np.vdot(psi, psi).real
    if abs(norm - 1) > 1e-9:
        raise DimensionError(f'state is not normalized (norm^2 = {norm:.12f})')
    value = np.vdot(psi, rho @ psi)
    return float(min(1.0, max(0.0, value.real)))


def basis_state(bits):
    """Computational basis ket; ``bits`` holds 0 (up) / 1 (down) per qubit."""
    index = 0
    for bit in bits:
        index = 2 * index + int(bit)
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[index] = 1.0
    return psi


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, np.conj(psi))


def expm_hermitian_batch(hs, t, chunk=256):
    """exp(-i h t) for a stack of Hermitian generators, ordered as given."""
    hs = np.asarray(hs, dtype=complex)
    out = np.empty_like(hs)
    for start in range(0, hs.shape[0], chunk):
        try:
            w, v = np.linalg.eigh(hs[start:start + chunk])
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError(f'eigensolver did not converge: {exc}') from exc
        phases = np.exp(-1j * w * t)
        out[start:start + chunk] = (v * phases[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return out


def ordered_product(unitaries):
    """U_n ... U_2 U_1 for unitaries listed in time order."""
    result = np.eye(unitaries.shape[-1], dtype=complex)
    for u in unitaries:
        result = u @ result
    return result
