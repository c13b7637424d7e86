import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from spinreg.exceptions import ConfigError, DimensionError, EigenSolverError, RegisterTooLarge

from .constants import tolerance
from .operators import (
    I2, SIGMA_X, SIGMA_Y, SIGMA_Z, basis_state, check_density_matrix, eigh, embed,
    expm_hermitian, kron, partial_trace, pure_density, state_fidelity,
)


def random_density(n_qubits, seed):
    rng = np.random.default_rng(seed)
    dim = 2 ** n_qubits
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


class KronTests(SimpleTestCase):
    def test_identity(self):
        np.testing.assert_array_equal(kron(I2, I2), np.eye(4))

    def test_sigma_z_embedding(self):
        np.testing.assert_array_equal(kron(SIGMA_Z, I2), np.diag([1, 1, -1, -1]))

    def test_xx_squares_to_identity(self):
        xx = kron(SIGMA_X, SIGMA_X)
        np.testing.assert_array_equal(xx @ xx, np.eye(4))

    def test_associative_on_paulis(self):
        left = kron(kron(SIGMA_X, SIGMA_Y), SIGMA_Z)
        right = kron(SIGMA_X, kron(SIGMA_Y, SIGMA_Z))
        np.testing.assert_array_equal(left, right)

    def test_index_rule(self):
        a = np.arange(4).reshape(2, 2)
        b = np.arange(9).reshape(3, 3)
        with override_settings(SPINREG={**settings.SPINREG, 'MAX_QUBITS': 7}):
            out = kron(a, b)
        self.assertEqual(out[1 * 3 + 2, 0 * 3 + 1], a[1, 0] * b[2, 1])

    @override_settings(SPINREG={**settings.SPINREG, 'MAX_QUBITS': 2})
    def test_overflow(self):
        with self.assertRaises(RegisterTooLarge):
            kron(I2, I2, I2)

    def test_embed_places_operator(self):
        np.testing.assert_array_equal(embed(SIGMA_Z, 1, 2), np.diag([1, -1, 1, -1]))


class PartialTraceTests(SimpleTestCase):
    def test_product_state(self):
        rho_e = np.array([[0.3, 0.1j], [-0.1j, 0.7]])
        rho_n = np.array([[0.5, 0.2], [0.2, 0.5]])
        reduced = partial_trace(np.kron(rho_e, rho_n), [0], [2, 2])
        np.testing.assert_allclose(reduced, rho_e, atol=1e-14)

    def test_bell_state_marginal(self):
        psi = (basis_state([0, 0]) + basis_state([1, 1])) / np.sqrt(2)
        reduced = partial_trace(pure_density(psi), [0], [2, 2])
        np.testing.assert_allclose(reduced, I2 / 2, atol=1e-14)

    def test_trace_preserved(self):
        rho = random_density(3, seed=11)
        for keep in ([0], [1], [2], [0, 2], [1, 2]):
            reduced = partial_trace(rho, keep, [2, 2, 2])
            self.assertAlmostEqual(np.trace(reduced).real, 1.0, delta=1e-12)

    def test_matches_index_sum(self):
        rho = random_density(3, seed=5)
        tensor = rho.reshape([2] * 6)
        expected = np.einsum('ajbkjc->abkc', tensor).reshape(4, 4)
        reduced = partial_trace(rho, [0, 2], [2, 2, 2])
        np.testing.assert_allclose(reduced, expected, atol=1e-14)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            partial_trace(np.eye(4) / 4, [0], [2, 3])


class ExpmTests(SimpleTestCase):
    def test_larmor_period(self):
        omega = 2 * np.pi * 1.3e6
        u = expm_hermitian(SIGMA_Z * omega / 2, 2 * np.pi / omega)
        np.testing.assert_allclose(u, -np.eye(2), atol=1e-9)

    def test_zero_generator(self):
        np.testing.assert_allclose(expm_hermitian(np.zeros((4, 4)), 3.7), np.eye(4), atol=1e-15)

    def test_x_rotation_against_series(self):
        h = SIGMA_X * np.pi / 2
        series = np.zeros((2, 2), dtype=complex)
        term = np.eye(2, dtype=complex)
        for k in range(20):
            series += term
            term = term @ (-1j * h) / (k + 1)
        u = expm_hermitian(h, 1.0)
        np.testing.assert_allclose(u, series, atol=1e-12)
        np.testing.assert_allclose(u, -1j * SIGMA_X, atol=1e-12)

    def test_group_property(self):
        h = random_hermitian(8, seed=3)
        combined = expm_hermitian(h, 0.3) @ expm_hermitian(h, 0.5)
        np.testing.assert_allclose(combined, expm_hermitian(h, 0.8), atol=1e-8)

    def test_eigendecomposition_reconstructs(self):
        h = random_hermitian(32, seed=9)
        w, v = eigh(h)
        error = np.max(np.abs(v @ np.diag(w) @ v.conj().T - h))
        self.assertLess(error, 1e-10)

    def test_rejects_non_hermitian(self):
        with self.assertRaises(DimensionError):
            expm_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


class FidelityTests(SimpleTestCase):
    def test_pure_state(self):
        psi = (basis_state([0, 1]) + 1j * basis_state([1, 0])) / np.sqrt(2)
        self.assertAlmostEqual(state_fidelity(pure_density(psi), psi), 1.0, places=12)

    def test_maximally_mixed(self):
        self.assertAlmostEqual(state_fidelity(np.eye(8) / 8, basis_state([0, 1, 1])), 1 / 8, places=12)

    def test_classical_mixture_against_bell(self):
        rho = 0.7 * pure_density(basis_state([0, 0])) + 0.3 * pure_density(basis_state([1, 1]))
        phi_plus = (basis_state([0, 0]) + basis_state([1, 1])) / np.sqrt(2)
        self.assertAlmostEqual(state_fidelity(rho, phi_plus), 0.5, places=10)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            state_fidelity(np.eye(4) / 4, basis_state([0]))

    def test_density_check_accepts_valid(self):
        check_density_matrix(random_density(2, seed=1))


class ToleranceTests(SimpleTestCase):
    def test_read_from_settings(self):
        self.assertEqual(tolerance('unitarity'), settings.SPINREG['TOLERANCES']['unitarity'])

    def test_override_reaches_density_check(self):
        tolerances = {**settings.SPINREG['TOLERANCES'], 'trace': 0.5}
        with override_settings(SPINREG={**settings.SPINREG, 'TOLERANCES': tolerances}):
            self.assertEqual(tolerance('trace'), 0.5)
            check_density_matrix(np.diag([0.6, 0.6]).astype(complex))
        with self.assertRaises(EigenSolverError):
            check_density_matrix(np.diag([0.6, 0.6]).astype(complex))

    def test_unknown_name(self):
        with self.assertRaises(ConfigError):
            tolerance('sloppy')
