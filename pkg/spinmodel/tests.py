import math

import numpy as np
from django.test import SimpleTestCase

from linalg.operators import SIGMA_Z, embed, expectation
from spinreg.exceptions import ConfigError, DimensionError, FrameError

from . import presets
from .hamiltonians import (
    build_static_hamiltonian, electron_carrier, format_state_string, initial_density_matrix,
    mw_drive_hamiltonian, parse_state_string, resolved_spins, rf_drive_hamiltonian,
    rf_resonance_frequencies,
)
from .params import TWO_PI, DriveParams, Frame, NuclearSpin, RegisterParams
from .serializers import DriveSerializer, RegisterConfigSerializer

KHZ = TWO_PI * 1e3


def register(spins=(), couplings=None, **changes):
    params = RegisterParams(
        omega_L_e=TWO_PI * 9.414e9,
        omega_L_n=TWO_PI * 3582.5e3,
        spins=spins,
        nn_couplings=couplings or {},
    )
    return params.evolve(**changes)


class RegisterParamsTests(SimpleTestCase):
    def test_counts(self):
        params = presets.table_register()
        self.assertEqual((params.K, params.n_qubits, params.dim), (4, 5, 32))

    def test_coupling_lookup_is_symmetric(self):
        params = presets.table_register()
        self.assertAlmostEqual(params.coupling(1, 0), TWO_PI * 5.119870272800416, delta=1e-12)
        self.assertEqual(params.coupling(0, 1), params.coupling(1, 0))
        self.assertEqual(params.coupling(0, 3), 0.0)

    def test_rejects_self_coupling(self):
        with self.assertRaises(ConfigError):
            register([NuclearSpin(KHZ)], {(0, 0): 1.0})

    def test_rejects_asymmetric_coupling(self):
        spins = [NuclearSpin(KHZ), NuclearSpin(2 * KHZ)]
        with self.assertRaises(ConfigError):
            register(spins, {(0, 1): 1.0, (1, 0): 2.0})

    def test_rejects_missing_spin_in_coupling(self):
        with self.assertRaises(ConfigError):
            register([NuclearSpin(KHZ)], {(0, 2): 1.0})

    def test_rejects_negative_transverse_coupling(self):
        with self.assertRaises(ConfigError):
            NuclearSpin(KHZ, a_perp=-1.0)

    def test_initialization_fidelity_range(self):
        with self.assertRaises(ConfigError):
            register(f_e=0.4)

    def test_spin_labels(self):
        params = presets.table_register()
        self.assertEqual(params.spin_index('n3'), 2)
        with self.assertRaises(ConfigError):
            params.spin_index('n7')

    def test_nearest_initialization_fidelity(self):
        self.assertEqual(presets.nearest_f_e(8.3951e-6), 0.8528)


class HamiltonianTests(SimpleTestCase):
    def test_bare_electron_on_resonance_is_zero(self):
        params = register()
        np.testing.assert_array_equal(build_static_hamiltonian(params, Frame.exact(params)), np.zeros((2, 2)))

    def test_resonances_match_eigen_gaps(self):
        table = presets.table_register()
        for spin in table.spins:
            params = register([spin], omega_L_n=table.omega_L_n)
            h = build_static_hamiltonian(params, Frame.exact(params)).real
            up, down = rf_resonance_frequencies(params, 0)
            for block, expected in ((h[:2, :2], up), (h[2:, 2:], down)):
                levels = np.linalg.eigvalsh(block)
                self.assertLess(abs(levels[1] - levels[0] - expected) / TWO_PI, 1e-3)

    def test_resonance_example(self):
        params = register([NuclearSpin(1194 * KHZ, 242 * KHZ)])
        up, down = rf_resonance_frequencies(params, 0)
        self.assertAlmostEqual(up / KHZ, 4181.25, delta=0.01)
        self.assertAlmostEqual(down / KHZ, 2987.95, delta=0.01)

    def test_resonance_index_checked(self):
        with self.assertRaises(DimensionError):
            rf_resonance_frequencies(register([NuclearSpin(KHZ)]), 1)

    def test_parallel_couplings_are_diagonal(self):
        params = register([NuclearSpin(400 * KHZ), NuclearSpin(150 * KHZ)])
        h = build_static_hamiltonian(params, Frame.exact(params))
        np.testing.assert_array_equal(h, np.diag(np.diag(h)))

    def test_fast_frame_drops_transverse_term(self):
        params = register([NuclearSpin(400 * KHZ, 100 * KHZ)])
        h = build_static_hamiltonian(params, Frame.fast(params))
        np.testing.assert_array_equal(h, np.diag(np.diag(h)))
        self.assertFalse(np.allclose(build_static_hamiltonian(params, Frame.exact(params)), np.diag(np.diag(h))))

    def test_nuclear_coupling_shifts_lines_by_half_strength(self):
        strength = TWO_PI * 28.56
        params = register([NuclearSpin(400 * KHZ), NuclearSpin(150 * KHZ)], {(0, 1): strength})
        energy = np.diag(build_static_hamiltonian(params, Frame.exact(params))).real
        # indices: electron, n1, n2 bits with 0 = up
        line_with_n2_up = energy[0b000] - energy[0b010]
        line_with_n2_down = energy[0b001] - energy[0b011]
        self.assertAlmostEqual(line_with_n2_up - line_with_n2_down, strength, delta=1e-6)

    def test_electron_frame_shift(self):
        params = register([NuclearSpin(400 * KHZ, 100 * KHZ)])
        shift = TWO_PI * 1e6
        moved = Frame(params.omega_L_e + shift, (0.0,))
        difference = build_static_hamiltonian(params, Frame.exact(params)) - build_static_hamiltonian(params, moved)
        np.testing.assert_allclose(difference, shift / 2 * embed(SIGMA_Z, 0, 2), atol=1e-3)

    def test_frame_mismatch(self):
        params = register([NuclearSpin(KHZ)])
        with self.assertRaises(FrameError):
            build_static_hamiltonian(params, Frame(params.omega_L_e, ()))
        with self.assertRaises(FrameError):
            Frame.named('rotating', params)

    def test_drives(self):
        h = mw_drive_hamiltonian(2.0, 0.0, 1)
        np.testing.assert_allclose(h, [[0, 1], [1, 0]])
        with self.assertRaises(DimensionError):
            rf_drive_hamiltonian(1, 1.0, 0.0, 2)
        with self.assertRaises(ConfigError):
            mw_drive_hamiltonian(-1.0, 0.0, 1)


class StateTests(SimpleTestCase):
    def test_initial_contrast(self):
        params = presets.table_register(f_e=0.8528)
        rho = initial_density_matrix(params)
        self.assertAlmostEqual(expectation(rho, embed(SIGMA_Z, 0, 5)), -0.7056, delta=1e-12)
        self.assertAlmostEqual(np.trace(rho).real, 1.0, delta=1e-12)

    def test_nuclear_state_count(self):
        params = presets.table_register()
        with self.assertRaises(DimensionError):
            initial_density_matrix(params, ['up'])
        with self.assertRaises(ConfigError):
            initial_density_matrix(params, ['up', 'down', 'mixed', 'sideways'])

    def test_state_strings(self):
        params = presets.table_register()
        states = parse_state_string('d1d2u3', params)
        self.assertEqual(states, {0: -1, 1: -1, 2: 1})
        self.assertEqual(format_state_string(states), 'd1d2u3')
        for text in ('x1', 'd', 'd5', 'd1d1'):
            with self.assertRaises(ConfigError, msg=text):
                parse_state_string(text, params)

    def test_resolution(self):
        params = presets.table_register()
        self.assertEqual(resolved_spins(params, 1200e3), [0])
        self.assertEqual(resolved_spins(params, 500e3), [0, 1])
        self.assertEqual(resolved_spins(params, 150e3), [0, 1, 2])

    def test_electron_carrier(self):
        params = presets.table_register()
        detuning = electron_carrier(params, {0: -1, 1: -1, 2: 1})
        self.assertAlmostEqual(detuning / KHZ, (-1194 - 420 + 121) / 2, delta=1e-9)


class SerializerTests(SimpleTestCase):
    def test_register_config(self):
        serializer = RegisterConfigSerializer(data={
            'omega_L_e': '9414MHz',
            'omega_L_n': '3.5825184MHz',
            'f_e': 0.8528,
            'tau_c0': '212.6us',
            'beta': 2,
            'chi': 0.5134,
            'spins': [
                {'label': 'n1', 'a_par': '1194kHz', 'a_perp': '233.2kHz', 't2_star': '6.14ms'},
                {'label': 'n2', 'a_par': '420kHz', 'a_perp': '147.7kHz'},
            ],
            'couplings': [{'first': 'n2', 'second': 'n1', 'strength': '5.12Hz'}],
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        params = serializer.save()
        self.assertEqual(params.K, 2)
        self.assertAlmostEqual(params.omega_L_n, TWO_PI * 3.5825184e6, delta=1e-3)
        self.assertAlmostEqual(params.spins[0].t2_star, 6.14e-3, delta=1e-15)
        self.assertAlmostEqual(params.coupling(0, 1), TWO_PI * 5.12, delta=1e-9)
        self.assertAlmostEqual(params.tau_c0, 212.6e-6, delta=1e-15)

    def test_unknown_coupling_label(self):
        serializer = RegisterConfigSerializer(data={
            'omega_L_e': '9GHz', 'omega_L_n': '3MHz',
            'spins': [{'a_par': '1MHz'}],
            'couplings': [{'first': 'n1', 'second': 'n9', 'strength': '1Hz'}],
        })
        self.assertFalse(serializer.is_valid())
        self.assertIn('couplings', serializer.errors)

    def test_bad_unit(self):
        serializer = RegisterConfigSerializer(data={'omega_L_e': '9 parsecs', 'omega_L_n': '3MHz'})
        self.assertFalse(serializer.is_valid())
        self.assertIn('omega_L_e', serializer.errors)

    def test_drive_defaults(self):
        serializer = DriveSerializer(data={'rf_rabi': ['3.564kHz', '5.068kHz']})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        drive = serializer.save()
        self.assertIsInstance(drive, DriveParams)
        self.assertAlmostEqual(drive.rf(1), TWO_PI * 5.068e3, delta=1e-9)
        self.assertAlmostEqual(drive.rf(3), TWO_PI * 3.564e3, delta=1e-9)
        self.assertAlmostEqual(drive.mw_rabi, TWO_PI / 228e-9, delta=1e-3)

    def test_presets_are_consistent(self):
        ideal = presets.ideal_register(3)
        self.assertEqual(ideal.f_e, 1.0)
        self.assertTrue(math.isinf(ideal.tau_c0))
        self.assertEqual(len(presets.table_drive().rf_rabi), 4)
