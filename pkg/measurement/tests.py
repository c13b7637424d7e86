import io
import math

import numpy as np
from django.test import SimpleTestCase

from linalg.operators import pure_density
from spinmodel.hamiltonians import initial_density_matrix
from spinmodel.params import TWO_PI, RegisterParams
from spinreg.exceptions import ConfigError, DimensionError

from .bell import (
    BELL_COEFFICIENTS, CorrelatorSet, apply_readout_confusion, bell_fidelity,
    correlator_from_populations, correlators_from_populations, correlators_from_state,
    readout_populations,
)
from .readout import (
    ClampCounter, differential_contrast, electron_contrast, electron_populations,
    normalized_readout,
)
from .serializers import (
    PhotonHistogramSerializer, SsrModelSerializer, histogram_to_csv, read_histogram_csv,
)
from .ssr import (
    DEFAULT_MODEL, PhotonHistogram, SsrModel, active_feedback_population, alternating_ssr,
    error_rates, optimal_threshold, post_select, simulate_active_feedback, simulate_ssr,
    threshold_fidelity,
)


def electron_only(f_e):
    return RegisterParams(omega_L_e=TWO_PI * 9.414e9, omega_L_n=TWO_PI * 3.5825e6, f_e=f_e)


def bell_state_density():
    """(|up down> + |down up>)/sqrt(2) on n1 n2 with the electron up."""
    psi = np.zeros(8, dtype=complex)
    psi[0b001] = psi[0b010] = 1 / math.sqrt(2)
    return pure_density(psi)


class ReadoutTests(SimpleTestCase):
    def test_initial_contrast(self):
        rho = initial_density_matrix(electron_only(0.86))
        self.assertAlmostEqual(electron_contrast(rho), -0.72, delta=1e-12)
        p_up, p_down = electron_populations(rho)
        self.assertAlmostEqual(p_up, 0.14, delta=1e-12)
        self.assertAlmostEqual(p_down, 0.86, delta=1e-12)

    def test_mixed_state_has_no_contrast(self):
        self.assertAlmostEqual(electron_contrast(np.eye(4, dtype=complex) / 4), 0.0, delta=1e-15)

    def test_normalization_end_points(self):
        self.assertAlmostEqual(normalized_readout(0.8528, 0.8528), 1.0, delta=1e-12)
        self.assertAlmostEqual(normalized_readout(1 - 0.8528, 0.8528), 0.0, delta=1e-12)

    def test_normalization_formula(self):
        value = normalized_readout(0.6, 0.8528)
        self.assertAlmostEqual(value, (0.6 - 0.1472) / 0.7056, delta=1e-12)
        self.assertAlmostEqual(value, 0.6417, delta=1e-4)

    def test_normalization_is_order_preserving(self):
        values = [normalized_readout(p, 0.9) for p in np.linspace(0.1, 0.9, 9)]
        self.assertEqual(values, sorted(values))

    def test_uninitializable_electron(self):
        with self.assertRaises(ConfigError):
            normalized_readout(0.5, 0.5)
        with self.assertRaises(ConfigError):
            normalized_readout(0.5, 1.2)

    def test_clamp_events_are_counted(self):
        counter = ClampCounter()
        with self.assertLogs('measurement.readout', 'WARNING'):
            value = normalized_readout(0.95, 0.9, counter)
        self.assertEqual(value, 1.0)
        self.assertEqual(counter.count, 1)
        self.assertEqual(normalized_readout(0.5, 0.9, counter), 0.5)
        self.assertEqual(counter.count, 1)

    def test_differential_contrast(self):
        self.assertAlmostEqual(differential_contrast(0.9, 0.1), 0.4, delta=1e-15)


class HistogramTests(SimpleTestCase):
    def test_totals_must_match(self):
        with self.assertRaises(ConfigError):
            PhotonHistogram({1: 3, 2: 4}, repetitions=8)
        with self.assertRaises(ConfigError):
            PhotonHistogram({1: -1})
        with self.assertRaises(ConfigError):
            PhotonHistogram({-1: 1})

    def test_statistics(self):
        histogram = PhotonHistogram({0: 2, 4: 2})
        self.assertEqual(histogram.repetitions, 4)
        self.assertEqual(histogram.mean(), 2.0)
        self.assertEqual(histogram.fraction_at_or_above(3), 0.5)
        photons, occurrences = histogram.arrays()
        self.assertEqual(list(photons), [0, 1, 2, 3, 4])
        self.assertEqual(list(occurrences), [2, 0, 0, 0, 2])

    def test_merge(self):
        merged = PhotonHistogram({1: 1, 2: 1}).merged(PhotonHistogram({2: 3}))
        self.assertEqual(merged.bin_counts, {1: 1, 2: 4})
        self.assertEqual(merged.repetitions, 5)


class SsrTests(SimpleTestCase):
    def test_seed_is_deterministic(self):
        first = simulate_ssr(DEFAULT_MODEL, 0.5, 2000, rng_seed=11)
        second = simulate_ssr(DEFAULT_MODEL, 0.5, 2000, rng_seed=11)
        self.assertEqual(first.bin_counts, second.bin_counts)
        self.assertEqual(first.repetitions, 2000)

    def test_bright_mean(self):
        repetitions = 10_000
        histogram = simulate_ssr(DEFAULT_MODEL, 1.0, repetitions, rng_seed=3)
        bound = 4 * math.hypot(DEFAULT_MODEL.bright_sigma, 0.3) / math.sqrt(repetitions)
        self.assertAlmostEqual(histogram.mean(), DEFAULT_MODEL.bright_mean, delta=bound)

    def test_dark_without_noise_is_empty(self):
        model = SsrModel(bright_mean=10.0, dark_mean=0.0, bright_sigma=1.0, dark_sigma=0.0)
        histogram = simulate_ssr(model, 0.0, 500, rng_seed=1)
        self.assertEqual(histogram.bin_counts, {0: 500})

    def test_poisson_mode(self):
        histogram = simulate_ssr(DEFAULT_MODEL, 0.0, 5000, rng_seed=2, poisson=True)
        self.assertAlmostEqual(histogram.mean(), DEFAULT_MODEL.dark_mean, delta=0.2)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ConfigError):
            simulate_ssr(DEFAULT_MODEL, 1.5, 10)
        with self.assertRaises(ConfigError):
            simulate_ssr(DEFAULT_MODEL, 0.5, 0)
        with self.assertRaises(ConfigError):
            SsrModel(bright_mean=1.0, dark_mean=2.0)

    def test_equal_spreads_split_at_midpoint(self):
        model = SsrModel(bright_mean=15.0, dark_mean=5.0, bright_sigma=2.0, dark_sigma=2.0)
        threshold, fidelity = optimal_threshold(model)
        self.assertAlmostEqual(threshold, 10.0, delta=1e-12)
        self.assertAlmostEqual(fidelity, threshold_fidelity(model, 10.0), delta=1e-15)

    def test_well_separated(self):
        model = SsrModel(bright_mean=10.0, dark_mean=0.0, bright_sigma=1.0, dark_sigma=1.0)
        _, fidelity = optimal_threshold(model)
        self.assertGreater(fidelity, 0.998)

    def test_default_model_regime(self):
        threshold, fidelity = optimal_threshold(DEFAULT_MODEL)
        self.assertTrue(DEFAULT_MODEL.dark_mean < threshold < DEFAULT_MODEL.bright_mean)
        self.assertAlmostEqual(fidelity, 0.98, delta=0.005)

    def test_threshold_maximizes_fidelity(self):
        threshold, fidelity = optimal_threshold(DEFAULT_MODEL)
        for offset in (-0.5, 0.5):
            self.assertLessEqual(threshold_fidelity(DEFAULT_MODEL, threshold + offset), fidelity)

    def test_common_shift_invariance(self):
        shifted = SsrModel(bright_mean=23.5, dark_mean=9.0, bright_sigma=4.5, dark_sigma=2.5)
        base_threshold, base_fidelity = optimal_threshold(DEFAULT_MODEL)
        threshold, fidelity = optimal_threshold(shifted)
        self.assertAlmostEqual(threshold, base_threshold + 3.0, delta=1e-9)
        self.assertAlmostEqual(fidelity, base_fidelity, delta=1e-12)

    def test_indistinguishable(self):
        model = SsrModel(bright_mean=5.0 + 1e-12, dark_mean=5.0)
        self.assertEqual(optimal_threshold(model), (5.0, 0.5))

    def test_alternating_readout(self):
        result = alternating_ssr(DEFAULT_MODEL, 0.8, 20_000, rng_seed=5)
        self.assertEqual(result.first.repetitions, 10_000)
        self.assertAlmostEqual(result.population, 0.8, delta=0.03)

    def test_active_feedback(self):
        threshold, fidelity = optimal_threshold(DEFAULT_MODEL)
        self.assertAlmostEqual(active_feedback_population(DEFAULT_MODEL, 0.5), fidelity, delta=1e-12)
        perfect = SsrModel(bright_mean=10.0, dark_mean=0.0)
        self.assertEqual(active_feedback_population(perfect, 0.3), 1.0)
        simulated = simulate_active_feedback(DEFAULT_MODEL, 0.5, 20_000, rng_seed=9)
        self.assertAlmostEqual(simulated, fidelity, delta=0.01)

    def test_post_selection(self):
        selection = post_select(DEFAULT_MODEL, 0.5)
        missed, false_bright = error_rates(DEFAULT_MODEL, optimal_threshold(DEFAULT_MODEL)[0])
        self.assertAlmostEqual(selection.acceptance, 0.5 * (1 - missed + false_bright), delta=1e-12)
        self.assertGreater(selection.fidelity, optimal_threshold(DEFAULT_MODEL)[1])
        perfect = post_select(SsrModel(bright_mean=10.0, dark_mean=0.0), 0.25)
        self.assertEqual((perfect.fidelity, perfect.acceptance), (1.0, 0.25))


class BellTests(SimpleTestCase):
    def test_ideal_state(self):
        correlators = CorrelatorSet(zz=-1.0, yy=1.0, xx=1.0)
        self.assertEqual(bell_fidelity(correlators, BELL_COEFFICIENTS['psi_plus']), 1.0)
        self.assertEqual(bell_fidelity(correlators, 'psi_minus'), 0.0)

    def test_mixed_state(self):
        self.assertEqual(bell_fidelity(CorrelatorSet(0.0, 0.0, 0.0)), 0.25)

    def test_fidelity_bounds(self):
        for name, coefficients in BELL_COEFFICIENTS.items():
            for correlators in (CorrelatorSet(-1, 1, 1), CorrelatorSet(1, -1, 1), CorrelatorSet(0.3, -0.2, 0.5)):
                value = bell_fidelity(correlators, coefficients)
                self.assertTrue(0.0 <= value <= 1.0, (name, correlators))

    def test_bad_coefficients(self):
        with self.assertRaises(ConfigError):
            bell_fidelity(CorrelatorSet(0, 0, 0), 'omega')
        with self.assertRaises(ConfigError):
            bell_fidelity(CorrelatorSet(0, 0, 0), (1, 0, 1))
        with self.assertRaises(ConfigError):
            CorrelatorSet(zz=1.5, yy=0.0, xx=0.0)

    def test_population_correlators(self):
        self.assertEqual(correlator_from_populations([0.25] * 4), 0.0)
        self.assertEqual(correlator_from_populations([0, 0.5, 0.5, 0]), -1.0)
        self.assertEqual(correlator_from_populations([0, 2, 2, 0]), -1.0)
        with self.assertRaises(ConfigError):
            correlator_from_populations([0, 0, 0, 0])
        with self.assertRaises(DimensionError):
            correlator_from_populations([1, 0])

    def test_correlators_from_settings(self):
        correlators = correlators_from_populations(z=[0, 1, 1, 0], x=[1, 0, 0, 1], y=[1, 0, 0, 1])
        self.assertEqual((correlators.zz, correlators.xx, correlators.yy), (-1.0, 1.0, 1.0))

    def test_state_correlators(self):
        correlators = correlators_from_state(bell_state_density())
        self.assertAlmostEqual(correlators.zz, -1.0, delta=1e-12)
        self.assertAlmostEqual(correlators.xx, 1.0, delta=1e-12)
        self.assertAlmostEqual(correlators.yy, 1.0, delta=1e-12)
        self.assertAlmostEqual(bell_fidelity(correlators), 1.0, delta=1e-12)

    def test_readout_confusion(self):
        populations = apply_readout_confusion([1, 0, 0, 0], (0.96, 0.96))
        np.testing.assert_allclose(populations, [0.9216, 0.0384, 0.0384, 0.0016], atol=1e-12)
        self.assertAlmostEqual(correlator_from_populations(populations), (2 * 0.96 - 1) ** 2, delta=1e-12)
        with self.assertRaises(ConfigError):
            apply_readout_confusion([1, 0, 0, 0], (1.1, 0.9))

    def test_readout_populations(self):
        populations = readout_populations(bell_state_density())
        np.testing.assert_allclose(populations, [0, 0.5, 0.5, 0], atol=1e-12)


class SerializerTests(SimpleTestCase):
    def test_json_round_trip(self):
        histogram = PhotonHistogram({3: 2, 7: 1}, window=5e-3)
        data = PhotonHistogramSerializer(histogram).data
        self.assertEqual(data['repetitions'], 3)
        serializer = PhotonHistogramSerializer(data=dict(data))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save().bin_counts, histogram.bin_counts)

    def test_json_rejects_wrong_total(self):
        serializer = PhotonHistogramSerializer(data={
            'repetitions': 4, 'bins': [{'photon_count': 1, 'occurrences': 3}],
        })
        self.assertFalse(serializer.is_valid())
        self.assertIn('repetitions', serializer.errors)

    def test_csv(self):
        histogram = PhotonHistogram({0: 4, 12: 6})
        text = histogram_to_csv(histogram)
        self.assertEqual(text, 'photon_count,occurrences\n0,4\n12,6\n')
        self.assertEqual(read_histogram_csv(io.StringIO(text)).bin_counts, histogram.bin_counts)

    def test_csv_errors_name_the_line(self):
        with self.assertRaisesMessage(ConfigError, 'line 3'):
            read_histogram_csv(io.StringIO('photon_count,occurrences\n1,2\nx,3\n'))
        with self.assertRaisesMessage(ConfigError, 'line 1'):
            read_histogram_csv(io.StringIO('count,n\n'))

    def test_model(self):
        serializer = SsrModelSerializer(data={'bright_mean': 20.5, 'dark_mean': 6, 'bright_sigma': 4.5})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save().bright_mean, 20.5)
        self.assertFalse(SsrModelSerializer(data={'bright_mean': 1, 'dark_mean': 6}).is_valid())
