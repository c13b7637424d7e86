import io
import json
import math

import attrs
import numpy as np
from django.test import SimpleTestCase

from measurement.ssr import DEFAULT_MODEL, SsrModel, optimal_threshold, simulate_ssr
from sequences.engine import propagate, spin_expectations
from sequences.experiments import experiment_plan, run_plan
from spinmodel.hamiltonians import initial_density_matrix
from spinmodel.params import TWO_PI, DriveParams, Frame, NuclearSpin, RegisterParams
from spinmodel.presets import table_register
from spinreg.exceptions import ConfigError, UnknownModelError

from .data import DataSeries, Grid2D, read_grid_csv, read_series_csv, series_to_csv, write_grid_csv
from .fitmodels import GAMMA_0, get_model, model_names
from .fitting import fit
from .formulas import beat_detuning, cpmg_scaling_fit, ramsey_linewidth
from .serializers import (
    FIT_RESULT_SCHEMA, dump_fit_result, fit_result_document, load_fit_result, load_parameter_values,
)
from .spectrum import dft_spectrum, parseval_sums, peak_guesses
from .xy2d import fit_xy2d, parameter_names, simulate_xy_grid

KHZ = TWO_PI * 1e3

T2_HAHN = 212.6e-6
CHI = 0.513


def synthetic(name, truth, x, components=None):
    model = get_model(name, components)
    return DataSeries(x, model.evaluate(x, truth))


def nudged(truth, factor=1.02):
    return {name: value * factor for name, value in truth.items()}


class DataSeriesTests(SimpleTestCase):
    def test_rejects_unsorted_x(self):
        with self.assertRaises(ConfigError):
            DataSeries([0.0, 2.0, 1.0], [1.0, 2.0, 3.0])

    def test_rejects_length_mismatch(self):
        with self.assertRaises(ConfigError):
            DataSeries([0.0, 1.0], [1.0])

    def test_rejects_non_positive_errors(self):
        with self.assertRaises(ConfigError):
            DataSeries([0.0, 1.0], [1.0, 2.0], y_err=[0.1, 0.0])

    def test_csv_round_trip(self):
        series = DataSeries([0.0, 1e-6, 2e-6], [1.0, 0.5, 0.25], y_err=[0.1, 0.1, 0.2],
                            x_name='tau_s', y_name='contrast')
        text = series_to_csv(series)
        self.assertTrue(text.startswith('tau_s,contrast,contrast_err\n'))
        parsed = read_series_csv(io.StringIO(text))
        np.testing.assert_array_equal(parsed.x, series.x)
        np.testing.assert_array_equal(parsed.y_err, series.y_err)
        self.assertEqual(parsed.x_unit, 's')

    def test_csv_skips_comments(self):
        parsed = read_series_csv(io.StringIO('t_s,y\n# bundled data\n0,1\n1,2\n'))
        self.assertEqual(len(parsed), 2)

    def test_csv_errors_name_the_line(self):
        cases = {
            'x,y\n0,1\n1,abc\n': 'line 3',
            'x,y\n0,1\n1,2,3\n': 'line 3',
            'x,y\n0,1\n0,2\n': 'line 3',
            'x\n0\n': 'line 1',
        }
        for text, location in cases.items():
            with self.subTest(text=text):
                with self.assertRaisesMessage(ConfigError, location):
                    read_series_csv(io.StringIO(text))

    def test_empty_csv(self):
        with self.assertRaises(ConfigError):
            read_series_csv(io.StringIO('x,y\n'))

    def test_grid_round_trip(self):
        grid = Grid2D([8.393e-6, 8.395e-6], [20, 40], [[0.1, 0.2], [0.3, 0.4]])
        buffer = io.StringIO()
        write_grid_csv(grid, buffer)
        parsed = read_grid_csv(io.StringIO(buffer.getvalue()))
        self.assertEqual(parsed.ns, (20, 40))
        np.testing.assert_array_equal(parsed.values, grid.values)
        self.assertEqual(grid.points()[1], (8.395e-6, 20))

    def test_incomplete_grid(self):
        with self.assertRaisesMessage(ConfigError, 'incomplete'):
            read_grid_csv(io.StringIO('tau_s,N,contrast\n1e-6,20,0.1\n2e-6,40,0.2\n'))


class ModelRegistryTests(SimpleTestCase):
    def test_registered_models(self):
        for name in ('stretched_exp', 'damped_sine', 'damped_sine_stretched', 'multi_damped_sine',
                     'multi_lorentzian', 'multi_gaussian', 'double_gaussian_hist',
                     'saturation_pump_rate', 'sedor_osc', 'exp_decay'):
            self.assertIn(name, model_names())

    def test_unknown_model_lists_registry(self):
        with self.assertRaisesMessage(UnknownModelError, 'stretched_exp'):
            get_model('voigt')

    def test_default_components(self):
        self.assertEqual(len(get_model('multi_damped_sine')), 3 + 3 * 8)
        self.assertEqual(len(get_model('multi_lorentzian', 4)), 3 + 4)
        with self.assertRaises(ConfigError):
            get_model('multi_gaussian', 0)
        with self.assertRaises(ConfigError):
            get_model('line', 2)

    def test_pump_rate_saturates(self):
        model = get_model('saturation_pump_rate')
        value = model.evaluate(np.array([1e12]), {'gamma0': GAMMA_0, 'eta': 2019.0})[0]
        self.assertAlmostEqual(value / (GAMMA_0 / (2 * 2019.0)), 1.0, delta=1e-9)


class FitTests(SimpleTestCase):
    def test_line_is_exact(self):
        x = np.linspace(0, 1, 20)
        result = fit('line', DataSeries(x, 3 * x - 2))
        self.assertTrue(result.converged)
        self.assertAlmostEqual(result['a'], 3.0, delta=1e-10)
        self.assertAlmostEqual(result['b'], -2.0, delta=1e-10)

    def test_stretched_exponential(self):
        truth = {'a': 1.0, 'T': T2_HAHN, 'beta': 1.5, 'c': 0.0}
        data = synthetic('stretched_exp', truth, np.linspace(0, 1e-3, 200))
        result = fit('stretched_exp', data, init={'a': 1.05, 'T': 200e-6, 'beta': 1.4, 'c': 0.01})
        self.assertTrue(result.converged)
        for name in ('a', 'T', 'beta'):
            self.assertAlmostEqual(result[name] / truth[name], 1.0, delta=1e-6)
        self.assertAlmostEqual(result['c'], 0.0, delta=1e-7)

    def test_every_model_recovers_noiseless_parameters(self):
        cases = [
            ('exp_decay', {'a': 0.8, 'T': 0.296, 'c': 0.1}, np.linspace(0, 1.5, 120), None),
            ('sine', {'a': 0.4, 'omega': 300 * KHZ, 'phi': 0.3, 'c': 0.1}, np.linspace(0, 10e-6, 200), None),
            ('damped_sine', {'a': 0.5, 'omega': TWO_PI * 70.9e3, 'phi': 0.2, 'T': 40e-6, 'c': 0.1},
             np.linspace(0, 60e-6, 240), None),
            ('damped_sine_stretched',
             {'a': 0.4, 'omega': TWO_PI * 3e3, 'phi': 0.5, 'T': 6.14e-3, 'beta': 1.6, 'c': 0.2},
             np.linspace(0, 8e-3, 240), None),
            ('sedor_osc', {'a': 0.4, 'coupling': TWO_PI * 19.71, 'phi': 0.4, 'T': 0.1, 'beta': 1.5, 'c': 0.2},
             np.linspace(0, 0.2, 240), None),
            ('lorentzian', {'a': -0.4, 'x0': 0.3e6, 'gamma': 1e6, 'c': 1.0},
             np.linspace(-5e6, 5e6, 201), None),
            ('gaussian', {'a': 0.7, 'x0': 0.5, 'sigma': 1.2, 'c': 0.1}, np.linspace(-5, 5, 201), None),
            ('double_gaussian_hist',
             {'n_dark': 5000.0, 'mu_dark': 6.0, 'sigma_dark': 2.5,
              'n_bright': 5000.0, 'mu_bright': 20.5, 'sigma_bright': 4.5},
             np.arange(0.0, 40.0), None),
            ('saturation_pump_rate', {'gamma0': GAMMA_0, 'eta': 2019.0}, np.logspace(-1, 2, 30), None),
            ('multi_lorentzian', {'a': 0.5, 'gamma': 0.2e6, 'c': 0.1, 'x0_1': -1e6, 'x0_2': 1e6},
             np.linspace(-3e6, 3e6, 301), 2),
            ('multi_gaussian',
             {'c': 0.1, 'a_1': 1.0, 'x0_1': -1.0, 'sigma_1': 0.5, 'a_2': 0.6, 'x0_2': 1.5, 'sigma_2': 0.3},
             np.linspace(-4, 4, 161), 2),
            ('multi_damped_sine',
             {'T': 20e-6, 'beta': 1.2, 'c': 0.05, 'a_1': 0.4, 'omega_1': 200 * KHZ, 'phi_1': 0.2,
              'a_2': 0.3, 'omega_2': 530 * KHZ, 'phi_2': -0.4},
             np.linspace(0, 20e-6, 400), 2),
        ]
        for name, truth, x, components in cases:
            with self.subTest(model=name):
                data = synthetic(name, truth, x, components)
                result = fit(name, data, init=nudged(truth), components=components)
                self.assertTrue(result.converged)
                for parameter, value in truth.items():
                    self.assertAlmostEqual(result[parameter] / value, 1.0, delta=1e-4, msg=parameter)

    def test_negative_starting_values_keep_their_sign(self):
        truth = {'c': 0.1, 'a_1': 1.0, 'x0_1': -1.0, 'sigma_1': 0.5, 'a_2': 0.6, 'x0_2': 1.5, 'sigma_2': 0.3}
        data = synthetic('multi_gaussian', truth, np.linspace(-4, 4, 161), 2)
        result = fit('multi_gaussian', data, init=truth, components=2)
        self.assertTrue(result.converged)
        for parameter, value in truth.items():
            self.assertAlmostEqual(result[parameter], value, delta=1e-6, msg=parameter)
        truth = {'a': 0.5, 'gamma': 0.2e6, 'c': 0.1, 'x0_1': -1e6, 'x0_2': 1e6}
        data = synthetic('multi_lorentzian', truth, np.linspace(-3e6, 3e6, 301), 2)
        result = fit('multi_lorentzian', data, init=truth, components=2)
        self.assertAlmostEqual(result['x0_1'] / -1e6, 1.0, delta=1e-6)
        self.assertAlmostEqual(result['x0_2'] / 1e6, 1.0, delta=1e-6)

    def test_decay_time_reported_as_magnitude(self):
        truth = {'a': 0.4, 'omega': TWO_PI * 3e3, 'phi': 0.5, 'T': 6.14e-3, 'beta': 1.6, 'c': 0.2}
        data = synthetic('damped_sine_stretched', truth, np.linspace(0, 8e-3, 240))
        result = fit('damped_sine_stretched', data, init={**nudged(truth), 'T': -1.02 * truth['T']})
        self.assertAlmostEqual(result['T'] / truth['T'], 1.0, delta=1e-4)
        data = synthetic('gaussian', {'a': 0.7, 'x0': 0.5, 'sigma': 1.2, 'c': 0.1}, np.linspace(-5, 5, 201))
        result = fit('gaussian', data, init={'a': 0.7, 'x0': 0.5, 'sigma': -1.25, 'c': 0.1})
        self.assertAlmostEqual(result['sigma'], 1.2, delta=1e-6)

    def test_pump_rate_with_noise(self):
        model = get_model('saturation_pump_rate')
        s = np.logspace(-1, 2, 30)
        clean = model.evaluate(s, {'gamma0': GAMMA_0, 'eta': 2019.0})
        noisy = clean * (1 + 0.01 * np.random.default_rng(5).normal(size=len(s)))
        result = fit(model, DataSeries(s, noisy))
        self.assertEqual(result.fixed, ('gamma0',))
        self.assertEqual(result.sigma('gamma0'), 0.0)
        self.assertAlmostEqual(result['eta'] / 2019.0, 1.0, delta=0.05)

    def test_fixed_parameter(self):
        data = synthetic('stretched_exp', {'a': 1.0, 'T': T2_HAHN, 'beta': 1.5, 'c': 0.0},
                         np.linspace(0, 1e-3, 100))
        result = fit('stretched_exp', data, init={'T': 200e-6}, fixed={'c': 0.0, 'beta': 1.5})
        self.assertEqual(result['c'], 0.0)
        self.assertEqual(result.fixed, ('beta', 'c'))
        self.assertAlmostEqual(result['T'] / T2_HAHN, 1.0, delta=1e-6)

    def test_released_default_fixed(self):
        data = synthetic('saturation_pump_rate', {'gamma0': GAMMA_0, 'eta': 2019.0}, np.logspace(-1, 2, 30))
        result = fit('saturation_pump_rate', data, fixed={'gamma0': None}, max_iterations=50)
        self.assertEqual(result.fixed, ())

    def test_unknown_parameter_names(self):
        data = DataSeries([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
        with self.assertRaises(ConfigError):
            fit('line', data, fixed={'slope': 1.0})
        with self.assertRaises(ConfigError):
            fit('line', data, init={'slope': 1.0})

    def test_too_few_points(self):
        with self.assertRaises(ConfigError):
            fit('stretched_exp', DataSeries([0.0, 1.0, 2.0], [1.0, 0.5, 0.2]))

    def test_everything_fixed(self):
        with self.assertRaises(ConfigError):
            fit('line', DataSeries([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]), fixed={'a': 1.0, 'b': 0.0})

    def test_non_convergence_returns_best_so_far(self):
        data = synthetic('stretched_exp', {'a': 1.0, 'T': T2_HAHN, 'beta': 1.5, 'c': 0.0},
                         np.linspace(0, 1e-3, 100))
        with self.assertLogs('estimation.fitting', 'WARNING'):
            result = fit('stretched_exp', data, init={'a': 0.2, 'T': 20e-6, 'beta': 0.5, 'c': 0.5},
                         max_iterations=1)
        self.assertFalse(result.converged)
        self.assertTrue(all(math.isfinite(v) for v in result.params.values()))

    def test_bootstrap_is_seeded(self):
        rng = np.random.default_rng(9)
        x = np.linspace(0, 1, 30)
        data = DataSeries(x, 2 * x + 1 + 0.05 * rng.normal(size=len(x)))
        first = fit('line', data, bootstrap=20, rng_seed=4)
        second = fit('line', data, bootstrap=20, rng_seed=4)
        self.assertEqual(first.sigmas, second.sigmas)
        self.assertEqual(first.method, 'lm+bootstrap')
        self.assertGreater(first.sigma('a'), 0.0)

    def test_measurement_errors_weight_the_fit(self):
        x = np.linspace(0, 1, 10)
        data = DataSeries(x, 3 * x - 2, y_err=np.full(len(x), 0.1))
        result = fit('line', data)
        self.assertAlmostEqual(result['a'], 3.0, delta=1e-10)

    def test_histogram_threshold_round_trip(self):
        histogram = simulate_ssr(DEFAULT_MODEL, 0.5, 10_000, rng_seed=7)
        photons, occurrences = histogram.arrays()
        result = fit('double_gaussian_hist', DataSeries(photons, occurrences))
        fitted = SsrModel(
            bright_mean=result['mu_bright'], dark_mean=result['mu_dark'],
            bright_sigma=abs(result['sigma_bright']), dark_sigma=abs(result['sigma_dark']),
        )
        _, analytic = optimal_threshold(DEFAULT_MODEL)
        _, estimated = optimal_threshold(fitted)
        self.assertAlmostEqual(estimated, analytic, delta=0.01)


class SpectrumTests(SimpleTestCase):
    def test_single_tone(self):
        t = np.arange(100) * 1e-6
        spectrum = dft_spectrum(DataSeries(t, np.cos(TWO_PI * 50e3 * t)))
        self.assertEqual(spectrum.x_name, 'frequency_Hz')
        (frequency, _), = peak_guesses(spectrum, 1)
        self.assertAlmostEqual(frequency, 50e3, delta=1e-6)

    def test_off_bin_tone_within_one_bin(self):
        t = np.arange(200) * 1e-6
        spectrum = dft_spectrum(DataSeries(t, np.sin(TWO_PI * 123.4e3 * t)))
        (frequency, _), = peak_guesses(spectrum, 1)
        self.assertAlmostEqual(frequency, 123.4e3, delta=5e3)

    def test_two_sided_is_centred(self):
        t = np.arange(64) * 1e-6
        spectrum = dft_spectrum(DataSeries(t, np.cos(TWO_PI * 125e3 * t)), one_sided=False)
        self.assertEqual(len(spectrum), 64)
        low, high = sorted(f for f, _ in peak_guesses(spectrum, 2))
        self.assertAlmostEqual(low, -125e3, delta=1e-6)
        self.assertAlmostEqual(high, 125e3, delta=1e-6)

    def test_parseval(self):
        rng = np.random.default_rng(1)
        data = DataSeries(np.arange(257) * 0.5, rng.normal(size=257))
        time_sum, frequency_sum = parseval_sums(data)
        self.assertAlmostEqual(frequency_sum / time_sum, 1.0, delta=1e-9)

    def test_non_uniform_sampling(self):
        with self.assertRaises(ConfigError):
            dft_spectrum(DataSeries([0.0, 1.0, 3.0], [0.0, 1.0, 0.0]))

    def test_peaks_respect_separation(self):
        t = np.arange(400) * 1e-6
        y = np.cos(TWO_PI * 100e3 * t) + 0.5 * np.cos(TWO_PI * 300e3 * t)
        peaks = peak_guesses(dft_spectrum(DataSeries(t, y)), 5, min_separation=50e3)
        self.assertEqual([round(f) for f, _ in peaks[:2]], [100000, 300000])

    def test_ramsey_shows_eight_lines(self):
        params = table_register(3).evolve(tau_c0=math.inf)
        dt, points = 50e-9, 2000
        taus = np.arange(1, points + 1) * dt
        plan = experiment_plan('ramsey', taus, params, detuning=TWO_PI * 1e6)
        series = DataSeries(taus, run_plan(plan, params, Frame.fast(params), decoherence=False))
        spectrum = dft_spectrum(series)
        bin_width = spectrum.x[1] - spectrum.x[0]
        lines = sorted(f for f, _ in peak_guesses(spectrum, 8))
        self.assertEqual(len(lines), 8)
        self.assertAlmostEqual(lines[4] - lines[0], 1194e3, delta=bin_width)
        self.assertAlmostEqual(lines[2] - lines[0], 420e3, delta=bin_width)
        self.assertAlmostEqual(lines[1] - lines[0], 121e3, delta=bin_width)


class FormulaTests(SimpleTestCase):
    def test_beat_detuning(self):
        detuning = beat_detuning(TWO_PI * 83.47e3, TWO_PI * 201.80e3) / TWO_PI
        self.assertAlmostEqual(detuning, 183.73e3, delta=10)
        self.assertAlmostEqual(beat_detuning(TWO_PI * 19.5e3, TWO_PI * 43.0e3) / TWO_PI, 38.32e3, delta=10)
        self.assertEqual(beat_detuning(5.0, 5.0), 0.0)

    def test_beat_detuning_identity(self):
        low, high = 2.3e5, 7.1e5
        self.assertAlmostEqual((beat_detuning(low, high) ** 2 + low ** 2) / high ** 2, 1.0, delta=1e-12)

    def test_beat_detuning_order(self):
        with self.assertRaises(ConfigError):
            beat_detuning(2.0, 1.0)

    def test_ramsey_linewidth(self):
        self.assertAlmostEqual(ramsey_linewidth(5.688e-6, 1), 55.96e3, delta=10)
        ratio = ramsey_linewidth(5.688e-6, 2) / ramsey_linewidth(5.688e-6, 1)
        self.assertAlmostEqual(ratio, 1.6651, delta=1e-4)
        self.assertEqual(ramsey_linewidth(math.inf), 0.0)
        with self.assertRaises(ConfigError):
            ramsey_linewidth(5.688e-6, 3)
        with self.assertRaises(ConfigError):
            ramsey_linewidth(0.0)

    def test_exact_power_law(self):
        pairs = [(n, 1e-4 * n ** (2 / 3)) for n in (1, 2, 4, 8, 16)]
        result = cpmg_scaling_fit(pairs)
        self.assertAlmostEqual(result['chi'], 2 / 3, delta=1e-9)
        self.assertAlmostEqual(result['prefactor'], 1e-4, delta=1e-13)

    def test_reported_pairs(self):
        result = cpmg_scaling_fit([(1, 212.6e-6), (32, 1.312e-3)])
        self.assertAlmostEqual(result['chi'], 0.51, delta=0.05)

    def test_degenerate_pairs(self):
        for pairs in ([(1, 212.6e-6)], [(4, 1e-4), (4, 2e-4)], [(1, 1e-4), (2, 0.0)], [(0, 1e-4), (2, 1e-4)]):
            with self.subTest(pairs=pairs):
                with self.assertRaises(ConfigError):
                    cpmg_scaling_fit(pairs)

    def test_chi_from_propagated_cpmg_decays(self):
        params = RegisterParams(omega_L_e=TWO_PI * 9.414e9, omega_L_n=TWO_PI * 3.58e6, f_e=1.0,
                                tau_c0=T2_HAHN, beta=2.0, chi=CHI)
        rho0 = initial_density_matrix(params)
        t2_by_n = []
        for n in (1, 2, 4, 8, 16, 32):
            t2 = T2_HAHN * n ** CHI
            plan = experiment_plan('cpmg', np.linspace(0.1, 2.0, 12) * t2 / n, params, n=n)
            times, coherence = [], []
            for program in plan.programs:
                result = propagate(program, params, Frame.exact(params), rho0, record=True)
                (readout,) = [r for r in result.records if r['label'] == 'barrier']
                times.append(readout['t'])
                coherence.append(abs(spin_expectations(result.final_state, 0)['sz_e']))
            data = DataSeries(times, coherence)
            result = fit('stretched_exp', data, init={'a': 1.0, 'T': 1.1 * t2, 'beta': 1.8}, fixed={'c': 0.0})
            self.assertAlmostEqual(result['T'] / t2, 1.0, delta=1e-3, msg=f'N={n}')
            t2_by_n.append((n, result['T']))
        self.assertAlmostEqual(cpmg_scaling_fit(t2_by_n)['chi'], CHI, delta=0.03)


def toy_register(a_perp_khz=80.0):
    return RegisterParams(
        omega_L_e=TWO_PI * 9.414e9,
        omega_L_n=TWO_PI * 500e3,
        spins=[NuclearSpin(a_par=200 * KHZ, a_perp=a_perp_khz * KHZ, label='n1')],
        tau_c0=math.inf,
    )


class Xy2dTests(SimpleTestCase):
    taus = (0.98e-6, 1.0e-6, 1.02e-6)
    ns = (4, 8, 12)
    drive = DriveParams(mw_rabi=TWO_PI * 50e6)

    def test_parameter_names(self):
        self.assertEqual(parameter_names(table_register(4)),
                         ['omega_L_n', 'a_perp_1', 'a_perp_2', 'a_perp_3', 'a_perp_4', 'tau_c0', 'beta', 'chi'])

    def test_grid_shape_and_range(self):
        grid = simulate_xy_grid(toy_register(), self.drive, self.taus, self.ns)
        self.assertEqual(grid.values.shape, (3, 3))
        self.assertTrue(np.all(np.abs(grid.values) <= 1 + 1e-9))

    def test_worker_pool_matches_serial(self):
        serial = simulate_xy_grid(toy_register(), self.drive, self.taus, self.ns)
        pooled = simulate_xy_grid(toy_register(), self.drive, self.taus, self.ns, jobs=2)
        np.testing.assert_allclose(pooled.values, serial.values, atol=1e-12)

    def test_recovers_transverse_coupling(self):
        truth = toy_register()
        grid = simulate_xy_grid(truth, self.drive, self.taus, self.ns)
        result = fit_xy2d(grid, truth, self.drive, init={'a_perp_1': 1.03 * 80 * KHZ},
                          fixed={'beta': 1.0, 'chi': 1.0})
        self.assertTrue(result.converged)
        self.assertIn('tau_c0', result.fixed)
        self.assertAlmostEqual(result['a_perp_1'] / (80 * KHZ), 1.0, delta=1e-4)
        self.assertAlmostEqual(result['omega_L_n'] / truth.omega_L_n, 1.0, delta=1e-6)

    def test_unknown_parameter(self):
        grid = Grid2D(self.taus, self.ns, np.zeros((3, 3)))
        with self.assertRaises(ConfigError):
            fit_xy2d(grid, toy_register(), self.drive, fixed={'a_perp_2': 1.0})
        with self.assertRaises(ConfigError):
            fit_xy2d(grid, toy_register(), self.drive, init={'a_perp_1': 80 * KHZ, 'a_par_1': 1.0})

    def test_initial_values_for_fitted_names(self):
        truth = toy_register()
        grid = simulate_xy_grid(truth, self.drive, self.taus, self.ns)
        result = fit_xy2d(grid, truth, self.drive, init={'omega_L_n': truth.omega_L_n},
                          fixed={'a_perp_1': 80 * KHZ, 'beta': 1.0, 'chi': 1.0})
        self.assertEqual(set(result.fixed), {'a_perp_1', 'beta', 'chi', 'tau_c0'})
        self.assertAlmostEqual(result['omega_L_n'] / truth.omega_L_n, 1.0, delta=1e-9)


class SerializerTests(SimpleTestCase):
    def fitted(self):
        x = np.linspace(0, 1, 10)
        return fit('line', DataSeries(x, 3 * x - 2))

    def test_document_matches_schema(self):
        document = fit_result_document(self.fitted())
        self.assertEqual(document['model'], 'line')
        self.assertEqual(set(document['params']), {'a', 'b'})
        self.assertEqual(set(FIT_RESULT_SCHEMA['required']) - set(document), set())

    def test_json_round_trip(self):
        result = self.fitted()
        text = dump_fit_result(result)
        loaded = load_fit_result(text)
        self.assertEqual(loaded.params, result.params)
        self.assertEqual(loaded.converged, result.converged)
        self.assertEqual(text, dump_fit_result(loaded))

    def test_non_finite_values_become_null(self):
        broken = attrs.evolve(self.fitted(), params={'a': math.nan, 'b': 1.0})
        self.assertIsNone(json.loads(dump_fit_result(broken))['params']['a'])

    def test_rejects_malformed_documents(self):
        with self.assertRaises(ConfigError):
            load_fit_result('{"model": "line"}')
        with self.assertRaises(ConfigError):
            load_fit_result('not json')

    def test_parameter_values(self):
        self.assertEqual(load_parameter_values('{"T": 2e-4, "c": null}'), {'T': 2e-4, 'c': None})
        with self.assertRaisesMessage(ConfigError, 'line 1'):
            load_parameter_values('{"T": }')
        with self.assertRaises(ConfigError):
            load_parameter_values('{"T": "fast"}')
