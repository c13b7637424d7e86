import math

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from spinreg.exceptions import ConfigError

from .shapes import RECT, default_max_dt, make_rect, make_sinc, sample

TWO_PI = 2 * math.pi


class SincTests(SimpleTestCase):
    def test_duration_is_four_over_bandwidth(self):
        env = make_sinc(150e3, math.pi)
        self.assertAlmostEqual(env.duration, 26.6667e-6, delta=1e-10)

    def test_area_normalization(self):
        env = make_sinc(1200e3, math.pi)
        self.assertAlmostEqual(env.duration, 3.3333e-6, delta=1e-10)
        self.assertAlmostEqual(env.area(), math.pi, delta=1e-12)
        self.assertAlmostEqual(env.quadrature_area(10_000), math.pi, delta=1e-6)

    def test_peak_monotone_in_angle(self):
        peaks = [make_sinc(500e3, angle).peak_rabi for angle in (0.5, 1.0, math.pi, 2 * math.pi)]
        self.assertEqual(peaks, sorted(peaks))

    def test_rejects_non_positive_angle(self):
        with self.assertRaises(ConfigError):
            make_sinc(500e3, 0.0)

    def test_with_rotation_rescales(self):
        env = make_sinc(150e3, math.pi).with_rotation(2 * math.pi)
        self.assertAlmostEqual(env.area(), 2 * math.pi, delta=1e-12)


class RectTests(SimpleTestCase):
    def test_electron_pi_pulse(self):
        env = make_rect(TWO_PI * 70.92898936e3, math.pi)
        self.assertAlmostEqual(env.duration * 1e6, 7.049, delta=1e-3)

    def test_two_pi_doubles(self):
        omega = TWO_PI * 70.92898936e3
        self.assertAlmostEqual(make_rect(omega, 2 * math.pi).duration, 2 * make_rect(omega, math.pi).duration)

    def test_low_power_pi_pulse(self):
        env = make_rect(TWO_PI * 5.49e3, math.pi)
        self.assertAlmostEqual(env.duration * 1e6, 91.07, delta=0.01)

    def test_rect_area_is_rabi_times_duration(self):
        env = make_rect(TWO_PI * 1e6, math.pi / 2)
        self.assertAlmostEqual(env.area(), math.pi / 2, delta=1e-12)
        self.assertEqual(env.kind, RECT)


class SampleTests(SimpleTestCase):
    def test_rect_is_constant(self):
        steps = sample(make_rect(TWO_PI * 1e6, math.pi), 1e-9)
        self.assertEqual(len(set(steps.rabi.tolist())), 1)

    def test_step_count(self):
        self.assertEqual(len(sample(make_sinc(150e3, math.pi), 50e-9)), 534)

    def test_area_preserved(self):
        for bandwidth in (1200e3, 500e3, 150e3, 40e3):
            env = make_sinc(bandwidth, math.pi)
            steps = sample(env, env.duration / 100)
            self.assertAlmostEqual(steps.area() / env.area(), 1.0, delta=1e-3)
            self.assertAlmostEqual(len(steps) * steps.dt, env.duration, delta=steps.dt)

    def test_symmetric_about_midpoint(self):
        env = make_sinc(150e3, math.pi)
        steps = sample(env, 50e-9)
        np.testing.assert_allclose(steps.rabi, steps.rabi[::-1], rtol=0, atol=1e-12 * env.peak_rabi)

    def test_negative_lobes_become_phase_flips(self):
        steps = sample(make_sinc(500e3, math.pi, phase=0.25), 10e-9)
        self.assertTrue(np.all(steps.rabi >= 0))
        self.assertTrue(np.any(np.isclose(steps.phase, 0.25 + math.pi)))

    def test_rejects_non_positive_step(self):
        with self.assertRaises(ConfigError):
            sample(make_rect(1.0, 1.0), 0.0)

    @override_settings(SPINREG={**settings.SPINREG, 'STEPS_PER_PULSE': 200, 'STEPS_PER_PERIOD': 20})
    def test_default_step_bound(self):
        self.assertAlmostEqual(default_max_dt(2e-6), 1e-8)
        self.assertAlmostEqual(default_max_dt(2e-6, max_frequency=10e6), 5e-9)
