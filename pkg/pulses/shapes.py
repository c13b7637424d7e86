"""
Pulse envelopes and their piecewise-constant sampling.

A truncated sinc pulse of bandwidth B lasts T = 4/B and keeps the negative
side lobes between the first and second zero crossings. Sampled steps keep
the Rabi frequency non-negative and encode the sign as a pi phase shift.
"""

import math

import attrs
import numpy as np
from django.conf import settings
from scipy import integrate
from scipy.special import sici

from spinreg.exceptions import ConfigError

RECT = 'rect'
SINC = 'sinc_trunc'
KINDS = (RECT, SINC)

# integral of sin(u)/u over [-2pi, 2pi]
SINC_LOBE_INTEGRAL = 2 * sici(2 * math.pi)[0]


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError(f'{attribute.name} must be > 0, got {value}')


@attrs.frozen
class Envelope:
    kind: str = attrs.field(validator=attrs.validators.in_(KINDS))
    duration: float = attrs.field(validator=_positive)
    peak_rabi: float
    bandwidth: float | None = None
    carrier_detuning: float = 0.0
    phase: float = 0.0

    def __attrs_post_init__(self):
        if self.peak_rabi < 0:
            raise ConfigError(f'peak_rabi must be >= 0, got {self.peak_rabi}')
        if self.kind == SINC:
            if not self.bandwidth or self.bandwidth <= 0:
                raise ConfigError('a sinc envelope needs a positive bandwidth')
            if not math.isclose(self.duration, 4 / self.bandwidth, rel_tol=1e-12):
                raise ConfigError('a truncated sinc lasts exactly 4/bandwidth')

    def amplitude(self, t):
        """Signed Rabi frequency at time(s) ``t`` within the pulse."""
        t = np.asarray(t, dtype=float)
        if self.kind == RECT:
            return np.full_like(t, self.peak_rabi)
        return self.peak_rabi * np.sinc(self.bandwidth * (t - self.duration / 2))

    def area(self):
        """Signed pulse area (rotation angle for a resonant two-level system)."""
        if self.kind == RECT:
            return self.peak_rabi * self.duration
        return self.peak_rabi * SINC_LOBE_INTEGRAL / (math.pi * self.bandwidth)

    def quadrature_area(self, samples=10_000):
        """Numerical area cross-check, by quadrature over ``samples`` points."""
        t = np.linspace(0.0, self.duration, samples + 1)
        return float(integrate.simpson(self.amplitude(t), x=t))

    def primitive(self, t):
        """Antiderivative of the signed amplitude, zero at t = 0."""
        if self.kind == RECT:
            return self.peak_rabi * np.asarray(t, dtype=float)
        scale = math.pi * self.bandwidth
        x = scale * (np.asarray(t, dtype=float) - self.duration / 2)
        return self.peak_rabi * (sici(x)[0] - sici(-scale * self.duration / 2)[0]) / scale

    def with_rotation(self, rotation_angle):
        """Same shape, peak rescaled so the area equals ``rotation_angle``."""
        unit = attrs.evolve(self, peak_rabi=1.0)
        return attrs.evolve(self, peak_rabi=rotation_angle / unit.area())

    def shifted(self, carrier_detuning=None, phase=None):
        changes = {}
        if carrier_detuning is not None:
            changes['carrier_detuning'] = carrier_detuning
        if phase is not None:
            changes['phase'] = phase
        return attrs.evolve(self, **changes)


@attrs.frozen(eq=False)
class SampledPulse:
    dt: float
    rabi: np.ndarray
    phase: np.ndarray
    detuning: float
    base_phase: float = 0.0

    @property
    def steps(self):
        return list(zip(self.rabi, self.phase, [self.detuning] * len(self.rabi)))

    def __len__(self):
        return len(self.rabi)

    def area(self):
        signs = np.where(np.isclose(np.mod(self.phase - self.base_phase, 2 * math.pi), math.pi), -1.0, 1.0)
        return float(np.sum(signs * self.rabi) * self.dt)


def make_sinc(bandwidth, rotation_angle, carrier_detuning=0.0, phase=0.0):
    """Truncated sinc of ``bandwidth`` Hz whose signed area is ``rotation_angle``."""
    if not bandwidth > 0:
        raise ConfigError(f'bandwidth must be > 0, got {bandwidth}')
    if not rotation_angle > 0:
        raise ConfigError(f'rotation angle must be > 0, got {rotation_angle}')
    peak = rotation_angle * math.pi * bandwidth / SINC_LOBE_INTEGRAL
    return Envelope(SINC, 4 / bandwidth, peak, bandwidth=bandwidth,
                    carrier_detuning=carrier_detuning, phase=phase)


def make_rect(omega_r, rotation_angle, carrier_detuning=0.0, phase=0.0):
    """Constant-amplitude pulse lasting ``rotation_angle / omega_r``."""
    if not omega_r > 0:
        raise ConfigError(f'Rabi frequency must be > 0, got {omega_r}')
    if not rotation_angle > 0:
        raise ConfigError(f'rotation angle must be > 0, got {rotation_angle}')
    return Envelope(RECT, rotation_angle / omega_r, omega_r,
                    carrier_detuning=carrier_detuning, phase=phase)


def default_max_dt(duration, max_frequency=0.0):
    """min(duration / steps_per_pulse, 1 / (steps_per_period * f_max)); ``max_frequency`` in Hz."""
    spinreg = getattr(settings, 'SPINREG', {})
    configured = spinreg.get('MAX_DT')
    if configured:
        return configured
    bound = duration / spinreg.get('STEPS_PER_PULSE', 200)
    if max_frequency > 0:
        bound = min(bound, 1 / (spinreg.get('STEPS_PER_PERIOD', 20) * max_frequency))
    return bound


def sample(env, max_dt):
    """Piecewise-constant steps whose areas match the envelope step by step."""
    if not max_dt > 0:
        raise ConfigError(f'max_dt must be > 0, got {max_dt}')
    n_steps = max(1, math.ceil(env.duration / max_dt - 1e-9))
    dt = env.duration / n_steps
    edges = np.linspace(0.0, env.duration, n_steps + 1)
    if env.kind == RECT:
        signed = np.full(n_steps, env.peak_rabi)
    else:
        signed = np.diff(env.primitive(edges)) / dt
    rabi = np.abs(signed)
    phase = np.where(signed < 0, env.phase + math.pi, env.phase)
    return SampledPulse(dt=dt, rabi=rabi, phase=phase, detuning=env.carrier_detuning, base_phase=env.phase)
