"""
Registry of fit models.

Every model is a function ``f(x, *params)`` with named parameters, an
initial-guess heuristic ``guess(x, y) -> dict`` and optional default-fixed
parameters. Multi-component models take a component count.
"""

import math

import attrs
import numpy as np

from spinreg.exceptions import ConfigError, UnknownModelError

from .data import DataSeries
from .spectrum import angular, dft_spectrum, dominant_frequency, peak_guesses

GAMMA_0 = 1 / 1.65e-9


@attrs.frozen
class FitModel:
    name: str
    param_names: tuple = attrs.field(converter=tuple)
    function: object = attrs.field(eq=False)
    guess: object = attrs.field(eq=False)
    fixed: dict = attrs.field(factory=dict, eq=False)
    formula: str = ''
    # parameters that enter squared or under abs(); fits report their magnitude
    magnitudes: tuple = attrs.field(default=(), converter=tuple)

    def evaluate(self, x, params):
        values = [params[name] for name in self.param_names]
        return self.function(np.asarray(x, dtype=float), *values)

    def __len__(self):
        return len(self.param_names)


def _offset_amplitude(y):
    return float(np.mean(y)), float((np.max(y) - np.min(y)) / 2)


def _decay_time(x, y, c, a):
    """First x where |y - c| falls below |a| / e."""
    if a == 0:
        return float(x[-1] - x[0]) or 1.0
    below = np.nonzero(np.abs(y - c) < abs(a) / math.e)[0]
    if len(below):
        return float(max(x[below[0]], (x[-1] - x[0]) / len(x)))
    return float(x[-1])


def _line(x, a, b):
    return a * x + b


def _guess_line(x, y):
    a, b = np.polyfit(x, y, 1)
    return {'a': float(a), 'b': float(b)}


def _exp_decay(x, a, T, c):
    return a * np.exp(-x / T) + c


def _guess_exp_decay(x, y):
    c = float(y[-1])
    a = float(y[0] - c)
    return {'a': a, 'T': _decay_time(x, y, c, a), 'c': c}


def _stretched(x, T, beta):
    return np.exp(-np.abs(x / T) ** beta)


def _stretched_exp(x, a, T, beta, c):
    return a * _stretched(x, T, beta) + c


def _guess_stretched_exp(x, y):
    guess = _guess_exp_decay(x, y)
    return {**guess, 'beta': 1.0}


def _sine(x, a, omega, phi, c):
    return a * np.sin(omega * x + phi) + c


def _guess_sine(x, y):
    c, a = _offset_amplitude(y)
    return {'a': a, 'omega': angular(dominant_frequency(x, y)), 'phi': 0.0, 'c': c}


def _damped_sine(x, a, omega, phi, T, c):
    return a * np.sin(omega * x + phi) * np.exp(-x / T) + c


def _guess_damped_sine(x, y):
    guess = _guess_sine(x, y)
    return {**guess, 'T': float(x[-1] - x[0]) or 1.0}


def _damped_sine_stretched(x, a, omega, phi, T, beta, c):
    return a * np.sin(omega * x + phi) * _stretched(x, T, beta) + c


def _guess_damped_sine_stretched(x, y):
    return {**_guess_damped_sine(x, y), 'beta': 1.0}


def _sedor_osc(x, a, coupling, phi, T, beta, c):
    return _damped_sine_stretched(x, a, coupling, phi, T, beta, c)


def _guess_sedor_osc(x, y):
    guess = _guess_damped_sine_stretched(x, y)
    guess['coupling'] = guess.pop('omega')
    return guess


def _lorentz(x, x0, gamma):
    half = gamma / 2
    return half ** 2 / ((x - x0) ** 2 + half ** 2)


def _lorentzian(x, a, x0, gamma, c):
    return a * _lorentz(x, x0, gamma) + c


def _extremum(x, y):
    c = float(np.median(y))
    index = int(np.argmax(np.abs(y - c)))
    return c, float(y[index] - c), float(x[index])


def _guess_lorentzian(x, y):
    c, a, x0 = _extremum(x, y)
    return {'a': a, 'x0': x0, 'gamma': float(x[-1] - x[0]) / 10 or 1.0, 'c': c}


def _gaussian(x, a, x0, sigma, c):
    return a * np.exp(-((x - x0) ** 2) / (2 * sigma ** 2)) + c


def _guess_gaussian(x, y):
    c, a, x0 = _extremum(x, y)
    return {'a': a, 'x0': x0, 'sigma': float(x[-1] - x[0]) / 10 or 1.0, 'c': c}


def _normal_density(x, n, mu, sigma):
    return n * np.exp(-((x - mu) ** 2) / (2 * sigma ** 2)) / (abs(sigma) * math.sqrt(2 * math.pi))


def _double_gaussian_hist(x, n_dark, mu_dark, sigma_dark, n_bright, mu_bright, sigma_bright):
    return _normal_density(x, n_dark, mu_dark, sigma_dark) + _normal_density(x, n_bright, mu_bright, sigma_bright)


def _guess_double_gaussian_hist(x, y):
    weights = np.clip(y, 0, None)
    total = float(weights.sum()) or 1.0
    split = float(np.dot(x, weights) / total)
    guess = {}
    for label, side in (('dark', x < split), ('bright', x >= split)):
        w = weights[side]
        n = float(w.sum())
        if n > 0:
            mu = float(np.dot(x[side], w) / n)
            sigma = float(math.sqrt(max(np.dot((x[side] - mu) ** 2, w) / n, 0.25)))
        else:
            mu, sigma = split, 1.0
        guess.update({f'n_{label}': n, f'mu_{label}': mu, f'sigma_{label}': sigma})
    return guess


def _saturation_pump_rate(s, gamma0, eta):
    return gamma0 / (2 * eta) * s / (1 + s)


def _guess_saturation_pump_rate(s, y):
    top = float(np.max(np.abs(y))) or 1.0
    saturation = float(s[-1] / (1 + s[-1]))
    return {'gamma0': GAMMA_0, 'eta': GAMMA_0 * saturation / (2 * top)}


def _spectral_peaks(x, y, count):
    try:
        peaks = peak_guesses(dft_spectrum(DataSeries(x, y)), count)
    except ConfigError:
        peaks = []
    frequencies = [f for f, _ in peaks]
    span = x[-1] - x[0] if len(x) > 1 else 1.0
    while len(frequencies) < count:
        frequencies.append((len(frequencies) + 1) / span)
    return frequencies


def multi_damped_sine(components):
    names = ['T', 'beta', 'c']
    for i in range(1, components + 1):
        names += [f'a_{i}', f'omega_{i}', f'phi_{i}']

    def function(x, T, beta, c, *terms):
        total = np.zeros_like(x)
        for a, omega, phi in zip(terms[0::3], terms[1::3], terms[2::3]):
            total = total + a * np.sin(omega * x + phi)
        return _stretched(x, T, beta) * total + c

    def guess(x, y):
        c, a = _offset_amplitude(y)
        values = {'T': float(x[-1] - x[0]) or 1.0, 'beta': 1.0, 'c': c}
        for i, f in enumerate(_spectral_peaks(x, y, components), start=1):
            values.update({f'a_{i}': a / components, f'omega_{i}': angular(f), f'phi_{i}': 0.0})
        return values

    return FitModel(
        'multi_damped_sine', names, function, guess,
        magnitudes=('T',),
        formula='exp(-(x/T)^beta) * sum a_i sin(omega_i x + phi_i) + c',
    )


def multi_lorentzian(components):
    names = ['a', 'gamma', 'c'] + [f'x0_{i}' for i in range(1, components + 1)]

    def function(x, a, gamma, c, *centres):
        return a * sum(_lorentz(x, x0, gamma) for x0 in centres) + c

    def guess(x, y):
        c = float(np.median(y))
        order = np.argsort(-np.abs(y - c), kind='stable')
        span = float(x[-1] - x[0]) or 1.0
        centres = []
        for index in order:
            if all(abs(x[index] - other) > span / (4 * components) for other in centres):
                centres.append(float(x[index]))
            if len(centres) == components:
                break
        while len(centres) < components:
            centres.append(float(x[0] + span * (len(centres) + 1) / (components + 1)))
        values = {'a': float(y[order[0]] - c), 'gamma': span / (10 * components), 'c': c}
        values.update({f'x0_{i}': x0 for i, x0 in enumerate(sorted(centres), start=1)})
        return values

    return FitModel('multi_lorentzian', names, function, guess, magnitudes=('gamma',),
                    formula='a * sum L(x, x0_i, gamma) + c')


def multi_gaussian(components):
    names = ['c']
    for i in range(1, components + 1):
        names += [f'a_{i}', f'x0_{i}', f'sigma_{i}']

    def function(x, c, *terms):
        total = np.full_like(x, c)
        for a, x0, sigma in zip(terms[0::3], terms[1::3], terms[2::3]):
            total = total + a * np.exp(-((x - x0) ** 2) / (2 * sigma ** 2))
        return total

    def guess(x, y):
        c = float(np.median(y))
        span = float(x[-1] - x[0]) or 1.0
        values = {'c': c}
        residual = y - c
        for i in range(1, components + 1):
            index = int(np.argmax(np.abs(residual)))
            sigma = span / (10 * components)
            values.update({f'a_{i}': float(residual[index]), f'x0_{i}': float(x[index]), f'sigma_{i}': sigma})
            residual = residual - _gaussian(x, residual[index], x[index], sigma, 0.0)
        return values

    return FitModel('multi_gaussian', names, function, guess,
                    magnitudes=[f'sigma_{i}' for i in range(1, components + 1)],
                    formula='sum a_i exp(-(x - x0_i)^2 / 2 sigma_i^2) + c')


_SIMPLE = {
    'line': FitModel('line', ('a', 'b'), _line, _guess_line, formula='a x + b'),
    'exp_decay': FitModel('exp_decay', ('a', 'T', 'c'), _exp_decay, _guess_exp_decay,
                          formula='a exp(-x/T) + c'),
    'stretched_exp': FitModel('stretched_exp', ('a', 'T', 'beta', 'c'), _stretched_exp,
                              _guess_stretched_exp, formula='a exp(-(x/T)^beta) + c', magnitudes=('T',)),
    'sine': FitModel('sine', ('a', 'omega', 'phi', 'c'), _sine, _guess_sine,
                     formula='a sin(omega x + phi) + c'),
    'damped_sine': FitModel('damped_sine', ('a', 'omega', 'phi', 'T', 'c'), _damped_sine,
                            _guess_damped_sine, formula='a sin(omega x + phi) exp(-x/T) + c'),
    'damped_sine_stretched': FitModel(
        'damped_sine_stretched', ('a', 'omega', 'phi', 'T', 'beta', 'c'), _damped_sine_stretched,
        _guess_damped_sine_stretched, formula='a sin(omega x + phi) exp(-(x/T)^beta) + c',
        magnitudes=('T',),
    ),
    'sedor_osc': FitModel(
        'sedor_osc', ('a', 'coupling', 'phi', 'T', 'beta', 'c'), _sedor_osc, _guess_sedor_osc,
        formula='a sin(coupling x + phi) exp(-(x/T)^beta) + c', magnitudes=('T',),
    ),
    'lorentzian': FitModel('lorentzian', ('a', 'x0', 'gamma', 'c'), _lorentzian, _guess_lorentzian,
                           formula='a L(x, x0, gamma) + c', magnitudes=('gamma',)),
    'gaussian': FitModel('gaussian', ('a', 'x0', 'sigma', 'c'), _gaussian, _guess_gaussian,
                         formula='a exp(-(x - x0)^2 / 2 sigma^2) + c', magnitudes=('sigma',)),
    'double_gaussian_hist': FitModel(
        'double_gaussian_hist',
        ('n_dark', 'mu_dark', 'sigma_dark', 'n_bright', 'mu_bright', 'sigma_bright'),
        _double_gaussian_hist, _guess_double_gaussian_hist,
        formula='n_dark N(x; mu_dark, sigma_dark) + n_bright N(x; mu_bright, sigma_bright)',
        magnitudes=('sigma_dark', 'sigma_bright'),
    ),
    'saturation_pump_rate': FitModel(
        'saturation_pump_rate', ('gamma0', 'eta'), _saturation_pump_rate, _guess_saturation_pump_rate,
        fixed={'gamma0': GAMMA_0}, formula='gamma0 / (2 eta) * s / (1 + s)',
    ),
}

_MULTI = {
    'multi_damped_sine': multi_damped_sine,
    'multi_lorentzian': multi_lorentzian,
    'multi_gaussian': multi_gaussian,
}

DEFAULT_COMPONENTS = {'multi_damped_sine': 8, 'multi_lorentzian': 8, 'multi_gaussian': 2}


def model_names():
    return sorted([*_SIMPLE, *_MULTI])


def get_model(name, components=None):
    if name in _SIMPLE:
        if components is not None:
            raise ConfigError(f'model {name!r} has no components')
        return _SIMPLE[name]
    if name in _MULTI:
        components = DEFAULT_COMPONENTS[name] if components is None else int(components)
        if components < 1:
            raise ConfigError(f'{name} needs at least one component, got {components}')
        return _MULTI[name](components)
    raise UnknownModelError(f'unknown fit model {name!r}; registered: {", ".join(model_names())}')
