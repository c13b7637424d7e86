"""
Single-shot nuclear readout: photon statistics, thresholds and the
classical branching built on them.

Counts are rounded, non-negative Gaussian draws (Poisson draws with
``poisson=True``). A shot is called bright when its count reaches the
threshold.
"""

import logging
import math
from collections import Counter

import attrs
import numpy as np
from scipy.special import erf

from spinreg.exceptions import ConfigError

logger = logging.getLogger(__name__)

SSR_WINDOW = 5e-3


def _non_negative(instance, attribute, value):
    if value < 0:
        raise ConfigError(f'{attribute.name} must be >= 0, got {value}')


@attrs.frozen
class SsrModel:
    bright_mean: float
    dark_mean: float = attrs.field(validator=_non_negative)
    bright_sigma: float = attrs.field(default=0.0, validator=_non_negative)
    dark_sigma: float = attrs.field(default=0.0, validator=_non_negative)

    def __attrs_post_init__(self):
        if not self.bright_mean > self.dark_mean:
            raise ConfigError(
                f'bright mean {self.bright_mean} must exceed dark mean {self.dark_mean}'
            )


# Tuned for a ~0.98 discrimination fidelity over a 5 ms window.
DEFAULT_MODEL = SsrModel(bright_mean=20.5, dark_mean=6.0, bright_sigma=4.5, dark_sigma=2.5)


@attrs.define
class PhotonHistogram:
    bin_counts: dict
    window: float = SSR_WINDOW
    repetitions: int = 0

    def __attrs_post_init__(self):
        self.bin_counts = {int(k): int(v) for k, v in sorted(self.bin_counts.items())}
        if any(v < 0 for v in self.bin_counts.values()):
            raise ConfigError('histogram occurrences must be >= 0')
        if any(k < 0 for k in self.bin_counts):
            raise ConfigError('photon counts must be >= 0')
        total = sum(self.bin_counts.values())
        if not self.repetitions:
            self.repetitions = total
        if total != self.repetitions:
            raise ConfigError(f'histogram holds {total} shots, expected {self.repetitions}')

    def arrays(self):
        """(photon numbers, occurrences) over the full 0..max range."""
        top = max(self.bin_counts, default=0)
        photons = np.arange(top + 1)
        occurrences = np.array([self.bin_counts.get(k, 0) for k in photons], dtype=float)
        return photons, occurrences

    def mean(self):
        photons, occurrences = self.arrays()
        return float(np.dot(photons, occurrences) / max(self.repetitions, 1))

    def fraction_at_or_above(self, threshold):
        above = sum(v for k, v in self.bin_counts.items() if k >= threshold)
        return above / self.repetitions if self.repetitions else 0.0

    def merged(self, other):
        counts = Counter(self.bin_counts)
        counts.update(other.bin_counts)
        return PhotonHistogram(dict(counts), self.window, self.repetitions + other.repetitions)


def _draw(model, bright, rng, poisson):
    means = np.where(bright, model.bright_mean, model.dark_mean)
    if poisson:
        return rng.poisson(means)
    sigmas = np.where(bright, model.bright_sigma, model.dark_sigma)
    return np.clip(np.rint(rng.normal(means, sigmas)), 0, None).astype(int)


def simulate_ssr(model, state_prob_bright, repetitions, rng_seed=None, poisson=False,
                 window=SSR_WINDOW, rng=None):
    """Histogram of ``repetitions`` shots; each shot is bright with ``state_prob_bright``."""
    if not 0 <= state_prob_bright <= 1:
        raise ConfigError(f'bright probability must lie in [0, 1], got {state_prob_bright}')
    if repetitions < 1:
        raise ConfigError(f'repetitions must be >= 1, got {repetitions}')
    rng = rng if rng is not None else np.random.default_rng(rng_seed)
    bright = rng.random(repetitions) < state_prob_bright
    counts = _draw(model, bright, rng, poisson)
    return PhotonHistogram(dict(Counter(counts.tolist())), window, repetitions)


def _below(mean, sigma, threshold):
    """P(X < threshold) for X ~ N(mean, sigma)."""
    if sigma == 0:
        return 1.0 if mean < threshold else 0.0
    return 0.5 * (1 + erf((threshold - mean) / (sigma * math.sqrt(2))))


def error_rates(model, threshold):
    """(P(bright shot below threshold), P(dark shot at or above threshold))."""
    return (
        _below(model.bright_mean, model.bright_sigma, threshold),
        1 - _below(model.dark_mean, model.dark_sigma, threshold),
    )


def threshold_fidelity(model, threshold):
    missed_bright, false_bright = error_rates(model, threshold)
    return 1 - 0.5 * (missed_bright + false_bright)


def _intersection(model):
    mu_d, mu_b = model.dark_mean, model.bright_mean
    s_d, s_b = model.dark_sigma, model.bright_sigma
    midpoint = (mu_d + mu_b) / 2
    if s_d == 0 or s_b == 0 or math.isclose(s_d, s_b):
        return midpoint
    a = 1 / s_d ** 2 - 1 / s_b ** 2
    b = -2 * (mu_d / s_d ** 2 - mu_b / s_b ** 2)
    c = mu_d ** 2 / s_d ** 2 - mu_b ** 2 / s_b ** 2 - 2 * math.log(s_b / s_d)
    roots = np.roots([a, b, c])
    roots = [r.real for r in roots if abs(r.imag) < 1e-12]
    between = [r for r in roots if mu_d <= r <= mu_b]
    candidates = between or roots or [midpoint]
    return min(candidates, key=lambda r: abs(r - midpoint))


def optimal_threshold(model):
    """Threshold at the intersection of the two densities and its fidelity."""
    if math.isclose(model.bright_mean, model.dark_mean):
        return model.dark_mean, 0.5
    threshold = float(_intersection(model))
    return threshold, threshold_fidelity(model, threshold)


@attrs.frozen
class AlternatingReadout:
    first: PhotonHistogram
    second: PhotonHistogram
    population: float
    threshold: float


def alternating_ssr(model, state_prob_bright, repetitions, rng_seed=None, poisson=False):
    """Interleave readouts of both nuclear lines; the second histogram's labels are swapped.

    ``population`` is the bright-state population estimated from both halves.
    """
    rng = np.random.default_rng(rng_seed)
    half = max(repetitions // 2, 1)
    first = simulate_ssr(model, state_prob_bright, half, poisson=poisson, rng=rng)
    second = simulate_ssr(model, 1 - state_prob_bright, half, poisson=poisson, rng=rng)
    threshold, _ = optimal_threshold(model)
    population = (first.fraction_at_or_above(threshold) + 1 - second.fraction_at_or_above(threshold)) / 2
    return AlternatingReadout(first, second, population, threshold)


def active_feedback_population(model, state_prob_bright, threshold=None):
    """Population in the bright state after one SSR and a conditional flip of dark shots."""
    if threshold is None:
        threshold, _ = optimal_threshold(model)
    missed_bright, false_bright = error_rates(model, threshold)
    p = state_prob_bright
    return p * (1 - missed_bright) + (1 - p) * (1 - false_bright)


def simulate_active_feedback(model, state_prob_bright, repetitions, rng_seed=None, threshold=None):
    """Shot-by-shot version of :func:`active_feedback_population`."""
    if threshold is None:
        threshold, _ = optimal_threshold(model)
    rng = np.random.default_rng(rng_seed)
    bright = rng.random(repetitions) < state_prob_bright
    counts = _draw(model, bright, rng, poisson=False)
    flipped = counts < threshold
    final = np.where(flipped, ~bright, bright)
    return float(np.mean(final))


@attrs.frozen
class PostSelection:
    fidelity: float
    acceptance: float


def post_select(model, state_prob_bright, threshold=None):
    """Keep only shots called bright in an extra SSR window."""
    if threshold is None:
        threshold, _ = optimal_threshold(model)
    missed_bright, false_bright = error_rates(model, threshold)
    kept_good = state_prob_bright * (1 - missed_bright)
    kept_bad = (1 - state_prob_bright) * false_bright
    acceptance = kept_good + kept_bad
    if acceptance == 0:
        logger.warning('post-selection rejects every shot')
        return PostSelection(0.0, 0.0)
    return PostSelection(kept_good / acceptance, acceptance)
