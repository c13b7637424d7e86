"""Discrete Fourier spectra of uniformly sampled series and peak seeding."""

import math

import numpy as np

from spinreg.exceptions import ConfigError

from .data import DataSeries

UNIFORM_RTOL = 1e-9


def sample_spacing(x):
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise ConfigError('a spectrum needs at least two samples')
    steps = np.diff(x)
    spacing = steps[0]
    if np.max(np.abs(steps - spacing)) > UNIFORM_RTOL * abs(spacing):
        raise ConfigError('x values are not uniformly spaced')
    return float(spacing)


def dft_spectrum(data, one_sided=True):
    """|DFT| of the mean-subtracted series; frequencies in Hz (cycles per x unit).

    One-sided (non-negative frequencies) by default; with ``one_sided=False``
    the full spectrum is returned with the zero frequency centred.
    """
    spacing = sample_spacing(data.x)
    y = data.y - np.mean(data.y)
    n = len(y)
    if one_sided:
        magnitude = np.abs(np.fft.rfft(y))
        frequency = np.fft.rfftfreq(n, spacing)
    else:
        magnitude = np.abs(np.fft.fftshift(np.fft.fft(y)))
        frequency = np.fft.fftshift(np.fft.fftfreq(n, spacing))
    return DataSeries(frequency, magnitude, x_name='frequency_Hz', y_name='magnitude')


def _half_width(magnitude, index):
    half = magnitude[index] / 2
    left = index
    while left > 0 and magnitude[left] > half:
        left -= 1
    right = index
    while right < len(magnitude) - 1 and magnitude[right] > half:
        right += 1
    return max(right - left, 1)


def peak_guesses(spectrum, count, min_separation=None):
    """Up to ``count`` local maxima as (frequency, magnitude).

    Greedy, highest first (ties by ascending frequency); a candidate closer than
    ``min_separation`` Hz to an accepted peak is skipped. The default separation
    is the full width at half maximum of the strongest peak.
    """
    freqs, magnitude = spectrum.x, spectrum.y
    if len(magnitude) < 3 or count < 1:
        return []
    interior = np.arange(1, len(magnitude) - 1)
    is_peak = (magnitude[interior] >= magnitude[interior - 1]) & (magnitude[interior] > magnitude[interior + 1])
    candidates = [int(i) for i in interior[is_peak] if freqs[i] != 0]
    if not candidates:
        return []
    candidates.sort(key=lambda i: (-magnitude[i], freqs[i]))
    if min_separation is None:
        min_separation = _half_width(magnitude, candidates[0]) * (freqs[1] - freqs[0])
    accepted = []
    for i in candidates:
        if all(abs(freqs[i] - freqs[j]) >= min_separation for j in accepted):
            accepted.append(i)
        if len(accepted) == count:
            break
    return [(float(freqs[i]), float(magnitude[i])) for i in accepted]


def dominant_frequency(x, y):
    """Strongest non-zero spectral component in Hz; falls back to one cycle over the span."""
    x = np.asarray(x, dtype=float)
    try:
        peaks = peak_guesses(dft_spectrum(DataSeries(x, y)), 1)
    except ConfigError:
        peaks = []
    if peaks:
        return peaks[0][0]
    span = x[-1] - x[0] if len(x) > 1 else 1.0
    return 1 / span if span > 0 else 1.0


def parseval_sums(data):
    """(sum |y - mean|^2, sum |S|^2 / N) over the full spectrum."""
    y = data.y - np.mean(data.y)
    spectrum = np.fft.fft(y)
    return float(np.sum(y ** 2)), float(np.sum(np.abs(spectrum) ** 2) / len(y))


def angular(frequency):
    return 2 * math.pi * frequency
