"""Closed-form derived quantities."""

import math

import numpy as np
from scipy import stats

from spinreg.exceptions import ConfigError

from .fitting import FitResult

LINEWIDTH_FACTORS = {1: 1.0, 2: 2 * math.sqrt(math.log(2))}


def beat_detuning(omega_eff_low, omega_eff_high):
    """sqrt(high^2 - low^2): detuning behind two effective Rabi frequencies."""
    if omega_eff_high < omega_eff_low:
        raise ConfigError(
            f'high effective frequency {omega_eff_high} is below the low one {omega_eff_low}'
        )
    return math.sqrt(omega_eff_high ** 2 - omega_eff_low ** 2)


def ramsey_linewidth(t2_star, beta=1):
    """Inhomogeneous linewidth C(beta) / (pi T2*) in Hz."""
    if beta not in LINEWIDTH_FACTORS:
        raise ConfigError(f'linewidth is defined for beta 1 or 2, got {beta}')
    if not t2_star > 0:
        raise ConfigError(f'T2* must be > 0, got {t2_star}')
    if math.isinf(t2_star):
        return 0.0
    return LINEWIDTH_FACTORS[beta] / (math.pi * t2_star)


def cpmg_scaling_fit(pairs):
    """T2 = prefactor * N^chi by linear regression in log-log space."""
    pairs = [(float(n), float(t2)) for n, t2 in pairs]
    if len(pairs) < 2:
        raise ConfigError(f'scaling fit needs at least two (N, T2) pairs, got {len(pairs)}')
    if any(n < 1 for n, _ in pairs):
        raise ConfigError('pulse numbers must be >= 1')
    if any(t2 <= 0 for _, t2 in pairs):
        raise ConfigError('T2 values must be > 0')
    log_n = np.log([n for n, _ in pairs])
    log_t2 = np.log([t2 for _, t2 in pairs])
    if np.ptp(log_n) == 0:
        raise ConfigError('scaling fit needs at least two distinct pulse numbers')
    regression = stats.linregress(log_n, log_t2)
    prefactor = math.exp(regression.intercept)
    residual = log_t2 - (regression.intercept + regression.slope * log_n)
    chi_err = float(regression.stderr) if len(pairs) > 2 else 0.0
    intercept_err = float(regression.intercept_stderr) if len(pairs) > 2 else 0.0
    return FitResult(
        model='cpmg_scaling',
        params={'prefactor': prefactor, 'chi': float(regression.slope)},
        sigmas={'prefactor': prefactor * intercept_err, 'chi': chi_err},
        residual_norm=float(np.linalg.norm(residual)),
        converged=True,
        iterations=1,
        method='linregress',
    )
