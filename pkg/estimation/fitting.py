"""
Nonlinear least squares.

Levenberg-Marquardt (``scipy.optimize.least_squares``, forward-difference
Jacobian) with a Nelder-Mead fallback when the Jacobian is rank deficient or
LM stops without converging. Parameters are scaled by their starting values
so the solver sees numbers of order one; the scale keeps the sign of the
starting value, so every free parameter starts at +1. Uncertainties are the diagonal of
pinv(J^T J) scaled by the reduced chi^2.
"""

import logging

import attrs
import numpy as np
from django.conf import settings
from scipy.optimize import least_squares, minimize

from spinreg.exceptions import ConfigError

from .fitmodels import get_model

logger = logging.getLogger(__name__)

# non-finite model values are scored as this residual
_PENALTY = 1e12


@attrs.frozen
class FitResult:
    model: str
    params: dict
    sigmas: dict
    residual_norm: float
    converged: bool
    iterations: int
    fixed: tuple = ()
    method: str = 'lm'
    reduced_chi2: float = 0.0

    def __getitem__(self, name):
        return self.params[name]

    def sigma(self, name):
        return self.sigmas[name]


def max_iterations_default():
    return getattr(settings, 'SPINREG', {}).get('FIT_MAX_ITERATIONS', 2000)


def _forward_jacobian(function, q, f0):
    jac = np.empty((len(f0), len(q)))
    for k in range(len(q)):
        step = np.sqrt(np.finfo(float).eps) * max(1.0, abs(q[k]))
        shifted = q.copy()
        shifted[k] += step
        jac[:, k] = (function(shifted) - f0) / step
    return jac


def solve(residual, names, start, fixed=None, max_iterations=None, model_name='custom'):
    """Minimize ``sum(residual(p)^2)`` over the parameters in ``names`` not in ``fixed``.

    ``residual`` receives the full parameter vector in ``names`` order.
    """
    fixed = dict(fixed or {})
    free = [name for name in names if name not in fixed]
    if not free:
        raise ConfigError('every parameter is fixed; nothing to fit')
    max_iterations = max_iterations or max_iterations_default()
    p0 = np.array([float(start[name]) for name in free])
    if not np.all(np.isfinite(p0)):
        raise ConfigError(f'initial guess is not finite: {dict(zip(free, p0))}')
    scale = np.where(p0 != 0, p0, 1.0)

    def full(q):
        values = dict(fixed)
        values.update(zip(free, q * scale))
        return np.array([values[name] for name in names], dtype=float)

    def scaled_residual(q):
        with np.errstate(all='ignore'):
            r = np.asarray(residual(full(q)), dtype=float)
        return np.where(np.isfinite(r), r, _PENALTY)

    q0 = np.ones(len(free))
    m = len(scaled_residual(q0))
    if m < len(free):
        raise ConfigError(f'{m} data points cannot constrain {len(free)} free parameters')

    lm = least_squares(
        scaled_residual, q0, method='lm', jac='2-point',
        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=max_iterations * (len(free) + 1),
    )
    q, jac, method = lm.x, lm.jac, 'lm'
    iterations, converged = int(lm.nfev), bool(lm.status > 0)
    if not converged or np.linalg.matrix_rank(jac) < len(free):
        logger.info('%s: LM %s, retrying with Nelder-Mead', model_name,
                    'rank deficient' if converged else 'did not converge')
        start_q = lm.x if np.all(np.isfinite(lm.x)) else q0
        nm = minimize(
            lambda v: float(np.sum(scaled_residual(v) ** 2)), start_q, method='Nelder-Mead',
            options={'maxiter': max_iterations * len(free), 'xatol': 1e-12, 'fatol': 1e-30},
        )
        if nm.fun <= float(np.sum(scaled_residual(q) ** 2)) or not converged:
            q, method = nm.x, 'nelder-mead'
            converged, iterations = bool(nm.success), int(nm.nit)
            jac = _forward_jacobian(scaled_residual, q, scaled_residual(q))

    r = scaled_residual(q)
    dof = max(m - len(free), 1)
    reduced_chi2 = float(np.sum(r ** 2) / dof)
    covariance = np.linalg.pinv(jac.T @ jac) * reduced_chi2
    sigmas_free = np.sqrt(np.clip(np.diag(covariance), 0.0, None)) * np.abs(scale)
    values = full(q)
    if not np.all(np.isfinite(values)):
        converged = False
    if not converged:
        logger.warning('%s: fit did not converge after %d iterations', model_name, iterations)

    params = dict(zip(names, (float(v) for v in values)))
    sigmas = {name: 0.0 for name in names}
    sigmas.update(zip(free, (float(s) for s in sigmas_free)))
    return FitResult(
        model=model_name,
        params=params,
        sigmas=sigmas,
        residual_norm=float(np.linalg.norm(r)),
        converged=converged,
        iterations=iterations,
        fixed=tuple(sorted(fixed)),
        method=method,
        reduced_chi2=reduced_chi2,
    )


def _fold_magnitudes(result, model):
    if not model.magnitudes:
        return result
    params = dict(result.params)
    for name in model.magnitudes:
        params[name] = abs(params[name])
    return attrs.evolve(result, params=params)


def _resolve_fixed(model, fixed):
    merged = {**model.fixed, **(fixed or {})}
    unknown = sorted(set(merged) - set(model.param_names))
    if unknown:
        raise ConfigError(f'unknown parameter(s) {", ".join(unknown)} for model {model.name}')
    return {name: float(value) for name, value in merged.items() if value is not None}


def fit(model, data, init=None, fixed=None, max_iterations=None, bootstrap=0, rng_seed=None,
        components=None):
    """Fit a registered model (or model name) to a DataSeries.

    ``fixed`` pins parameters; ``None`` as a value releases a default-fixed one.
    ``bootstrap=n`` replaces the covariance uncertainties by the spread of ``n``
    seeded resampled refits.
    """
    if isinstance(model, str):
        model = get_model(model, components)
    fixed = _resolve_fixed(model, fixed)
    start = model.guess(data.x, data.y)
    unknown = sorted(set(init or {}) - set(model.param_names))
    if unknown:
        raise ConfigError(f'unknown parameter(s) {", ".join(unknown)} in initial values for {model.name}')
    start.update({name: float(value) for name, value in (init or {}).items()})
    start.update(fixed)
    weights = data.y_err if data.y_err is not None else np.ones_like(data.y)

    def residual_for(x, y, w):
        return lambda p: (model.function(x, *p) - y) / w

    result = solve(residual_for(data.x, data.y, weights), model.param_names, start, fixed,
                   max_iterations, model.name)
    result = _fold_magnitudes(result, model)
    if bootstrap:
        result = _bootstrap(result, model, data, weights, fixed, bootstrap, rng_seed, max_iterations,
                            residual_for)
    return result


def _bootstrap(result, model, data, weights, fixed, rounds, rng_seed, max_iterations, residual_for):
    rng = np.random.default_rng(rng_seed)
    free = [name for name in model.param_names if name not in fixed]
    samples = []
    n = len(data)
    for _ in range(int(rounds)):
        index = rng.integers(0, n, n)
        refit = solve(residual_for(data.x[index], data.y[index], weights[index]), model.param_names,
                      result.params, fixed, max_iterations, model.name)
        if refit.converged:
            refit = _fold_magnitudes(refit, model)
            samples.append([refit.params[name] for name in free])
    if len(samples) < 2:
        logger.warning('%s: bootstrap produced %d usable refits; keeping covariance errors',
                       model.name, len(samples))
        return result
    spread = np.std(np.array(samples), axis=0, ddof=1)
    sigmas = dict(result.sigmas)
    sigmas.update(zip(free, (float(s) for s in spread)))
    return attrs.evolve(result, sigmas=sigmas, method=f'{result.method}+bootstrap')
