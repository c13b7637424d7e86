"""
Least-squares fit of the register model to an XY decoupling (tau, N) grid.

Each residual evaluation simulates every grid point with the sequence engine.
Points are spread over a ``billiard`` worker pool when ``jobs > 1`` and are
always reduced in grid order.
"""

import logging
import math

import billiard
import numpy as np

from sequences.experiments import experiment_plan, observable_value
from sequences.engine import propagate
from spinmodel.params import Frame
from spinreg.exceptions import ConfigError

from .data import Grid2D
from .fitting import solve

logger = logging.getLogger(__name__)

GLOBAL_PARAMETERS = ('omega_L_n', 'tau_c0', 'beta', 'chi')


def parameter_names(params):
    return ['omega_L_n'] + [f'a_perp_{i + 1}' for i in range(params.K)] + ['tau_c0', 'beta', 'chi']


def parameter_values(params):
    values = {'omega_L_n': params.omega_L_n, 'tau_c0': params.tau_c0, 'beta': params.beta, 'chi': params.chi}
    values.update({f'a_perp_{i + 1}': spin.a_perp for i, spin in enumerate(params.spins)})
    return values


def with_values(params, values):
    """Register with the fitted quantities replaced; A_par and F_e stay as given."""
    spins = [
        spin if f'a_perp_{i + 1}' not in values else
        type(spin)(spin.a_par, abs(values[f'a_perp_{i + 1}']), spin.label, spin.t2_star)
        for i, spin in enumerate(params.spins)
    ]
    changes = {name: values[name] for name in GLOBAL_PARAMETERS if name in values}
    if 'tau_c0' in changes:
        changes['tau_c0'] = abs(changes['tau_c0']) or params.tau_c0
    if 'beta' in changes:
        changes['beta'] = abs(changes['beta']) or params.beta
    return params.evolve(spins=spins, **changes)


def _f_e(f_e_by_tau, tau, params):
    if f_e_by_tau is None:
        return params.f_e
    if callable(f_e_by_tau):
        return f_e_by_tau(tau)
    key = min(f_e_by_tau, key=lambda t: abs(t - tau))
    return f_e_by_tau[key]


def simulate_point(task):
    """<sigma_z^e> after an XY block of ``n`` pulses at spacing ``tau``."""
    params, drive, tau, n, frame_name, max_dt, decoherence = task
    plan = experiment_plan('xy', [tau], params, drive, n=n, family='xy')
    frame = Frame.named(frame_name, params)
    result = propagate(plan.programs[0], params, frame, plan.initial_state(params),
                       max_dt=max_dt, decoherence=decoherence)
    return observable_value('sz_e', result.final_state, params)


class GridSimulator:
    """Evaluates the forward model on a fixed (tau, N) grid; usable as a context manager."""

    def __init__(self, taus, ns, drive, f_e_by_tau=None, jobs=1, frame='exact', max_dt=None,
                 decoherence=True):
        self.taus = [float(t) for t in taus]
        self.ns = [int(n) for n in ns]
        if not self.taus or not self.ns:
            raise ConfigError('the (tau, N) grid is empty')
        self.drive = drive
        self.f_e_by_tau = f_e_by_tau
        self.jobs = max(int(jobs), 1)
        self.frame = frame
        self.max_dt = max_dt
        self.decoherence = decoherence
        self._pool = None

    def __enter__(self):
        if self.jobs > 1:
            self._pool = billiard.Pool(processes=self.jobs)
        return self

    def __exit__(self, *exc_info):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def tasks(self, params):
        return [
            (params.evolve(f_e=_f_e(self.f_e_by_tau, tau, params)), self.drive, tau, n,
             self.frame, self.max_dt, self.decoherence)
            for n in self.ns for tau in self.taus
        ]

    def __call__(self, params):
        tasks = self.tasks(params)
        if self._pool is not None:
            values = self._pool.map(simulate_point, tasks)
        else:
            values = [simulate_point(task) for task in tasks]
        return np.array(values, dtype=float)

    def grid(self, params):
        values = self(params).reshape(len(self.ns), len(self.taus))
        return Grid2D(self.taus, self.ns, values)


def simulate_xy_grid(params, drive, taus, ns, f_e_by_tau=None, jobs=1, frame='exact', max_dt=None,
                     decoherence=True):
    with GridSimulator(taus, ns, drive, f_e_by_tau, jobs, frame, max_dt, decoherence) as simulator:
        return simulator.grid(params)


def fit_xy2d(grid, params, drive, f_e_by_tau=None, init=None, fixed=None, jobs=1, frame='exact',
             max_dt=None, decoherence=True, max_iterations=None):
    """Fit omega_L_n, every A_perp, tau_c0, beta and chi to ``grid``.

    ``params`` supplies A_par and the starting point; ``fixed`` pins any of the
    fitted names. An infinite tau_c0 is held fixed.
    """
    names = parameter_names(params)
    start = parameter_values(params)
    unknown = sorted((set(init or {}) | set(fixed or {})) - set(names))
    if unknown:
        raise ConfigError(f'unknown parameter(s) {", ".join(unknown)}; fitted names are {", ".join(names)}')
    start.update(init or {})
    fixed = dict(fixed or {})
    for name in names:
        if name not in fixed and not math.isfinite(start[name]):
            fixed[name] = start[name]
    expected = grid.values.reshape(-1)

    with GridSimulator(grid.taus, grid.ns, drive, f_e_by_tau, jobs, frame, max_dt, decoherence) as simulator:
        def residual(vector):
            return simulator(with_values(params, dict(zip(names, vector)))) - expected

        logger.info('xy2d: fitting %d parameters to %d grid points with %d worker(s)',
                    len(names) - len(fixed), expected.size, simulator.jobs)
        return solve(residual, names, start, fixed, max_iterations, 'xy2d')
