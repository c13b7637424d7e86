"""
Sweep points as Celery tasks, with a local ``billiard`` pool as the default.

Payloads are plain JSON: the substituted script text, the run options and the
nuclear start state. Results come back in submission order whatever the
backend.
"""

import logging

import billiard
from celery import group, shared_task
from django.conf import settings

from spinreg.exceptions import ConfigError

from .config import RunConfig
from .simulation import cached_register, run_source

logger = logging.getLogger(__name__)

BACKENDS = ('local', 'celery')


def evaluate(payload):
    """Observables of one sweep point."""
    run = RunConfig(**payload['run'])
    register = cached_register(run.config_path)
    values, _, clamped = run_source(payload['source'], payload.get('filename'), register, run,
                                    payload.get('nuclear_state'))
    values['clamped'] = clamped
    return values


@shared_task
def simulate_point(payload):
    return evaluate(payload)


def sweep_backend():
    backend = settings.SPINREG.get('SWEEP_BACKEND', 'local')
    if backend not in BACKENDS:
        raise ConfigError(f'unknown sweep backend {backend!r}; choose {" or ".join(BACKENDS)}')
    return backend


def dispatch(payloads, jobs=1, backend=None):
    """Evaluate every payload; the result list follows ``payloads`` order."""
    backend = backend or sweep_backend()
    logger.info('dispatching %d sweep points (%s backend, %d jobs)', len(payloads), backend, jobs)
    if backend == 'celery':
        results = group(simulate_point.s(payload) for payload in payloads).apply_async().get()
    elif jobs > 1 and len(payloads) > 1:
        pool = billiard.Pool(processes=min(jobs, len(payloads)))
        try:
            results = pool.map(evaluate, payloads)
        finally:
            pool.close()
            pool.join()
    else:
        results = [evaluate(payload) for payload in payloads]
    logger.info('sweep finished: %d points', len(results))
    return list(results)
