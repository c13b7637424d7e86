"""Script in, observables out: the unit of work behind simulate and sweep."""

import logging
from functools import lru_cache

from measurement.bell import BELL_COEFFICIENTS, bell_fidelity, correlators_from_state
from measurement.readout import ClampCounter, electron_populations, normalized_readout
from sequences.engine import propagate, spin_expectations
from seqlang.lowering import validate
from seqlang.parser import parse
from spinmodel.hamiltonians import NUCLEAR_STATES, initial_density_matrix
from spinmodel.params import Frame
from spinreg.exceptions import ConfigError

from .config import default_register_config, load_register_config

logger = logging.getLogger(__name__)


def parse_nuclear_state(text, n_spins):
    """``up,up,mixed`` (or a single state for every spin) -> per-spin list."""
    if not text:
        return None
    states = [item.strip() for item in text.split(',')]
    if len(states) == 1:
        states *= n_spins
    unknown = sorted(set(states) - set(NUCLEAR_STATES))
    if unknown:
        raise ConfigError(f'unknown nuclear state(s) {", ".join(unknown)}; choose {", ".join(NUCLEAR_STATES)}')
    if len(states) != n_spins:
        raise ConfigError(f'{len(states)} nuclear states given for a {n_spins}-spin register')
    return states


def observables(rho, params, counter=None):
    """Final-state summary: <sigma_z> per spin, electron populations and readout."""
    values = dict(spin_expectations(rho, params.K))
    p_up, p_down = electron_populations(rho)
    values['p_up_e'] = p_up
    values['p_down_e'] = p_down
    if params.f_e > 0.5:
        values['normalized'] = normalized_readout(p_down, params.f_e, counter)
    if params.K >= 2:
        values['bell_fidelity'] = bell_fidelity(correlators_from_state(rho), BELL_COEFFICIENTS['psi_plus'])
    return values


def run_program(program, register, run, nuclear_state=None, record=False):
    """Propagate ``program`` and summarize the final state.

    Returns ``(observables, records, clamped)``.
    """
    params = register.params
    rho0 = initial_density_matrix(params, nuclear_state)
    frame = Frame.named(run.frame, params)
    result = propagate(program, params, frame, rho0, max_dt=run.max_dt,
                       decoherence=run.decoherence, record=record)
    counter = ClampCounter()
    values = observables(result.final_state, params, counter)
    values['duration_s'] = program.duration()
    values['pi_pulses'] = result.pulse_count
    return values, result.records, counter.count


@lru_cache(maxsize=8)
def cached_register(config_path):
    if config_path is None:
        return default_register_config()
    return load_register_config(config_path)


def run_source(source, filename, register, run, nuclear_state=None, record=False):
    program = validate(parse(source, filename), register.params, register.drive)
    logger.debug('%s: %d elements, %.6g s', filename or '<input>', len(program), program.duration())
    return run_program(program, register, run, nuclear_state, record)
