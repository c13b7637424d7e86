"""
Figure reproduction recipes.

Each recipe writes the simulated data behind one figure of the register
characterization into ``<out>/<figure>/`` and returns the files it wrote;
``reproduce`` adds a ``manifest.yaml`` with the parameters used. ``quick``
shrinks every sweep to a handful of points.
"""

import json
import logging
import math
from pathlib import Path

import attrs
import numpy as np
import yaml

from estimation.data import DataSeries, write_grid_csv
from estimation.spectrum import dft_spectrum
from estimation.xy2d import simulate_xy_grid
from measurement.bell import BELL_COEFFICIENTS
from measurement.ssr import (
    active_feedback_population, optimal_threshold, post_select, simulate_ssr,
)
from measurement.serializers import histogram_to_csv
from sequences.decoherence import coherence_time
from sequences.experiments import experiment_plan, run_plan, simulate_bell
from sequences.library import BellOptions
from spinmodel.params import TWO_PI, Frame
from spinmodel.presets import ELECTRON_RABI, F_E_BY_TAU, SEDOR_COUPLINGS, SSR_FIDELITIES
from spinmodel.serializers import RegisterSummarySerializer
from spinreg.exceptions import UnknownExperimentError

from .output import csv_text, json_text, write_text

logger = logging.getLogger(__name__)

TWO_QUBIT_STATES = ('uu', 'ud', 'du', 'dd')


@attrs.frozen
class RecipeContext:
    register: object
    run: object
    out: Path
    quick: bool = False
    seed: int = 0

    @property
    def params(self):
        return self.register.params

    @property
    def drive(self):
        return self.register.drive

    def frame(self):
        return Frame.named(self.run.frame, self.params)

    def points(self, full, short):
        return short if self.quick else full

    def write(self, name, text):
        return write_text(self.out / name, text)


def _trace(ctx, name, kind, sweep, column, **options):
    plan = experiment_plan(kind, sweep, ctx.params, ctx.drive, **options)
    values = run_plan(plan, ctx.params, ctx.frame(), ctx.run.max_dt, ctx.run.decoherence)
    rows = zip(plan.x, values)
    return ctx.write(name, csv_text((column, plan.observable), rows)), values


def ramsey_spectrum(ctx):
    """Off-resonant Ramsey fringes and their spectrum."""
    n = ctx.points(400, 64)
    taus = np.arange(n) * 50e-9
    path, values = _trace(ctx, 'ramsey.csv', 'ramsey', taus, 'tau_s', detuning=TWO_PI * 1e6)
    spectrum = dft_spectrum(DataSeries(taus, values))
    spectrum_path = ctx.write('spectrum.csv', csv_text(('frequency_Hz', 'magnitude'),
                                                       zip(spectrum.x, spectrum.y)))
    return [path, spectrum_path]


def hahn_and_scaling(ctx):
    """Hahn echo decay and the decoupled coherence time against pulse number."""
    taus = np.linspace(1e-6, 400e-6, ctx.points(80, 6))
    path, _ = _trace(ctx, 'hahn.csv', 'hahn', taus, 'tau_s')
    ns = (1, 2, 4, 8, 16, 32, 64, 128, 256)
    rows = [(n, coherence_time(ctx.params, n)) for n in ns]
    return [path, ctx.write('cpmg_scaling.csv', csv_text(('N', 'T2_s'), rows))]


def _f_e_table(ctx):
    return F_E_BY_TAU if ctx.run.config_path is None else None


def resonance_sweeps(ctx):
    """Coherence dip against tau at N = 48 and oscillation against N at the n1 resonance."""
    taus = sorted(F_E_BY_TAU)
    taus = taus[4:7] if ctx.quick else taus
    ns = ctx.points(list(range(20, 381, 20)), [8, 16])
    tau_grid = simulate_xy_grid(ctx.params, ctx.drive, taus, [ctx.points(48, 8)], _f_e_table(ctx),
                                ctx.run.jobs, ctx.run.frame, ctx.run.max_dt, ctx.run.decoherence)
    n_grid = simulate_xy_grid(ctx.params, ctx.drive, [8.395e-6], ns, _f_e_table(ctx),
                              ctx.run.jobs, ctx.run.frame, ctx.run.max_dt, ctx.run.decoherence)
    return [
        ctx.write('tau_sweep.csv', csv_text(('tau_s', 'sz_e'), zip(tau_grid.taus, tau_grid.values[0]))),
        ctx.write('n_sweep.csv', csv_text(('N', 'sz_e'), zip(n_grid.ns, n_grid.values[:, 0]))),
    ]


def resonance_grid(ctx):
    """Full (tau, N) grid over the tabulated spacings."""
    taus = sorted(F_E_BY_TAU)
    taus = taus[4:6] if ctx.quick else taus
    ns = ctx.points(list(range(20, 381, 20)), [4, 8])
    grid = simulate_xy_grid(ctx.params, ctx.drive, taus, ns, _f_e_table(ctx), ctx.run.jobs,
                            ctx.run.frame, ctx.run.max_dt, ctx.run.decoherence)
    path = ctx.out / 'grid.csv'
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        write_grid_csv(grid, handle, value_name='sz_e')
    return [path]


def nuclear_initialization(ctx):
    """Initialization of n1 against the spacing of the conditional rotations."""
    taus = np.linspace(8.385e-6, 8.400e-6, ctx.points(16, 3))
    path, _ = _trace(ctx, 'nuclear_init.csv', 'nuclear_init', taus, 'tau_s',
                     n=ctx.points(24, 4))
    return [path]


def electron_rabi(ctx):
    durations = np.linspace(0.0, 60e-6, ctx.points(121, 6))
    path, _ = _trace(ctx, 'rabi.csv', 'rabi', durations, 'duration_s', rabi=ELECTRON_RABI)
    return [path]


def sinc_amplitudes(ctx):
    """Inversion against sinc pulse area for three bandwidths."""
    amplitudes = np.linspace(0.0, 3 * math.pi, ctx.points(61, 4))
    paths = []
    for bandwidth in (1200e3, 500e3, 150e3):
        name = f'sinc_{bandwidth / 1e3:g}kHz.csv'
        path, _ = _trace(ctx, name, 'sinc_amplitude', amplitudes, 'amplitude_rad', bandwidth=bandwidth)
        paths.append(path)
    return paths


def nuclear_rabi(ctx):
    """Conditional Rabi oscillations of every nuclear spin on both electron branches."""
    durations = np.linspace(0.0, 500e-6, ctx.points(101, 4))
    paths = []
    for target in range(ctx.params.K):
        for branch in ('up', 'down'):
            name = f'nuclear_rabi_n{target + 1}_{branch}.csv'
            path, _ = _trace(ctx, name, 'nuclear_rabi', durations, 'duration_s',
                             target=target, branch=branch)
            paths.append(path)
    return paths


def nuclear_ramsey(ctx):
    """Nuclear Ramsey fringes at 500 Hz detuning."""
    taus = np.linspace(0.0, 20e-3, ctx.points(201, 4))
    paths = []
    for target in range(ctx.params.K):
        path, _ = _trace(ctx, f'nuclear_ramsey_n{target + 1}.csv', 'nuclear_ramsey', taus, 'tau_s',
                         target=target, detuning=TWO_PI * 500)
        paths.append(path)
    return paths


def sedor_traces(ctx):
    """Echo on the sensor with a simultaneous pi on the target, for each coupled pair."""
    taus = np.linspace(0.0, 50e-3, ctx.points(101, 4))
    paths = []
    for sensor, target in sorted(SEDOR_COUPLINGS):
        if max(sensor, target) >= ctx.params.K:
            continue
        name = f'sedor_n{sensor + 1}_n{target + 1}.csv'
        path, _ = _trace(ctx, name, 'sedor', taus, 'tau_s', sensor=sensor, target=target)
        paths.append(path)
    return paths


def ssr_histograms(ctx):
    """Photon histograms of n1..n3, thresholds and the feedback/post-selection figures."""
    shots = ctx.points(20000, 2000)
    model = ctx.register.ssr
    threshold, fidelity = optimal_threshold(model)
    paths, summary = [], {'threshold': threshold, 'threshold_fidelity': fidelity, 'spins': {}}
    for i in range(min(3, ctx.params.K)):
        histogram = simulate_ssr(model, 0.5, shots, rng_seed=ctx.seed + i)
        paths.append(ctx.write(f'ssr_n{i + 1}.csv', histogram_to_csv(histogram)))
        selected = post_select(model, active_feedback_population(model, 0.5, threshold), threshold)
        summary['spins'][f'n{i + 1}'] = {
            'mean_photons': histogram.mean(),
            'bright_fraction': histogram.fraction_at_or_above(threshold),
            'feedback_population': active_feedback_population(model, 0.5, threshold),
            'post_selected_fidelity': selected.fidelity,
            'post_selection_acceptance': selected.acceptance,
        }
    paths.append(ctx.write('ssr_summary.json', json_text(summary)))
    return paths


def _ideal_bell_populations():
    """|du> + |ud> over sqrt 2 in the z, x and y settings."""
    return {'z': [0.0, 0.5, 0.5, 0.0], 'x': [0.5, 0.0, 0.0, 0.5], 'y': [0.5, 0.0, 0.0, 0.5]}


def bell_readout(ctx):
    """Two-spin populations in three readout settings, the ideal reference and fidelities."""
    frame = Frame.fast(ctx.params)
    ideal = simulate_bell(ctx.params, BellOptions(drive=ctx.drive), frame=frame, max_dt=ctx.run.max_dt)
    degraded = simulate_bell(
        ctx.params, BellOptions(cphase_fidelity=0.73, drive=ctx.drive), frame=frame,
        readout_fidelity=SSR_FIDELITIES[-1], max_dt=ctx.run.max_dt,
    )
    paths = []
    for basis in ('z', 'x', 'y'):
        rows = [(state, ideal.populations[basis][k], degraded.populations[basis][k])
                for k, state in enumerate(TWO_QUBIT_STATES)]
        paths.append(ctx.write(f'populations_{basis}.csv', csv_text(('state', 'ideal', 'degraded'), rows)))
    reference = _ideal_bell_populations()
    rows = [(state, reference['z'][k], reference['x'][k], reference['y'][k])
            for k, state in enumerate(TWO_QUBIT_STATES)]
    paths.append(ctx.write('populations_reference.csv', csv_text(('state', 'z', 'x', 'y'), rows)))

    def report(result):
        c = result.correlators
        return {'fidelity': result.fidelity, 'state_fidelity': result.state_fidelity,
                'correlators': {'zz': c.zz, 'yy': c.yy, 'xx': c.xx}}

    document = {
        'ideal': report(ideal),
        'degraded': report(degraded),
        'coefficients': list(BELL_COEFFICIENTS['psi_plus']),
        'cphase_fidelity': 0.73,
        'readout_fidelity': SSR_FIDELITIES[-1],
    }
    paths.append(ctx.write('fidelity.json', json_text(document)))
    return paths


RECIPES = {
    'fig1a': ramsey_spectrum,
    'fig1b': hahn_and_scaling,
    'fig2b': resonance_sweeps,
    'fig2c': resonance_grid,
    'fig2f': nuclear_initialization,
    'fig3a': electron_rabi,
    'fig4d': nuclear_rabi,
    'fig4f': nuclear_ramsey,
    'fig4h': sedor_traces,
    'fig5a': ssr_histograms,
    'fig6d': bell_readout,
    'sinc': sinc_amplitudes,
}


def _summary(recipe, figure):
    doc = (recipe.__doc__ or '').strip()
    return doc.splitlines()[0] if doc else figure


def _builtin(data):
    return json.loads(json.dumps(data))


def manifest(figure, ctx, files):
    return {
        'figure': figure,
        'description': _summary(RECIPES[figure], figure),
        'config': ctx.run.config_path or 'bundled parameter table',
        'register': _builtin(RegisterSummarySerializer(ctx.params).data),
        'run': {
            'frame': ctx.run.frame,
            'max_dt': ctx.run.max_dt,
            'decoherence': ctx.run.decoherence,
            'seed': ctx.seed,
            'quick': ctx.quick,
        },
        'files': sorted(str(Path(f).relative_to(ctx.out)) for f in files),
    }


def get_recipe(figure):
    try:
        return RECIPES[figure]
    except KeyError:
        raise UnknownExperimentError(
            f'unknown figure {figure!r}; choose one of {", ".join(sorted(RECIPES))}'
        ) from None


def reproduce(figure, ctx):
    """Run one recipe and write its manifest; returns every path written."""
    recipe = get_recipe(figure)
    logger.info('reproducing %s into %s', figure, ctx.out)
    files = recipe(ctx)
    text = yaml.safe_dump(manifest(figure, ctx, files), sort_keys=True, allow_unicode=True)
    files.append(ctx.write('manifest.yaml', text))
    return files
