import logging
from pathlib import Path

from measurement.serializers import histogram_to_csv
from measurement.ssr import optimal_threshold, simulate_ssr
from runner.commands import SpinregCommand
from runner.output import csv_text, json_text, write_text
from runner.simulation import parse_nuclear_state, run_program
from seqlang.lowering import validate
from seqlang.parser import parse_file
from spinreg.exceptions import ConfigError

logger = logging.getLogger(__name__)


class Command(SpinregCommand):
    help = 'Run one pulse script and report the final-state observables as JSON.'

    def add_arguments(self, parser):
        parser.add_argument('program', help='.sq pulse script')
        self.add_run_arguments(parser)
        parser.add_argument('--nuclei', help='nuclear start state: up, down, mixed or a comma list per spin')
        parser.add_argument('--series', action='store_true', help='also write the barrier time series CSV')
        parser.add_argument('--shots', type=int, default=0, help='simulate N single-shot readouts of the electron')

    def run(self, program, **options):
        run = self.run_config(options)
        register = run.register()
        script = parse_file(program)
        pulses = validate(script, register.params, register.drive)
        nuclear_state = parse_nuclear_state(options.get('nuclei'), register.params.K)
        values, records, clamped = run_program(pulses, register, run, nuclear_state,
                                               record=options.get('series', False))
        document = {
            'program': str(program),
            'config': run.config_path or 'bundled',
            'frame': run.frame,
            'decoherence': run.decoherence,
            'observables': values,
            'clamped': clamped,
        }

        stem = Path(program).stem
        outputs = {}
        shots = options.get('shots') or 0
        if shots < 0:
            raise ConfigError(f'--shots must be >= 0, got {shots}')
        if shots:
            threshold, _ = optimal_threshold(register.ssr)
            p_bright = min(max(values['p_down_e'], 0.0), 1.0)
            histogram = simulate_ssr(register.ssr, p_bright, shots, rng_seed=run.seed)
            document['ssr'] = {
                'shots': shots,
                'seed': run.seed,
                'threshold': threshold,
                'mean_photons': histogram.mean(),
                'bright_fraction': histogram.fraction_at_or_above(threshold),
            }
            outputs[f'{stem}_ssr.csv'] = histogram_to_csv(histogram)
        if options.get('series'):
            outputs[f'{stem}_series.csv'] = self.series_text(records)

        text = json_text(document)
        if not options.get('out'):
            self.emit(text)
            if outputs:
                logger.warning('--out not given; skipping %s', ', '.join(sorted(outputs)))
            return
        out = Path(options['out'])
        write_text(out / f'{stem}.json', text)
        for name, body in outputs.items():
            write_text(out / name, body)
        self.stdout.write(f'wrote {out / f"{stem}.json"}' + ''.join(f', {out / name}' for name in outputs))

    @staticmethod
    def series_text(records):
        if not records:
            return csv_text(['t_s', 'label'], [])
        spins = sorted(name for name in records[0] if name.startswith('sz_'))
        rows = [[record['t'], record['label'], *(record[name] for name in spins)] for record in records]
        return csv_text(['t_s', 'label', *spins], rows)
