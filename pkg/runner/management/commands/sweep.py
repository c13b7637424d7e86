from pathlib import Path

from runner.commands import SpinregCommand
from runner.output import csv_text, observable_columns, write_text
from runner.simulation import cached_register, parse_nuclear_state
from runner.sweeps import check_template, parse_sweep, substitute
from runner.tasks import dispatch
from seqlang.lowering import validate
from seqlang.parser import parse
from spinreg.exceptions import ConfigError


def read_template(path):
    try:
        return Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f'cannot read template {path}: {exc.strerror or exc}') from None
    except UnicodeDecodeError:
        raise ConfigError(f'template {path} is not valid UTF-8') from None


class Command(SpinregCommand):
    help = 'Substitute sweep values into a ${name} script template and tabulate the observables.'

    def add_arguments(self, parser):
        parser.add_argument('template', help='script template with ${tau}, ${N}, ... placeholders')
        parser.add_argument('--sweep', required=True, help='outer axis, e.g. tau=8.391us:8.404us:1ns')
        parser.add_argument('--sweep2', help='inner axis for a 2D grid, e.g. N=20,40')
        self.add_run_arguments(parser)
        parser.add_argument('--nuclei', help='nuclear start state: up, down, mixed or a comma list per spin')

    def run(self, template, **options):
        sweep = parse_sweep(options['sweep'], options.get('sweep2'))
        text = read_template(template)
        check_template(text, sweep)
        run = self.run_config(options)
        register = cached_register(run.config_path)
        nuclear_state = parse_nuclear_state(options.get('nuclei'), register.params.K)

        points = sweep.points()
        base = run.payload()
        payloads = [
            {
                'source': substitute(text, sweep, point),
                'filename': str(template),
                'run': base,
                'nuclear_state': nuclear_state,
            }
            for point in points
        ]
        # every point parses and validates before dispatch
        for payload in payloads:
            validate(parse(payload['source'], payload['filename']), register.params, register.drive)
        results = dispatch(payloads, run.jobs)

        columns = observable_columns(results)
        header = [axis.column for axis in sweep.axes] + columns
        rows = [[point[axis.name] for axis in sweep.axes] + [result[name] for name in columns]
                for point, result in zip(points, results)]
        table = csv_text(header, rows)
        if not options.get('out'):
            self.emit(table)
            return
        path = write_text(Path(options['out']) / f'{Path(template).stem}.csv', table)
        self.stdout.write(f'wrote {path} ({len(rows)} points)')
