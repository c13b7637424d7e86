"""
Shared plumbing of the spinreg management commands.

Library exceptions become ``CommandError`` with the exit status of their class:
``InputError`` exits 1, ``NumericError`` (and numpy linear-algebra failures)
exit 2. Malformed command lines exit 1 as well.
"""

import argparse
import logging

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from seqlang import units
from spinreg.exceptions import InputError, SeqlangError, SpinregError

from .config import FRAMES, RunConfig

logger = logging.getLogger(__name__)


def duration_argument(text):
    try:
        quantity = units.parse_quantity(text)
    except SeqlangError as exc:
        raise argparse.ArgumentTypeError(exc.message) from None
    if quantity.dimension not in (units.DURATION, units.NUMBER):
        raise argparse.ArgumentTypeError(f'expected a duration such as 1ns, got {text!r}')
    return quantity.value


def on_off(text):
    if text not in ('on', 'off'):
        raise argparse.ArgumentTypeError(f"expected on or off, got {text!r}")
    return text == 'on'


class SpinregCommand(BaseCommand):
    """Base for commands that run the simulator; subclasses implement ``run``."""

    run_options = True

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # usage errors raise CommandError (exit 1) instead of argparse's exit 2
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(str(exc))
            raise SystemExit(exc.returncode) from None

    def add_run_arguments(self, parser):
        parser.add_argument('--config', help='register .ini file (default: bundled parameter table)')
        parser.add_argument('--out', help='output directory or file')
        parser.add_argument('--seed', type=int, default=0, help='seed for stochastic steps')
        parser.add_argument('--max-dt', type=duration_argument, dest='max_dt',
                            help='largest propagation step, e.g. 1ns')
        parser.add_argument('--frame', choices=FRAMES, default='exact')
        parser.add_argument('--decoherence', type=on_off, default=True, metavar='on|off')
        parser.add_argument('--jobs', type=int, help='worker processes (default: SPINREG_JOBS)')

    def run_config(self, options):
        values = {
            'config_path': options.get('config'),
            'frame': options.get('frame', 'exact'),
            'max_dt': options.get('max_dt'),
            'decoherence': options.get('decoherence', True),
            'seed': options.get('seed'),
        }
        if options.get('jobs') is not None:
            values['jobs'] = options['jobs']
        if options.get('out'):
            values['output_dir'] = options['out']
        return RunConfig(**values)

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except InputError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except SpinregError as exc:
            logger.error('%s failed: %s', self.__module__.rsplit('.', 1)[-1], exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except (np.linalg.LinAlgError, FloatingPointError) as exc:
            raise CommandError(f'numerical failure: {exc}', returncode=2) from exc

    def run(self, *args, **options):
        raise NotImplementedError('subclasses of SpinregCommand must provide a run() method')

    def emit(self, text):
        """Write ``text`` verbatim to stdout."""
        self.stdout.write(text, ending='')
