from django.core.management.base import CommandError

from runner.commands import SpinregCommand
from seqlang.formatter import format_script
from seqlang.lowering import validate
from seqlang.parser import parse_file
from seqlang.units import format_duration
from spinreg.exceptions import SeqlangError


class Command(SpinregCommand):
    help = 'Parse and validate pulse scripts against a register; diagnostics read file:line:col: message.'

    def add_arguments(self, parser):
        parser.add_argument('scripts', nargs='+', help='.sq files')
        parser.add_argument('--config', help='register .ini file (default: bundled parameter table)')
        parser.add_argument('--canonical', action='store_true', help='print each valid script in canonical form')

    def run(self, scripts, **options):
        register = self.run_config(options).register()
        failed = 0
        for path in scripts:
            try:
                script = parse_file(path)
                program = validate(script, register.params, register.drive)
            except SeqlangError as exc:
                failed += 1
                self.stderr.write(str(exc))
                continue
            if options.get('canonical'):
                self.emit(format_script(script))
            else:
                self.stdout.write(f'{path}: ok, {len(program)} elements, {format_duration(program.duration())}')
        if failed:
            raise CommandError(f'{failed} of {len(scripts)} script(s) failed validation', returncode=1)
