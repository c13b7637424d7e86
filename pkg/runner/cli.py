"""``spinreg`` console script: ``spinreg simulate|sweep|fit|reproduce|validate ...``."""

import os
import sys


def main(argv=None):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'spinreg.settings')
    from django.core.management import execute_from_command_line

    argv = sys.argv if argv is None else argv
    execute_from_command_line(['spinreg', *argv[1:]])
