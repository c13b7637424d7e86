"""Pytest wiring: configure Django before collecting the apps' tests.py modules."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'spinreg.settings')
django.setup()
