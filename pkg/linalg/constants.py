from django.conf import settings

from spinreg.exceptions import ConfigError


def tolerance(name):
    """Named numerical tolerance from ``SPINREG['TOLERANCES']``."""
    configured = getattr(settings, 'SPINREG', {}).get('TOLERANCES', {})
    if name not in configured:
        raise ConfigError(f"SPINREG['TOLERANCES'] has no {name!r} entry")
    return configured[name]


def max_dimension():
    return 2 ** getattr(settings, 'SPINREG', {}).get('MAX_QUBITS', 7)
