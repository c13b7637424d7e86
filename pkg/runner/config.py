"""
Register configuration files and the options shared by every command.

A register file is ``.ini`` text read with ``configparser``::

    [register]
    omega_L_e = 9.414GHz
    omega_L_n = 3.5825184MHz
    f_e = 0.8528

    [spin.n1]
    a_par = 1194kHz
    a_perp = 233.2kHz
    t2_star = 6.14ms

    [coupling]
    n2-n1 = 5.12Hz

    [decoherence]
    tau_c0 = 212.6us
    beta = 2
    chi = 0.5134

    [drive]
    mw_rabi = 4.386MHz
    rf_rabi = 3.564kHz, 4.2kHz

    [ssr]
    bright_mean = 20.5
    dark_mean = 6

Quantities carry units and go through the DSL unit parser; every section is
validated by the app serializers.
"""

import configparser
import logging
import math
from pathlib import Path

import attrs
from django.conf import settings

from measurement.serializers import SsrModelSerializer
from measurement.ssr import DEFAULT_MODEL, SsrModel
from spinmodel.params import DriveParams, RegisterParams
from spinmodel.presets import table_drive, table_register
from spinmodel.serializers import DriveSerializer, RegisterConfigSerializer
from spinreg.exceptions import ConfigError

logger = logging.getLogger(__name__)

SECTIONS = ('register', 'coupling', 'decoherence', 'drive', 'ssr')
SPIN_PREFIX = 'spin.'
FRAMES = ('exact', 'fast')


@attrs.frozen
class RegisterConfig:
    params: RegisterParams
    drive: DriveParams
    ssr: SsrModel = DEFAULT_MODEL
    source: str | None = None


def _errors(errors, prefix=''):
    """Flatten DRF error dicts into ``field: message`` fragments."""
    if isinstance(errors, dict):
        parts = []
        for key, value in errors.items():
            name = key if key != 'non_field_errors' else ''
            parts.extend(_errors(value, f'{prefix}{name}.' if name else prefix))
        return parts
    if isinstance(errors, list):
        parts = []
        for index, value in enumerate(errors):
            if isinstance(value, (dict, list)):
                parts.extend(_errors(value, f'{prefix}{index}.'))
            else:
                parts.append(f'{prefix.rstrip(".")}: {value}' if prefix else str(value))
        return parts
    return [f'{prefix.rstrip(".")}: {errors}' if prefix else str(errors)]


def _validated(serializer, path):
    if not serializer.is_valid():
        raise ConfigError(f'{path}: ' + '; '.join(_errors(serializer.errors)))
    return serializer.save()


def _read(path):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding='utf-8') as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f'cannot read config {path}: {exc.strerror or exc}') from None
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f'{path}: malformed config: {exc}') from None
    return parser


def register_data(parser, path):
    """Serializer input for the register sections of ``parser``."""
    unknown = [s for s in parser.sections() if s not in SECTIONS and not s.startswith(SPIN_PREFIX)]
    if unknown:
        raise ConfigError(f'{path}: unknown section(s) {", ".join(unknown)}')
    if not parser.has_section('register'):
        raise ConfigError(f'{path}: missing [register] section')
    data = dict(parser['register'])
    if parser.has_section('decoherence'):
        data.update(parser['decoherence'])
    data['spins'] = [
        {'label': section[len(SPIN_PREFIX):], **parser[section]}
        for section in parser.sections() if section.startswith(SPIN_PREFIX)
    ]
    couplings = []
    if parser.has_section('coupling'):
        for pair, strength in parser['coupling'].items():
            first, sep, second = pair.partition('-')
            if not sep:
                raise ConfigError(f'{path}: coupling key {pair!r} must read <spin>-<spin>')
            couplings.append({'first': first.strip(), 'second': second.strip(), 'strength': strength})
    data['couplings'] = couplings
    return data


def drive_data(parser):
    if not parser.has_section('drive'):
        return {}
    data = dict(parser['drive'])
    if 'rf_rabi' in data:
        data['rf_rabi'] = [item.strip() for item in data['rf_rabi'].split(',') if item.strip()]
    return data


def load_register_config(path):
    """RegisterConfig from an ``.ini`` file; every problem is a ConfigError naming the file."""
    path = str(path)
    parser = _read(path)
    params = _validated(RegisterConfigSerializer(data=register_data(parser, path)), path)
    drive = _validated(DriveSerializer(data=drive_data(parser)), path)
    ssr = DEFAULT_MODEL
    if parser.has_section('ssr'):
        ssr = _validated(SsrModelSerializer(data=dict(parser['ssr'])), path)
    logger.info('loaded %d-spin register from %s', params.K, path)
    return RegisterConfig(params, drive, ssr, path)


def default_register_config():
    """The bundled four-spin parameter table."""
    return RegisterConfig(table_register(4), table_drive(4), DEFAULT_MODEL, None)


def _positive_or_none(instance, attribute, value):
    if value is not None and not (value > 0 and math.isfinite(value)):
        raise ConfigError(f'{attribute.name} must be > 0, got {value}')


@attrs.frozen
class RunConfig:
    """Options every command shares: register file, frame, step size, decoherence, seed, output."""

    config_path: str | None = None
    frame: str = attrs.field(default='exact', validator=attrs.validators.in_(FRAMES))
    max_dt: float | None = attrs.field(default=None, validator=_positive_or_none)
    decoherence: bool = True
    seed: int | None = None
    output_dir: str = attrs.Factory(lambda: settings.SPINREG.get('OUTPUT_DIR', 'out'))
    jobs: int = attrs.Factory(lambda: settings.SPINREG.get('JOBS', 1))

    def __attrs_post_init__(self):
        if self.config_path is not None and not Path(self.config_path).is_file():
            raise ConfigError(f'config file not found: {self.config_path}')
        if self.jobs < 1:
            raise ConfigError(f'--jobs must be >= 1, got {self.jobs}')

    def register(self):
        if self.config_path is None:
            return default_register_config()
        return load_register_config(self.config_path)

    def payload(self):
        """JSON-safe form handed to sweep workers."""
        return attrs.asdict(self)
