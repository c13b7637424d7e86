import logging
from pathlib import Path

from estimation.data import read_grid_csv, read_series_csv
from estimation.fitmodels import model_names
from estimation.fitting import fit
from estimation.serializers import dump_fit_result, load_parameter_values
from estimation.xy2d import fit_xy2d
from runner.commands import SpinregCommand
from runner.output import write_text
from seqlang import units
from spinmodel.presets import F_E_BY_TAU
from spinreg.exceptions import ConfigError, FitError, SeqlangError, UnknownModelError

logger = logging.getLogger(__name__)

GRID_MODEL = 'xy2d'


def parse_fixed(items):
    """``name=value`` pins a parameter, ``name=free`` releases a default-pinned one."""
    fixed = {}
    for item in items or ():
        name, sep, text = item.partition('=')
        name, text = name.strip(), text.strip()
        if not sep or not name or not text:
            raise ConfigError(f'--fixed expects name=value, got {item!r}')
        if text == 'free':
            fixed[name] = None
            continue
        try:
            fixed[name] = float(text)
        except ValueError:
            try:
                fixed[name] = units.parse_quantity(text).value
            except SeqlangError as exc:
                raise ConfigError(f'--fixed {name}: {exc.message}') from None
    return fixed


def read_data(path, reader):
    try:
        with open(path, encoding='utf-8', newline='') as stream:
            return reader(stream)
    except OSError as exc:
        raise ConfigError(f'cannot read {path}: {exc.strerror or exc}') from None
    except UnicodeDecodeError:
        raise ConfigError(f'{path} is not valid UTF-8') from None
    except ConfigError as exc:
        raise ConfigError(f'{path}: {exc}') from None


def read_init(path):
    if not path:
        return None
    try:
        text = Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f'cannot read {path}: {getattr(exc, "strerror", None) or exc}') from None
    return load_parameter_values(text, source=str(path))


class Command(SpinregCommand):
    help = 'Fit a registered model (or the xy2d grid model) to a CSV data file.'

    def add_arguments(self, parser):
        parser.add_argument('model', help='model name, e.g. stretched_exp or xy2d')
        parser.add_argument('data', help='x,y[,y_err] CSV (tau_s,N,value grid for xy2d)')
        parser.add_argument('--init', help='JSON file of starting values')
        parser.add_argument('--fixed', action='append', metavar='NAME=VALUE',
                            help='pin a parameter (repeatable); NAME=free releases it')
        parser.add_argument('--best-effort', action='store_true', dest='best_effort',
                            help='exit 0 even if the fit does not converge')
        parser.add_argument('--components', type=int, help='component count for multi_* models')
        parser.add_argument('--bootstrap', type=int, default=0, help='seeded bootstrap refits for uncertainties')
        self.add_run_arguments(parser)

    def run(self, model, data, **options):
        if model != GRID_MODEL and model not in model_names():
            raise UnknownModelError(
                f'unknown fit model {model!r}; registered: {", ".join(sorted([*model_names(), GRID_MODEL]))}'
            )
        init = read_init(options.get('init'))
        fixed = parse_fixed(options.get('fixed'))
        run = self.run_config(options)

        if model == GRID_MODEL:
            if options.get('bootstrap'):
                raise ConfigError('--bootstrap applies to series models, not xy2d')
            grid = read_data(data, read_grid_csv)
            register = run.register()
            result = fit_xy2d(
                grid, register.params, register.drive,
                f_e_by_tau=F_E_BY_TAU if run.config_path is None else None,
                init=init, fixed=fixed, jobs=run.jobs, frame=run.frame,
                max_dt=run.max_dt, decoherence=run.decoherence,
            )
        else:
            series = read_data(data, read_series_csv)
            result = fit(model, series, init=init, fixed=fixed, bootstrap=options.get('bootstrap') or 0,
                         rng_seed=run.seed, components=options.get('components'))

        text = dump_fit_result(result)
        self.emit(text)
        if options.get('out'):
            path = write_text(Path(options['out']) / f'{Path(data).stem}_{model}.json', text)
            logger.info('fit result written to %s', path)
        if not result.converged:
            if options.get('best_effort'):
                logger.warning('%s fit did not converge; reporting best effort', model)
            else:
                raise FitError(f'{model} fit did not converge after {result.iterations} iterations '
                               f'(residual norm {result.residual_norm:.6g}); use --best-effort to accept it')
