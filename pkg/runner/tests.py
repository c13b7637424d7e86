import io
import json
import math
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import yaml
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from spinmodel.presets import table_drive, table_register
from spinreg.exceptions import ConfigError

from .cli import main
from .config import RunConfig, default_register_config, load_register_config
from .output import csv_text, json_text
from .simulation import parse_nuclear_state
from .sweeps import check_template, parse_axis, parse_sweep, placeholders, substitute
from .tasks import dispatch

ROOT = Path(settings.BASE_DIR)
CONFIGS = ROOT / 'configs'
SCRIPTS = ROOT / 'scripts'
TOY = str(CONFIGS / 'toy.ini')
HAHN_TEMPLATE = str(SCRIPTS / 'templates' / 'hahn_tau.sqt')


def run_command(*args):
    stdout, stderr = io.StringIO(), io.StringIO()
    call_command(*args, stdout=stdout, stderr=stderr)
    return stdout.getvalue(), stderr.getvalue()


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.tmp = Path(self._tmp.name)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return str(path)


class RegisterConfigTests(TempDirMixin, SimpleTestCase):
    def test_bundled_file_matches_parameter_table(self):
        config = load_register_config(CONFIGS / 'register.ini')
        table = table_register(4)
        self.assertEqual(config.params.K, 4)
        self.assertEqual(config.params.f_e, table.f_e)
        for loaded, expected in zip(config.params.spins, table.spins):
            self.assertAlmostEqual(loaded.a_par / expected.a_par, 1.0, places=12)
            self.assertAlmostEqual(loaded.a_perp / expected.a_perp, 1.0, places=12)
        self.assertAlmostEqual(config.params.coupling(0, 1) / table.coupling(0, 1), 1.0, places=12)
        self.assertAlmostEqual(config.params.tau_c0 / table.tau_c0, 1.0, places=12)
        self.assertAlmostEqual(config.drive.mw_rabi / table_drive(4).mw_rabi, 1.0, places=12)
        self.assertEqual(config.ssr.bright_mean, 20.5)

    def test_toy_config_without_decoherence_section(self):
        config = load_register_config(TOY)
        self.assertEqual(config.params.K, 2)
        self.assertTrue(math.isinf(config.params.tau_c0))
        self.assertAlmostEqual(config.params.spins[0].a_par, 2 * math.pi * 200e3)
        self.assertEqual(config.source, TOY)

    def test_default_is_the_four_spin_table(self):
        self.assertEqual(default_register_config().params.K, 4)

    def test_unknown_section(self):
        path = self.write('bad.ini', '[register]\nomega_L_e = 1GHz\nomega_L_n = 1MHz\n[extras]\nx = 1\n')
        with self.assertRaisesMessage(ConfigError, 'unknown section(s) extras'):
            load_register_config(path)

    def test_missing_register_section(self):
        path = self.write('bad.ini', '[drive]\nmw_rabi = 1MHz\n')
        with self.assertRaisesMessage(ConfigError, 'missing [register] section'):
            load_register_config(path)

    def test_wrong_unit_names_file_and_field(self):
        path = self.write('bad.ini', '[register]\nomega_L_e = 1GHz\nomega_L_n = 3us\n')
        with self.assertRaises(ConfigError) as ctx:
            load_register_config(path)
        self.assertIn(path, str(ctx.exception))
        self.assertIn('omega_L_n', str(ctx.exception))

    def test_malformed_ini(self):
        path = self.write('bad.ini', 'no section header\n')
        with self.assertRaisesMessage(ConfigError, 'malformed config'):
            load_register_config(path)

    def test_run_config_checks(self):
        with self.assertRaisesMessage(ConfigError, 'config file not found'):
            RunConfig(config_path=str(self.tmp / 'missing.ini'))
        with self.assertRaises(ConfigError):
            RunConfig(max_dt=0.0)
        with self.assertRaises(ConfigError):
            RunConfig(jobs=0)

    @override_settings(SPINREG={**settings.SPINREG, 'JOBS': 3, 'OUTPUT_DIR': 'elsewhere'})
    def test_run_config_defaults_follow_settings(self):
        run = RunConfig()
        self.assertEqual(run.jobs, 3)
        self.assertEqual(run.output_dir, 'elsewhere')

    def test_nuclear_state_lists(self):
        self.assertEqual(parse_nuclear_state('up', 3), ['up', 'up', 'up'])
        self.assertEqual(parse_nuclear_state('up, down', 2), ['up', 'down'])
        self.assertIsNone(parse_nuclear_state(None, 2))
        with self.assertRaises(ConfigError):
            parse_nuclear_state('up,down', 3)
        with self.assertRaises(ConfigError):
            parse_nuclear_state('sideways', 1)


class SweepSpecTests(SimpleTestCase):
    def test_range_includes_stop(self):
        axis = parse_axis('tau=8.391us:8.404us:1ns')
        self.assertEqual(len(axis.values), 14)
        self.assertEqual(axis.values[0], 8.391e-6)
        self.assertEqual(axis.values[4], 8.395e-6)
        self.assertEqual(axis.values[-1], 8.404e-6)
        self.assertEqual(axis.column, 'tau_s')

    def test_count_list(self):
        axis = parse_axis('N=20,40,380')
        self.assertEqual(axis.values, (20, 40, 380))
        self.assertEqual(axis.column, 'N')
        self.assertEqual(parse_axis('N=20:380:20').values[-1], 380)

    def test_empty_range(self):
        with self.assertRaisesMessage(ConfigError, 'empty'):
            parse_axis('tau=2us:1us:1ns')

    def test_bad_axes(self):
        for text in ('tau', 'speed=1:2:1', 'tau=1us:2us:0ns', 'tau=1us:2us', 'N=1.5', 'N=0', 'tau=1MHz'):
            with self.subTest(text=text), self.assertRaises(ConfigError):
                parse_axis(text)

    def test_grid_order_is_outer_major(self):
        sweep = parse_sweep('tau=1us,2us', 'N=4,8,16')
        self.assertEqual(len(sweep), 6)
        self.assertEqual(sweep.points()[:4], [
            {'tau': 1e-6, 'N': 4}, {'tau': 1e-6, 'N': 8}, {'tau': 1e-6, 'N': 16}, {'tau': 2e-6, 'N': 4},
        ])

    def test_same_axis_twice(self):
        with self.assertRaises(ConfigError):
            parse_sweep('N=1,2', 'N=3,4')

    @override_settings(SPINREG={**settings.SPINREG, 'MAX_GRID_POINTS': 10})
    def test_grid_size_limit(self):
        with self.assertRaisesMessage(ConfigError, 'more than the limit of 10'):
            parse_sweep('tau=1us:4us:1us', 'N=1,2,3')

    def test_substitution_renders_units(self):
        template = 'wait ${tau}\nrepeat ${N} {\n  mw pi\n}\n'
        sweep = parse_sweep('tau=8.395us', 'N=24')
        self.assertEqual(placeholders(template), {'tau', 'N'})
        check_template(template, sweep)
        self.assertEqual(substitute(template, sweep, sweep.points()[0]),
                         'wait 8.395us\nrepeat 24 {\n  mw pi\n}\n')

    def test_template_checks(self):
        with self.assertRaisesMessage(ConfigError, 'no placeholder for ${N}'):
            check_template('wait ${tau}', parse_sweep('tau=1us', 'N=2'))
        with self.assertRaisesMessage(ConfigError, 'not swept: ${N}'):
            check_template('wait ${tau}\nrepeat ${N} {\n}\n', parse_sweep('tau=1us'))


class OutputTests(SimpleTestCase):
    def test_json_is_sorted_and_newline_terminated(self):
        self.assertEqual(json_text({'b': 1, 'a': 0.5}), '{\n  "a": 0.5,\n  "b": 1\n}\n')

    def test_csv_uses_repr_floats(self):
        self.assertEqual(csv_text(['tau_s', 'N'], [[8.395e-06, 4]]), 'tau_s,N\n8.395e-06,4\n')

    def test_non_finite_values_are_refused(self):
        from spinreg.exceptions import NumericError
        with self.assertRaises(NumericError):
            json_text({'x': float('nan')})
        with self.assertRaises(NumericError):
            csv_text(['x'], [[float('inf')]])


class DispatchTests(SimpleTestCase):
    def payloads(self):
        run = RunConfig(config_path=TOY, decoherence=False).payload()
        return [
            {'source': f'mw pi/2\nwait {tau}us\nmw pi/2\n', 'filename': None, 'run': run, 'nuclear_state': None}
            for tau in (1, 2, 3)
        ]

    def test_local_results_follow_submission_order(self):
        payloads = self.payloads()
        serial = dispatch(payloads, jobs=1, backend='local')
        self.assertEqual([round(r['duration_s'] * 1e6, 6) for r in serial],
                         [1.01, 2.01, 3.01])

    def test_celery_backend_matches_local(self):
        payloads = self.payloads()
        local = dispatch(payloads, jobs=1, backend='local')
        eager = dispatch(payloads, jobs=1, backend='celery')
        self.assertEqual(local, eager)

    @override_settings(SPINREG={**settings.SPINREG, 'SWEEP_BACKEND': 'carrier-pigeon'})
    def test_unknown_backend(self):
        with self.assertRaises(ConfigError):
            dispatch(self.payloads(), jobs=1)


class SimulateCommandTests(TempDirMixin, SimpleTestCase):
    def test_bell_script_reaches_the_bell_state(self):
        out, _ = run_command('simulate', str(SCRIPTS / 'bell.sq'), '--nuclei', 'up', '--decoherence', 'off')
        document = json.loads(out)
        self.assertGreaterEqual(document['observables']['bell_fidelity'], 0.999)
        self.assertEqual(document['config'], 'bundled')
        self.assertIn('sz_n4', document['observables'])

    def test_repeated_runs_are_byte_identical(self):
        script = self.write('two.sq', 'rot pi/2 target=n1\nwait 2us\nmw pi\n')
        args = ('simulate', script, '--seed', '7', '--shots', '200', '--config', TOY)
        first, _ = run_command(*args)
        second, _ = run_command(*args)
        self.assertEqual(first, second)
        self.assertEqual(json.loads(first)['ssr']['shots'], 200)

    def test_missing_program_names_the_path(self):
        missing = str(self.tmp / 'absent.sq')
        with self.assertRaises(CommandError) as ctx:
            run_command('simulate', missing)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn(missing, str(ctx.exception))

    def test_parse_error_is_an_input_error(self):
        script = self.write('bad.sq', 'wait 1us\nwait 3 parsecs\n')
        with self.assertRaises(CommandError) as ctx:
            run_command('simulate', script, '--config', TOY)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('bad.sq:2:', str(ctx.exception))

    def test_usage_errors_exit_one(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('simulate', str(SCRIPTS / 'bell.sq'), '--frame', 'sideways')
        self.assertEqual(ctx.exception.returncode, 1)
        with self.assertRaises(CommandError) as ctx:
            run_command('simulate', str(SCRIPTS / 'bell.sq'), '--max-dt', '5MHz')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_writes_files_to_out(self):
        script = self.write('echo.sq', 'mw pi/2\nwait 1us\nbarrier mid\nmw pi\nwait 1us\nmw pi/2\n')
        out_dir = self.tmp / 'results'
        run_command('simulate', script, '--config', TOY, '--series', '--shots', '50', '--out', str(out_dir))
        self.assertEqual(sorted(p.name for p in out_dir.iterdir()),
                         ['echo.json', 'echo_series.csv', 'echo_ssr.csv'])
        series = (out_dir / 'echo_series.csv').read_text().splitlines()
        self.assertEqual(series[0], 't_s,label,sz_e,sz_n1,sz_n2')
        self.assertEqual([row.split(',')[1] for row in series[1:]],
                         ['pulse', 'delay', 'barrier', 'pulse', 'delay', 'pulse'])


class SweepCommandTests(TempDirMixin, SimpleTestCase):
    def test_tau_sweep_csv(self):
        out, _ = run_command('sweep', HAHN_TEMPLATE, '--sweep', 'tau=1us:3us:1us', '--config', TOY,
                             '--decoherence', 'off')
        lines = out.splitlines()
        self.assertEqual(len(lines), 4)
        header = lines[0].split(',')
        self.assertEqual(header[0], 'tau_s')
        self.assertIn('sz_e', header)
        self.assertEqual([line.split(',')[0] for line in lines[1:]], ['1e-06', '2e-06', '3e-06'])

    def test_two_axis_grid_to_file(self):
        template = self.write('grid.sqt', 'mw pi/2\nrepeat ${N} {\n  wait ${tau}\n  mw pi\n  wait ${tau}\n}\n')
        run_command('sweep', template, '--sweep', 'tau=1us,2us', '--sweep2', 'N=1,2', '--config', TOY,
                    '--out', str(self.tmp))
        rows = (self.tmp / 'grid.csv').read_text().splitlines()
        self.assertTrue(rows[0].startswith('tau_s,N,'))
        self.assertEqual([row.split(',')[:2] for row in rows[1:]],
                         [['1e-06', '1'], ['1e-06', '2'], ['2e-06', '1'], ['2e-06', '2']])

    def test_empty_range_exits_one(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('sweep', HAHN_TEMPLATE, '--sweep', 'tau=3us:1us:1us', '--config', TOY)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_placeholder_exits_one(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('sweep', HAHN_TEMPLATE, '--sweep', 'N=1,2', '--config', TOY)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('${N}', str(ctx.exception))


class ValidateCommandTests(TempDirMixin, SimpleTestCase):
    def test_bundled_scripts_are_valid(self):
        scripts = sorted(str(p) for p in SCRIPTS.glob('*.sq'))
        out, err = run_command('validate', *scripts)
        self.assertEqual(err, '')
        self.assertEqual(len(out.splitlines()), len(scripts))
        self.assertTrue(all(': ok, ' in line for line in out.splitlines()))

    def test_diagnostics_are_file_line_column(self):
        good = self.write('good.sq', 'wait 1us\n')
        bad = self.write('bad.sq', 'wait 1us\nrf pi target=n9\n')
        with self.assertRaises(CommandError) as ctx:
            run_command('validate', good, bad, '--config', TOY)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('1 of 2', str(ctx.exception))

        stderr = io.StringIO()
        with self.assertRaises(CommandError):
            call_command('validate', bad, '--config', TOY, stdout=io.StringIO(), stderr=stderr)
        self.assertTrue(stderr.getvalue().startswith(f'{bad}:2:'))

    def test_canonical_output(self):
        script = self.write('loose.sq', 'wait   1000ns\nrepeat 2 {\nmw pi\n}\n')
        out, _ = run_command('validate', script, '--canonical', '--config', TOY)
        self.assertEqual(out, 'wait 1us\nrepeat 2 {\n  mw pi\n}\n')


class FitCommandTests(TempDirMixin, SimpleTestCase):
    DATA = str(ROOT / 'data' / 'hahn_synthetic.csv')

    def test_stretched_exp_recovers_hahn_time(self):
        out, _ = run_command('fit', 'stretched_exp', self.DATA)
        document = json.loads(out)
        self.assertTrue(document['converged'])
        self.assertAlmostEqual(document['params']['T'] * 1e6, 212.6, delta=2.0)

    def test_fixed_parameter_and_output_file(self):
        out, _ = run_command('fit', 'stretched_exp', self.DATA, '--fixed', 'beta=1.8', '--out', str(self.tmp))
        document = json.loads(out)
        self.assertEqual(document['params']['beta'], 1.8)
        self.assertIn('beta', document['fixed'])
        self.assertEqual(json.loads((self.tmp / 'hahn_synthetic_stretched_exp.json').read_text()), document)

    def test_init_file(self):
        init = self.write('init.json', json.dumps({'T': 2e-4, 'beta': 2.0}))
        out, _ = run_command('fit', 'stretched_exp', self.DATA, '--init', init)
        self.assertAlmostEqual(json.loads(out)['params']['T'] * 1e6, 212.6, delta=2.0)

    def test_unknown_model_lists_registry(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('fit', 'banana', self.DATA)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('stretched_exp', str(ctx.exception))
        self.assertIn('xy2d', str(ctx.exception))

    def test_malformed_csv_names_the_line(self):
        data = self.write('bad.csv', 'tau_s,contrast\n1e-6,0.5\n2e-6,oops\n')
        with self.assertRaises(CommandError) as ctx:
            run_command('fit', 'exp_decay', data)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('line 3', str(ctx.exception))

    def test_bad_fixed_syntax(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('fit', 'stretched_exp', self.DATA, '--fixed', 'beta')
        self.assertEqual(ctx.exception.returncode, 1)


class ReproduceCommandTests(TempDirMixin, SimpleTestCase):
    def test_ssr_figure_and_manifest(self):
        out, _ = run_command('reproduce', 'fig5a', '--quick', '--seed', '3', '--out', str(self.tmp))
        target = self.tmp / 'fig5a'
        self.assertEqual(sorted(p.name for p in target.iterdir()),
                         ['manifest.yaml', 'ssr_n1.csv', 'ssr_n2.csv', 'ssr_n3.csv', 'ssr_summary.json'])
        self.assertEqual(len(out.splitlines()), 5)
        manifest = yaml.safe_load((target / 'manifest.yaml').read_text())
        self.assertEqual(manifest['figure'], 'fig5a')
        self.assertEqual(manifest['run']['seed'], 3)
        self.assertTrue(manifest['run']['quick'])
        self.assertIn('ssr_summary.json', manifest['files'])
        summary = json.loads((target / 'ssr_summary.json').read_text())
        self.assertEqual(sorted(summary['spins']), ['n1', 'n2', 'n3'])

    def test_reproduce_is_deterministic(self):
        run_command('reproduce', 'fig5a', '--quick', '--out', str(self.tmp / 'a'))
        run_command('reproduce', 'fig5a', '--quick', '--out', str(self.tmp / 'b'))
        for name in ('ssr_n1.csv', 'ssr_summary.json', 'manifest.yaml'):
            self.assertEqual((self.tmp / 'a' / 'fig5a' / name).read_text(),
                             (self.tmp / 'b' / 'fig5a' / name).read_text())

    def test_rabi_figure_with_toy_register(self):
        run_command('reproduce', 'fig3a', '--quick', '--config', TOY, '--out', str(self.tmp))
        rows = (self.tmp / 'fig3a' / 'rabi.csv').read_text().splitlines()
        self.assertTrue(rows[0].startswith('duration_s,'))
        self.assertEqual(len(rows), 7)
        manifest = yaml.safe_load((self.tmp / 'fig3a' / 'manifest.yaml').read_text())
        self.assertEqual(manifest['config'], TOY)

    def test_bell_figure_files(self):
        run_command('reproduce', 'fig6d', '--quick', '--out', str(self.tmp))
        target = self.tmp / 'fig6d'
        self.assertEqual(sorted(p.name for p in target.iterdir()), [
            'fidelity.json', 'manifest.yaml', 'populations_reference.csv',
            'populations_x.csv', 'populations_y.csv', 'populations_z.csv',
        ])
        fidelity = json.loads((target / 'fidelity.json').read_text())
        self.assertEqual(fidelity['cphase_fidelity'], 0.73)
        self.assertLessEqual(fidelity['degraded']['fidelity'], fidelity['ideal']['fidelity'] + 1e-9)

    def test_unknown_figure(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('reproduce', 'fig9z', '--out', str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('fig6d', str(ctx.exception))
        self.assertFalse((self.tmp / 'fig9z').exists())


class ConsoleScriptTests(TempDirMixin, SimpleTestCase):
    def invoke(self, *args):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            try:
                main(['spinreg', *args])
            except SystemExit as exc:
                return exc.code, stdout.getvalue(), stderr.getvalue()
        return 0, stdout.getvalue(), stderr.getvalue()

    def test_success_exits_zero(self):
        code, out, _ = self.invoke('validate', str(SCRIPTS / 'sedor.sq'))
        self.assertEqual(code, 0)
        self.assertIn('sedor.sq: ok', out)

    def test_usage_error_exits_one(self):
        code, _, err = self.invoke('simulate', str(SCRIPTS / 'bell.sq'), '--frame', 'sideways')
        self.assertEqual(code, 1)
        self.assertIn('sideways', err)

    def test_input_error_exits_one_with_diagnostic(self):
        bad = self.write('bad.sq', 'repeat 2 {\n  wait 1us\n')
        code, _, err = self.invoke('validate', bad)
        self.assertEqual(code, 1)
        self.assertIn(f'{bad}:1:10:', err)
