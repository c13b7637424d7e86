import math
import random
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from pulses.shapes import SINC
from sequences.library import BellOptions, bell_circuit, cphase_gate, sedor_sequence
from sequences.program import (
    MW, Barrier, ConditionalPhase, Delay, Measure, Noisy, Pulse, PulseProgram, Repeat, Reset,
    Rotation,
)
from spinmodel.params import DriveParams
from spinmodel.presets import ideal_register, table_register
from spinreg.exceptions import SeqlangError

from . import units
from .formatter import format_source
from .lowering import validate
from .nodes import Script, Statement
from .parser import parse, parse_file

SCRIPTS = Path(settings.BASE_DIR) / 'scripts'


def lower(text, params=None, drive=None):
    return validate(parse(text), params or table_register(4), drive)


class UnitTests(SimpleTestCase):
    def test_durations(self):
        self.assertEqual(units.parse_duration('8.395us'), 8.395e-6)
        self.assertEqual(units.parse_duration('8.395µs'), 8.395e-6)
        self.assertEqual(units.parse_duration('5ms'), 5e-3)
        self.assertEqual(units.parse_duration('228ns'), 228e-9)

    def test_frequencies(self):
        self.assertEqual(units.parse_frequency('150kHz'), 150e3)
        self.assertEqual(units.parse_frequency('3.5825184MHz'), 3.5825184e6)
        self.assertAlmostEqual(units.parse_angular_frequency('1Hz'), 2 * math.pi)

    def test_angles(self):
        self.assertEqual(units.parse_angle('pi/2'), math.pi / 2)
        self.assertEqual(units.parse_angle('2pi'), 2 * math.pi)
        self.assertEqual(units.parse_angle('-pi'), -math.pi)
        self.assertAlmostEqual(units.parse_angle('90deg'), math.pi / 2)
        self.assertEqual(units.parse_angle('0.5rad'), 0.5)

    def test_canonical_formatting(self):
        self.assertEqual(units.format_duration(8.395e-6), '8.395us')
        self.assertEqual(units.format_duration(5e-3), '5ms')
        self.assertEqual(units.format_frequency(150e3), '150kHz')
        self.assertEqual(units.format_angle(math.pi / 2), 'pi/2')
        self.assertEqual(units.format_angle(-math.pi), '-pi')
        self.assertEqual(units.format_angle(0.5), '0.5rad')

    def test_wrong_dimension(self):
        with self.assertRaisesMessage(SeqlangError, 'expected a duration'):
            units.parse_duration('150kHz')

    def test_unknown_unit(self):
        with self.assertRaisesMessage(SeqlangError, "unknown unit 'xs'"):
            units.parse_quantity('3xs')

    def test_division_by_zero(self):
        with self.assertRaises(SeqlangError):
            units.parse_angle('pi/0')


class ParseTests(SimpleTestCase):
    def test_wait(self):
        program = lower('wait 8.395us')
        self.assertEqual(program.elements, (Delay(8.395e-6),))

    def test_decoupling_unit_cell(self):
        program = lower('repeat 24 { wait 4.1975us\n mw pi phase=0deg\n wait 4.1975us }')
        (block,) = program.elements
        self.assertIsInstance(block, Repeat)
        self.assertEqual(block.n, 24)
        self.assertEqual([type(e) for e in block.body], [Delay, Pulse, Delay])
        self.assertEqual(block.body[0].tau, 4.1975e-6)
        pulse = block.body[1]
        self.assertEqual(pulse.channel, MW)
        self.assertAlmostEqual(pulse.envelope.duration, 114e-9, delta=1e-15)

    def test_cphase_statement(self):
        params = table_register(3)
        program = lower('cphase cond=d1d2u3 bw=150kHz', params)
        expected = cphase_gate('d1d2u3', 150e3, params)
        self.assertEqual(program.elements, expected.elements)
        self.assertEqual(program.elements[0].envelope.kind, SINC)

    def test_comments_and_blank_lines(self):
        script = parse('# header\n\nwait 1us   # trailing\n\n')
        self.assertEqual(len(script), 1)

    def test_empty_file(self):
        self.assertEqual(lower(''), PulseProgram())
        self.assertEqual(lower('# nothing here\n'), PulseProgram())

    def test_arguments_kept_in_signature_order(self):
        first = parse('mw pi phase=pi/2 shape=sinc bw=500kHz')
        second = parse('mw pi bw=500kHz shape=sinc phase=pi/2')
        self.assertEqual(first, second)

    def test_bytes_input(self):
        self.assertEqual(parse(b'wait 1us'), parse('wait 1us'))

    def test_markers(self):
        program = lower('reset_e\nmeasure_e after_init\nbarrier readout')
        self.assertEqual(program.elements, (Reset(), Measure('after_init'), Barrier('readout')))

    def test_noisy_block(self):
        program = lower('noisy 0.73 {\n  rot pi target=e\n}')
        self.assertEqual(program.elements, (Noisy(0.73, [Rotation(None, math.pi)]),))

    def test_sinc_pulse(self):
        (pulse,) = lower('mw pi shape=sinc bw=1.2MHz').elements
        self.assertEqual(pulse.envelope.kind, SINC)
        self.assertAlmostEqual(pulse.envelope.duration, 4 / 1.2e6)
        self.assertAlmostEqual(pulse.envelope.area(), math.pi)

    def test_rf_rabi_override(self):
        (pulse,) = lower('rf pi target=n2 cond=e:down rabi=5kHz').elements
        self.assertEqual(pulse.target, 1)
        self.assertEqual(pulse.condition, 'down')
        self.assertAlmostEqual(pulse.envelope.duration, 1e-4)

    def test_unconditional_rf_drives_both_lines(self):
        (block,) = lower('rf pi/2 target=n1').elements
        self.assertEqual(sorted(p.condition for p in block.pulses), ['down', 'up'])


class DiagnosticTests(SimpleTestCase):
    def assertSpan(self, error, line, column):
        self.assertIsNotNone(error.span)
        self.assertEqual((error.span.line, error.span.column), (line, column))

    def test_unknown_unit_points_at_value(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('wait 1us\nwait 8.395xs')
        self.assertSpan(ctx.exception, 2, 6)
        self.assertIn("unknown unit 'xs'", str(ctx.exception))

    def test_duplicate_keyword(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('mw pi phase=0rad phase=pi')
        self.assertSpan(ctx.exception, 1, 18)
        self.assertIn("duplicate keyword 'phase'", ctx.exception.message)

    def test_unknown_statement_lists_known(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('jump 3')
        self.assertIn('wait', ctx.exception.message)
        self.assertSpan(ctx.exception, 1, 1)

    def test_missing_required_keyword(self):
        with self.assertRaisesMessage(SeqlangError, 'cnnote needs bw=, state='):
            parse('cnnote target=n1')

    def test_unclosed_block_points_at_brace(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('repeat 2 {\n  wait 1us\n')
        self.assertSpan(ctx.exception, 1, 10)

    def test_stray_closing_brace(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('wait 1us\n}')
        self.assertSpan(ctx.exception, 2, 1)

    def test_block_on_plain_statement(self):
        with self.assertRaisesMessage(SeqlangError, "wait does not take a '{' block"):
            parse('wait 1us {\n}')

    def test_negative_duration(self):
        with self.assertRaisesMessage(SeqlangError, 'duration must be >= 0'):
            parse('wait -1us')

    def test_unknown_spin_names_span(self):
        with self.assertRaises(SeqlangError) as ctx:
            lower('wait 1us\nrf pi target=n7 cond=e:up', table_register(4))
        self.assertSpan(ctx.exception, 2, 14)
        self.assertIn('n7', str(ctx.exception))

    def test_repeat_zero(self):
        script = parse('repeat 0 {\n  wait 1us\n}')
        with self.assertRaises(SeqlangError) as ctx:
            validate(script, table_register(4))
        self.assertSpan(ctx.exception, 1, 8)

    def test_unresolved_condition(self):
        with self.assertRaises(SeqlangError) as ctx:
            lower('wait 1us\ncphase cond=d1d2 bw=150kHz', table_register(3))
        self.assertSpan(ctx.exception, 2, 1)
        self.assertIn('n3', ctx.exception.message)

    def test_sinc_needs_bandwidth(self):
        with self.assertRaisesMessage(SeqlangError, 'a sinc pulse needs bw='):
            lower('mw pi shape=sinc')

    def test_simul_holds_pulses_only(self):
        with self.assertRaisesMessage(SeqlangError, 'simul blocks hold mw and rf pulses only'):
            lower('simul {\n  wait 1us\n}')

    @override_settings(SPINREG={**settings.SPINREG, 'MAX_NESTING': 2})
    def test_nesting_limit(self):
        with self.assertRaisesMessage(SeqlangError, 'blocks nest deeper than 2 levels'):
            parse('repeat 2 {\nrepeat 2 {\nrepeat 2 {\nwait 1us\n}\n}\n}')

    def test_rendering_with_filename(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('wait 1xs', filename='cell.sq')
        self.assertTrue(str(ctx.exception).startswith('cell.sq:1:6: '))

    def test_rendering_without_filename(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse('wait 1xs')
        self.assertTrue(str(ctx.exception).startswith('<input>:1:6: '))

    def test_invalid_utf8(self):
        with self.assertRaises(SeqlangError) as ctx:
            parse(b'wait 1us\n\xffwait')
        self.assertSpan(ctx.exception, 2, 1)

    def test_missing_file(self):
        with self.assertRaisesMessage(SeqlangError, 'no_such_script.sq'):
            parse_file('no_such_script.sq')


class FormatTests(SimpleTestCase):
    def test_nested_repeats_indent(self):
        script = parse('repeat 2 {\nrepeat 3 {\nwait 1us\n}\n}')
        self.assertEqual(
            format_source(script),
            'repeat 2 {\n  repeat 3 {\n    wait 1us\n  }\n}\n',
        )

    def test_canonical_units(self):
        self.assertEqual(format_source(parse('wait 8395ns')), 'wait 8.395us\n')
        self.assertEqual(format_source(parse('cphase bw=0.15MHz cond=d1d2u3')),
                         'cphase cond=d1d2u3 bw=150kHz\n')

    def test_empty(self):
        self.assertEqual(format_source(Script()), '')

    def test_repo_scripts_round_trip(self):
        paths = sorted(SCRIPTS.glob('*.sq'))
        self.assertTrue(paths)
        for path in paths:
            with self.subTest(script=path.name):
                script = parse_file(path)
                text = format_source(script)
                self.assertEqual(parse(text), script)
                self.assertEqual(format_source(parse(text)), text)

    def test_program_round_trip(self):
        params = table_register(3)
        program = PulseProgram([
            Delay(8.395e-6),
            Repeat(4, [Delay(1e-6), Rotation(None, math.pi, math.pi / 2)]),
            Noisy(0.73, [ConditionalPhase({0: -1, 1: -1, 2: 1})]),
            Rotation(1, math.pi / 2, -math.pi / 2),
            Reset(),
            Measure('m1'),
            Barrier('readout'),
        ])
        self.assertEqual(validate(parse(format_source(program)), params), program)

    def test_pulse_program_lifts_to_statements(self):
        program = lower('mw pi shape=sinc bw=500kHz\nrf pi target=n2 cond=e:up')
        lines = format_source(program).splitlines()
        self.assertTrue(lines[0].startswith('mw '))
        self.assertIn('shape=sinc bw=500kHz', lines[0])
        self.assertIn('target=n2 cond=e:up', lines[1])
        again = lower(format_source(program))
        for ours, theirs in zip(again.elements, program.elements):
            self.assertAlmostEqual(ours.envelope.duration, theirs.envelope.duration)
            self.assertAlmostEqual(ours.envelope.area(), theirs.envelope.area())

    def test_rejects_other_objects(self):
        with self.assertRaises(TypeError):
            format_source([Statement('wait')])


class FuzzTests(SimpleTestCase):
    WORDS = [
        'wait', 'mw', 'rf', 'repeat', 'simul', 'noisy', 'cnnote', 'cenotn', 'cphase', 'cz',
        'bell', 'sedor', 'barrier', 'rot', 'reset_e', 'measure_e', 'pi', 'pi/2', '-2pi', 'pi/0',
        '1us', '8.395us', '150kHz', '1e999s', '-3ms', '12', '0', '0.5', 'target', 'cond', 'bw',
        'phase', 'shape', 'sinc', 'n1', 'n7', 'e', 'e:up', 'd1d2u3', 'x', 'yes', '=', '{', '}',
        '\n', '#', ' ', 'µs', 'é', '\t',
    ]

    def check(self, data):
        try:
            result = parse(data)
        except SeqlangError as exc:
            raw = data if isinstance(data, bytes) else data.encode('utf-8')
            self.assertIsNotNone(exc.span, msg=repr(data))
            self.assertGreaterEqual(exc.span.column, 1)
            self.assertTrue(1 <= exc.span.line <= raw.count(b'\n') + 1, msg=repr(data))
        else:
            self.assertIsInstance(result, Script)

    def test_random_bytes(self):
        rng = random.Random(20240501)
        for _ in range(2000):
            self.check(bytes(rng.randrange(256) for _ in range(rng.randrange(64))))

    def test_token_soup(self):
        rng = random.Random(7)
        for _ in range(3000):
            words = [rng.choice(self.WORDS) for _ in range(rng.randrange(24))]
            self.check(' '.join(words))

    def test_deep_nesting(self):
        self.check('repeat 1 {\n' * 200)


class CircuitEquivalenceTests(SimpleTestCase):
    def test_bell_script_matches_library_circuit(self):
        for params in (table_register(3), ideal_register(3)):
            program = validate(parse_file(SCRIPTS / 'bell.sq'), params)
            self.assertEqual(program, bell_circuit(params))

    def test_bell_statement(self):
        params = table_register(3)
        self.assertEqual(lower('bell', params), bell_circuit(params))
        options = BellOptions(ideal=False, cphase_fidelity=0.73, readout_basis='x')
        self.assertEqual(lower('bell ideal=no fidelity=0.73 basis=x', params),
                         bell_circuit(params, options))

    def test_sedor_script(self):
        params = table_register(4)
        program = validate(parse_file(SCRIPTS / 'sedor.sq'), params)
        self.assertEqual(program, sedor_sequence(1, 0, 5e-3, params, DriveParams()))

    def test_xy_script_spacing(self):
        program = validate(parse_file(SCRIPTS / 'xy_unit_cell.sq'), table_register(4))
        block = program.elements[0]
        self.assertEqual(block.n, 24)
        pulses = [e for e in block.body if isinstance(e, Pulse)]
        self.assertEqual([p.envelope.phase for p in pulses], [0.0, math.pi / 2] * 2)
