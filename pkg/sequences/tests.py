import io
import math

import numpy as np
from django.test import SimpleTestCase
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from linalg.operators import partial_trace, purity
from measurement.readout import electron_contrast, electron_populations
from pulses.shapes import RECT, Envelope, make_rect
from spinmodel.hamiltonians import initial_density_matrix
from spinmodel.params import TWO_PI, DriveParams, Frame, NuclearSpin, RegisterParams
from spinmodel.presets import ideal_register, table_drive, table_register
from spinreg.exceptions import ConfigError, DimensionError, FrameError, SequenceError

from .decoherence import apply_decoherence_envelope, coherence_time, decoherence_time
from .engine import conditional_phase_diagonal, program_unitary, propagate, spin_expectations
from .experiments import experiment_plan, run_plan, simulate_bell
from .library import (
    BellOptions, ce_not_n, cn_not_e, conditional_rotation, cphase_gate, geometric_phase,
    nuclear_init_sequence, xy_dd_block,
)
from .program import (
    MW, READOUT, RF, Barrier, ConditionalPhase, Delay, Noisy, Pulse, PulseProgram,
    Repeat, Reset, Rotation,
)
from .serializers import PulseProgramSerializer

KHZ = TWO_PI * 1e3


def bare_electron(**changes):
    params = RegisterParams(omega_L_e=TWO_PI * 9.414e9, omega_L_n=TWO_PI * 3.58e6, f_e=1.0)
    return params.evolve(**changes)


def small_register(a_par=(200.0,), a_perp=(0.0,), couplings=None, f_e=1.0):
    spins = [NuclearSpin(a_par=p * KHZ, a_perp=q * KHZ, label=f'n{i + 1}')
             for i, (p, q) in enumerate(zip(a_par, a_perp))]
    return RegisterParams(
        omega_L_e=TWO_PI * 9.414e9, omega_L_n=TWO_PI * 3.58e6, spins=spins,
        nn_couplings=couplings or {}, f_e=f_e, tau_c0=math.inf,
    )


MW_PI = make_rect(TWO_PI / 228e-9, math.pi)
MW_HALF = make_rect(TWO_PI / 228e-9, math.pi / 2)


class ProgramTests(SimpleTestCase):
    def test_repeat_needs_positive_count(self):
        with self.assertRaises(SequenceError):
            Repeat(0, [Delay(1e-6)])

    def test_nesting_limit(self):
        element = Delay(1e-9)
        for _ in range(17):
            element = Repeat(1, [element])
        with self.assertRaises(SequenceError):
            PulseProgram([element])

    def test_rf_pulse_needs_target(self):
        with self.assertRaises(SequenceError):
            Pulse(RF, MW_PI, condition='down')

    def test_duration_counts_repeats(self):
        program = PulseProgram([Repeat(3, [Delay(2e-6), Pulse(MW, MW_PI)])])
        self.assertAlmostEqual(program.duration(), 3 * (2e-6 + MW_PI.duration), delta=1e-18)

    def test_noisy_fidelity_range(self):
        with self.assertRaises(SequenceError):
            Noisy(1.5, [Reset()])


class PropagateTests(SimpleTestCase):
    def test_empty_program_leaves_state(self):
        params = small_register()
        rho0 = initial_density_matrix(params, ['up'])
        result = propagate(PulseProgram(), params, Frame.exact(params), rho0, decoherence=False)
        np.testing.assert_allclose(result.final_state, rho0, atol=1e-15)
        self.assertEqual(result.wall_time_simulated, 0.0)

    def test_resonant_pi_pulse_flips_electron(self):
        params = bare_electron()
        rho0 = initial_density_matrix(params)
        result = propagate(PulseProgram([Pulse(MW, MW_PI)]), params, Frame.exact(params), rho0,
                           decoherence=False)
        self.assertAlmostEqual(electron_contrast(rho0), -1.0, delta=1e-12)
        self.assertAlmostEqual(electron_contrast(result.final_state), 1.0, delta=1e-9)
        self.assertEqual(result.pulse_count, 1)

    def test_hahn_echo_refocuses_static_coupling(self):
        params = small_register(a_par=(200.0,), a_perp=(0.0,))
        program = PulseProgram(
            [Pulse(MW, MW_HALF.shifted(phase=math.pi / 2))]
            + list(xy_dd_block(10e-6, 1, MW_PI))
            + [Pulse(MW, MW_HALF.shifted(phase=math.pi / 2))]
        )
        rho0 = initial_density_matrix(params, ['mixed'])
        result = propagate(program, params, Frame.exact(params), rho0, decoherence=False)
        self.assertGreaterEqual(electron_contrast(result.final_state), 0.99)

    def test_ramsey_fringe_follows_detuning(self):
        params = bare_electron()
        detuning = TWO_PI * 1e6
        taus = np.linspace(0.0, 2e-6, 9)
        plan = experiment_plan('ramsey', taus, params, detuning=detuning, rabi=TWO_PI * 500e6)
        values = run_plan(plan, params, decoherence=False)
        np.testing.assert_allclose(values, np.cos(detuning * taus), atol=1e-2)

    def test_repeat_matches_unrolled(self):
        params = small_register(a_par=(300.0, 90.0), a_perp=(60.0, 20.0))
        body = [Delay(1.3e-6), Pulse(MW, MW_PI.shifted(phase=0.3)), Delay(0.7e-6)]
        rho0 = initial_density_matrix(params, ['up', 'mixed'])
        frame = Frame.exact(params)
        compact = propagate(PulseProgram([Repeat(7, body)]), params, frame, rho0, decoherence=False)
        unrolled = propagate(PulseProgram(body * 7), params, frame, rho0, decoherence=False)
        np.testing.assert_allclose(compact.final_state, unrolled.final_state, atol=1e-10)
        self.assertEqual(compact.pulse_count, 7)

    def test_random_programs_stay_pure(self):
        params = small_register(a_par=(300.0, 90.0), a_perp=(60.0, 20.0))
        rho0 = initial_density_matrix(params, ['up', 'down'])
        rng = np.random.default_rng(7)
        frame = Frame.exact(params)
        for _ in range(20):
            elements = []
            for _ in range(6):
                choice = rng.integers(4)
                if choice == 0:
                    elements.append(Delay(float(rng.uniform(0, 5e-6))))
                elif choice == 1:
                    env = make_rect(TWO_PI * 2e6, float(rng.uniform(0.1, 2 * math.pi)),
                                    carrier_detuning=float(rng.uniform(-1, 1) * TWO_PI * 2e5),
                                    phase=float(rng.uniform(0, TWO_PI)))
                    elements.append(Pulse(MW, env))
                elif choice == 2:
                    elements.append(Rotation(int(rng.integers(2)), float(rng.uniform(0, math.pi)),
                                             float(rng.uniform(0, TWO_PI))))
                else:
                    elements.append(ConditionalPhase({0: 1, 1: -1}))
            result = propagate(PulseProgram(elements), params, frame, rho0, decoherence=False)
            self.assertAlmostEqual(purity(result.final_state), 1.0, delta=1e-8)
            self.assertAlmostEqual(np.trace(result.final_state).real, 1.0, delta=1e-10)

    def test_rf_target_outside_register(self):
        params = small_register()
        program = PulseProgram([Pulse(RF, make_rect(KHZ, math.pi), target=3, condition='down')])
        with self.assertRaises(SequenceError):
            propagate(program, params, Frame.exact(params), initial_density_matrix(params))

    def test_dimension_mismatch(self):
        params = small_register()
        with self.assertRaises(DimensionError):
            propagate(PulseProgram(), params, Frame.exact(params), np.eye(2) / 2)

    def test_rotating_nuclear_frame_needs_secular(self):
        params = small_register()
        frame = Frame(params.omega_L_e, (params.omega_L_n,), secular=False)
        with self.assertRaises(FrameError):
            propagate(PulseProgram(), params, frame, initial_density_matrix(params))

    def test_reset_replaces_electron_only(self):
        params = small_register(f_e=0.9)
        rho0 = initial_density_matrix(params, ['up'])
        program = PulseProgram([Rotation(None, math.pi), Reset()])
        rho = propagate(program, params, Frame.exact(params), rho0, decoherence=False).final_state
        self.assertAlmostEqual(electron_contrast(rho), -0.8, delta=1e-12)
        nuclear = partial_trace(rho, [1], [2, 2])
        self.assertAlmostEqual(nuclear[0, 0].real, 1.0, delta=1e-12)

    def test_noisy_block_mixes_branches(self):
        params = bare_electron()
        rho0 = initial_density_matrix(params)
        program = PulseProgram([Noisy(0.25, [Rotation(None, math.pi)])])
        rho = propagate(program, params, Frame.exact(params), rho0, decoherence=False).final_state
        self.assertAlmostEqual(electron_contrast(rho), 0.25 - 0.75, delta=1e-12)

    def test_records_follow_measure_markers(self):
        params = bare_electron()
        program = PulseProgram([Pulse(MW, MW_PI), Barrier('mid')])
        result = propagate(program, params, Frame.exact(params), initial_density_matrix(params),
                           decoherence=False, record=True)
        self.assertEqual(len(result.records), 2)
        self.assertAlmostEqual(result.records[0]['sz_e'], 1.0, delta=1e-9)


class DecoherenceTests(SimpleTestCase):
    def setUp(self):
        self.params = bare_electron(tau_c0=10e-6, beta=1.0, chi=1.0)
        self.coherent = np.full((2, 2), 0.5, dtype=complex)

    def test_zero_elapsed_is_identity(self):
        np.testing.assert_allclose(apply_decoherence_envelope(self.coherent, 0.0, 5, self.params),
                                   self.coherent)

    def test_one_decay_time(self):
        rho = apply_decoherence_envelope(self.coherent, 10e-6, 1, self.params)
        self.assertAlmostEqual(abs(rho[0, 1]), 0.5 * math.exp(-1), delta=1e-12)
        self.assertAlmostEqual(rho[0, 0].real, 0.5, delta=1e-15)

    def test_pulse_number_scaling(self):
        params = self.params.evolve(chi=0.513)
        ratio = decoherence_time(params, 32) / decoherence_time(params, 1)
        self.assertAlmostEqual(ratio, 32 ** -0.487, delta=1e-12)
        self.assertAlmostEqual(ratio, 0.185, delta=1e-3)
        self.assertEqual(decoherence_time(params, 0), decoherence_time(params, 1))

    def test_coherence_time_grows_with_pulse_number(self):
        params = self.params.evolve(tau_c0=212.6e-6, chi=0.513)
        self.assertAlmostEqual(coherence_time(params, 32) / coherence_time(params, 1), 32 ** 0.513, delta=1e-9)
        self.assertAlmostEqual(coherence_time(params, 32), 32 * decoherence_time(params, 32), delta=1e-15)
        self.assertEqual(coherence_time(params, 0), params.tau_c0)

    def test_applied_once_at_readout_barrier(self):
        program = [Rotation(None, math.pi / 2, math.pi / 2), Delay(10e-6), Barrier(READOUT), Delay(50e-6)]
        rho0 = initial_density_matrix(self.params)
        rho = propagate(PulseProgram(program), self.params, Frame.exact(self.params), rho0).final_state
        self.assertAlmostEqual(abs(rho[0, 1]), 0.5 * math.exp(-1), delta=1e-9)
        rho = propagate(PulseProgram(program[:2] + program[3:]), self.params,
                        Frame.exact(self.params), rho0).final_state
        self.assertAlmostEqual(abs(rho[0, 1]), 0.5 * math.exp(-6), delta=1e-9)


class DecouplingTests(SimpleTestCase):
    def test_xy_block_alternates(self):
        program = xy_dd_block(8.395e-6, 48, MW_PI)
        self.assertIsInstance(program.elements[0], Repeat)
        self.assertEqual(program.elements[0].n, 24)
        pulses = [e for e in program.flatten() if isinstance(e, Pulse)]
        self.assertEqual(len(pulses), 48)
        self.assertEqual([p.envelope.phase for p in pulses[:4]], [0.0, math.pi / 2, 0.0, math.pi / 2])

    def test_single_pulse_block(self):
        program = xy_dd_block(4e-6, 1, MW_PI)
        self.assertEqual([type(e) for e in program], [Delay, Pulse, Delay])
        self.assertEqual(program.elements[0].tau, 2e-6)

    def test_xy8_and_cpmg_phases(self):
        xy8 = [e.envelope.phase for e in xy_dd_block(5e-6, 8, MW_PI, 'xy8').flatten() if isinstance(e, Pulse)]
        self.assertEqual(xy8, [0.0, math.pi / 2, 0.0, math.pi / 2, math.pi / 2, 0.0, math.pi / 2, 0.0])
        cpmg = [e.envelope.phase for e in xy_dd_block(5e-6, 5, MW_PI, 'cpmg').flatten() if isinstance(e, Pulse)]
        self.assertEqual(cpmg, [0.0] * 5)

    def test_spacing_shorter_than_pulse(self):
        with self.assertRaises(SequenceError):
            xy_dd_block(100e-9, 4, MW_PI)

    def test_unknown_family(self):
        with self.assertRaises(SequenceError):
            xy_dd_block(5e-6, 4, MW_PI, 'udd')

    def test_parallel_coupling_leaves_nuclei_alone(self):
        params = small_register(a_par=(1194.0, 420.0), a_perp=(0.0, 0.0))
        rho0 = initial_density_matrix(params, ['up', 'down'])
        result = propagate(xy_dd_block(8.395e-6, 24, MW_PI), params, Frame.exact(params), rho0,
                           decoherence=False)
        np.testing.assert_allclose(partial_trace(result.final_state, [1, 2], [2, 2, 2]),
                                   partial_trace(rho0, [1, 2], [2, 2, 2]), atol=1e-9)

    def test_init_sequence_keeps_mixed_nuclei_without_transverse_coupling(self):
        params = small_register(a_par=(1194.0,), a_perp=(0.0,))
        program = nuclear_init_sequence(2e-6, 4, MW_PI, MW_HALF, free_precession=1e-6)
        result = propagate(program, params, Frame.exact(params), initial_density_matrix(params),
                           decoherence=False)
        np.testing.assert_allclose(partial_trace(result.final_state, [1], [2, 2]), np.eye(2) / 2, atol=1e-9)

    def test_xy_dips_at_the_n1_resonance(self):
        params = table_register(4)
        for n, centre in ((48, 8.395e-6), (92, 8.397e-6)):
            taus = centre + np.arange(-6, 7) * 1e-9
            values = run_plan(experiment_plan('xy', taus, params, table_drive(4), n=n), params)
            self.assertLessEqual(abs(taus[int(np.argmin(values))] - centre), 2e-9, msg=f'N={n}')
            self.assertLess(min(values), max(values) - 0.1, msg=f'N={n}')

    def test_conditional_rotation_angle(self):
        params = table_register(4, f_e=1.0)
        rho0 = initial_density_matrix(params, ['up', 'mixed', 'mixed', 'mixed'])
        result = propagate(conditional_rotation(8.395e-6, 24, MW_PI), params, Frame.exact(params), rho0,
                           decoherence=False)
        theta = math.acos(spin_expectations(result.final_state, 4)['sz_n1'])
        self.assertAlmostEqual(theta, math.pi / 2, delta=0.15)

    def test_fast_frame_has_no_conditional_rotation(self):
        params = table_register(1, f_e=1.0)
        rho0 = initial_density_matrix(params, ['up'])
        result = propagate(conditional_rotation(8.395e-6, 24, MW_PI), params, Frame.fast(params), rho0,
                           decoherence=False)
        self.assertAlmostEqual(spin_expectations(result.final_state, 1)['sz_n1'], 1.0, delta=1e-9)

    def test_init_free_precession_is_a_quarter_larmor_turn(self):
        params = table_register(1)
        program = nuclear_init_sequence(8.3915e-6, 24, MW_PI, MW_HALF, params)
        (wait,) = [e for e in program if isinstance(e, Delay)]
        self.assertAlmostEqual((wait.tau + MW_HALF.duration) * params.omega_L_n, math.pi / 2, delta=1e-9)
        self.assertIsInstance(program.elements[-1], Reset)
        self.assertEqual(sum(isinstance(e, Reset) for e in program), 1)
        with self.assertRaises(ConfigError):
            nuclear_init_sequence(8.3915e-6, 24, MW_PI, MW_HALF)

    def test_init_sequence_polarizes_n1(self):
        params = table_register(1, f_e=1.0)
        taus = 8.3885e-6 + np.arange(21) * 0.5e-9
        plan = experiment_plan('nuclear_init', taus, params, table_drive(1))
        values = np.abs(run_plan(plan, params, decoherence=False))
        self.assertGreaterEqual(values.max(), 0.5)
        self.assertLess(abs(taus[int(np.argmax(values))] - 8.3915e-6), 5e-9)
        detuned = run_plan(experiment_plan('nuclear_init', [8.30e-6], params, table_drive(1)), params,
                           decoherence=False)
        self.assertLess(abs(detuned[0]), 0.05)


class GateTests(SimpleTestCase):
    def test_geometric_phase_values(self):
        self.assertEqual(geometric_phase(0.0, 1.0), math.pi)
        self.assertAlmostEqual(geometric_phase(1.0, 1.0), math.pi * (1 - 1 / math.sqrt(2)), delta=1e-12)
        self.assertAlmostEqual(geometric_phase(1.0, 1.0), 0.92015, delta=1e-5)
        self.assertLess(geometric_phase(1e9, 1.0), 1e-8)

    def test_geometric_phase_matches_propagator(self):
        params = bare_electron()
        frame = Frame.exact(params)
        omega = TWO_PI * 1e6
        for ratio in (0.0, 0.5, 1.0, 2.0):
            detuning = ratio * omega
            duration = TWO_PI / math.hypot(detuning, omega)
            envelope = Envelope(RECT, duration, omega, carrier_detuning=-detuning)
            u = program_unitary(PulseProgram([Pulse(MW, envelope)]), params, frame)
            expected = np.exp(1j * geometric_phase(detuning, omega))
            self.assertLess(abs(u[1, 1] - expected), 1e-6, msg=f'detuning ratio {ratio}')

    def test_cn_not_e_carrier_count(self):
        params = table_register()
        self.assertEqual(len(cn_not_e(0, 'up', 1200e3, params)), 1)
        self.assertEqual(len(cn_not_e(0, 'down', 150e3, params)), 4)
        (pulse,) = cn_not_e(0, 'up', 1200e3, params)
        self.assertAlmostEqual(pulse.carrier - params.omega_L_e, params.spins[0].a_par / 2, delta=1e-3)

    def test_cn_not_e_errors(self):
        params = table_register()
        with self.assertRaises(SequenceError):
            cn_not_e(0, 'up', 3e6, params)
        with self.assertRaises(SequenceError):
            cn_not_e(3, 'up', 150e3, params)

    def test_ce_not_n_duration(self):
        params = table_register()
        (pulse,) = ce_not_n(2, 'down', TWO_PI * 5.068e3, params)
        self.assertAlmostEqual(pulse.duration(), 98.6e-6, delta=0.1e-6)

    def test_ce_not_n_flips_only_in_control_state(self):
        params = small_register(a_par=(200.0,), a_perp=(0.0,))
        frame = Frame.fast(params)
        rho0 = initial_density_matrix(params, ['up'])
        flipped = propagate(ce_not_n(0, 'down', TWO_PI * 5e3, params), params, frame, rho0,
                            decoherence=False).final_state
        kept = propagate(ce_not_n(0, 'up', TWO_PI * 5e3, params), params, frame, rho0,
                         decoherence=False).final_state
        twice = propagate(ce_not_n(0, 'down', TWO_PI * 5e3, params) + ce_not_n(0, 'down', TWO_PI * 5e3, params),
                          params, frame, rho0, decoherence=False).final_state
        self.assertAlmostEqual(partial_trace(flipped, [1], [2, 2])[1, 1].real, 1.0, delta=1e-9)
        self.assertGreater(partial_trace(kept, [1], [2, 2])[0, 0].real, 0.99)
        np.testing.assert_allclose(np.diag(twice).real, np.diag(rho0).real, atol=1e-3)

    def test_cphase_condition_must_match_band(self):
        params = table_register()
        self.assertEqual(len(cphase_gate('d1d2u3', 150e3, params)), 1)
        with self.assertRaises(SequenceError):
            cphase_gate('d1d2u4', 150e3, params)
        with self.assertRaises(SequenceError):
            cphase_gate('d1d2', 150e3, params)

    def test_cn_not_e_transfers_only_in_control_state(self):
        params = table_register(4, f_e=1.0)
        program = cn_not_e(1, 'up', 500e3, params)
        flipped = {}
        for state in ('up', 'down'):
            rho0 = initial_density_matrix(params, ['mixed', state, 'mixed', 'mixed'])
            final = propagate(program, params, Frame.exact(params), rho0, decoherence=False).final_state
            flipped[state], _ = electron_populations(final)
        self.assertGreaterEqual(flipped['up'], 0.9)
        self.assertLessEqual(flipped['down'], 0.1)

    def test_cphase_inverts_the_conditioned_branch(self):
        params = table_register(3, f_e=1.0)
        frame = Frame.fast(params)
        program = cphase_gate('d1d2u3', 150e3, params)
        gate = program_unitary(program, params, frame)
        idle = program_unitary(PulseProgram([Delay(program.duration())]), params, frame)
        relative = np.diag(idle.conj().T @ gate)
        branch = conditional_phase_diagonal(((0, -1), (1, -1), (2, 1)), 4).real < 0
        self.assertEqual(int(branch.sum()), 2)
        for amplitude in relative[branch]:
            self.assertGreaterEqual(abs(amplitude) ** 2, 0.9)
            self.assertAlmostEqual(abs(np.angle(amplitude)), math.pi, delta=0.15)

    def test_ideal_cphase_is_diagonal(self):
        params = ideal_register(2)
        u = program_unitary(cphase_gate('d1d2', 150e3, params, ideal=True), params, Frame.fast(params))
        expected = np.ones(8)
        expected[[3, 7]] = -1
        np.testing.assert_allclose(u, np.diag(expected), atol=1e-15)


class BellTests(SimpleTestCase):
    def test_ideal_circuit_prepares_bell_state(self):
        report = simulate_bell(ideal_register(3))
        self.assertGreaterEqual(report.state_fidelity, 1 - 1e-6)
        self.assertGreaterEqual(report.fidelity, 1 - 1e-6)
        self.assertLessEqual(report.correlators.zz, -0.9)

    def test_degraded_gate_and_readout(self):
        report = simulate_bell(ideal_register(3), BellOptions(cphase_fidelity=0.73), readout_fidelity=0.96)
        expected = (1 + 3 * 0.73 * (2 * 0.96 - 1) ** 2) / 4
        self.assertAlmostEqual(report.fidelity, expected, delta=1e-9)
        self.assertTrue(0.65 <= report.fidelity <= 0.75)

    def test_needs_two_spins(self):
        from .library import bell_circuit
        with self.assertRaises(DimensionError):
            bell_circuit(ideal_register(1))


class SedorTests(SimpleTestCase):
    def setUp(self):
        self.drive = DriveParams(rf_rabi=(TWO_PI * 5e3, TWO_PI * 5e3))

    def register(self, coupling_hz):
        couplings = {(0, 1): TWO_PI * coupling_hz} if coupling_hz else None
        return small_register(a_par=(400.0, 150.0), a_perp=(50.0, 30.0), couplings=couplings)

    def test_uncoupled_sensor_rephases(self):
        params = self.register(0.0)
        plan = experiment_plan('sedor', [2e-3], params, self.drive, sensor=0, target=1)
        (value,) = run_plan(plan, params, Frame.fast(params), decoherence=False)
        self.assertGreaterEqual(value, 1 - 1e-3)

    def test_coupling_sets_oscillation(self):
        coupling = 28.56
        params = self.register(coupling)
        taus = [2e-3, 5e-3, 8.75e-3, 12e-3]
        plan = experiment_plan('sedor', taus, params, self.drive, sensor=0, target=1)
        values = run_plan(plan, params, Frame.fast(params), decoherence=False)
        np.testing.assert_allclose(values, np.cos(TWO_PI * coupling * np.array(taus)), atol=0.03)


class SerializerTests(SimpleTestCase):
    def test_dump_and_load(self):
        program = PulseProgram([
            Delay(1e-6),
            Repeat(3, [Pulse(MW, MW_PI.shifted(phase=math.pi / 2)), Delay(2e-6)]),
            Pulse(RF, make_rect(KHZ, math.pi), target=0, condition='down'),
            ConditionalPhase({0: -1}),
            Barrier(READOUT),
        ])
        data = PulseProgramSerializer(program).data
        self.assertEqual([e['type'] for e in data['elements']],
                         ['delay', 'repeat', 'pulse', 'conditional_phase', 'barrier'])
        payload = JSONParser().parse(io.BytesIO(JSONRenderer().render(data)))
        loaded = PulseProgramSerializer().to_internal_value(payload)
        self.assertEqual(loaded, program)
