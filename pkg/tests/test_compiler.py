"""
Unit tests for gate synthesis, tape routing and end-to-end compilation.
"""

import math
import unittest
from dataclasses import replace

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from tiqca.compiler import (
    CNOT,
    CompilerOptions,
    Gate1,
    LogicalCircuit,
    Measure,
    TapeLayout,
    compile_circuit,
    euler_angles,
    fidelity,
    gate_pulses,
    logical_readout,
    lower_cnots,
    reference_simulate,
    split_phase,
)
from tiqca.errors import (
    InvalidCircuit,
    NotSpecialUnitary,
    NotUnitary,
    PartitionTooSmall,
    PointerNotHome,
    RoutingError,
    ScaleOverflow,
)
from tiqca.lattice import LatticeConfig, level_populations, make_basis_state
from tiqca.macros import create_pointers
from tiqca.pulses import apply_program
from tiqca.verify import pointer_gaps, random_circuit, routing_trace, run_fresh_partition

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _rebuild(alpha, beta, gamma):
    return expm(1j * alpha * X) @ expm(1j * beta * Y) @ expm(1j * gamma * X)


def _random_su2(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q / np.sqrt(np.linalg.det(q))


def _run_on_partition(circuit, compiled):
    length = compiled.min_partition
    state = make_basis_state(LatticeConfig(length + 1), "5" + "0" * length)
    state = apply_program(create_pointers(state), compiled.program)
    return logical_readout(state, (1, length), circuit.n)


class TestSynthesis(unittest.TestCase):

    def test_identity(self):
        self.assertEqual(euler_angles(np.eye(2)), (0.0, 0.0, 0.0))

    def test_pure_x_rotation(self):
        alpha, beta, gamma = euler_angles(1j * X)
        self.assertAlmostEqual(alpha, math.pi / 2)
        self.assertEqual((beta, gamma), (0.0, 0.0))

    def test_rejects(self):
        with self.assertRaises(NotSpecialUnitary):
            euler_angles(X)
        with self.assertRaises(NotUnitary):
            euler_angles(np.array([[1, 1], [0, 1]], dtype=complex))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_reconstruction(self, seed):
        g = _random_su2(seed)
        alpha, beta, gamma = euler_angles(g)
        for angle in (alpha, gamma):
            self.assertGreater(angle, -math.pi - 1e-12)
            self.assertLessEqual(angle, math.pi + 1e-12)
        self.assertLess(np.max(np.abs(_rebuild(alpha, beta, gamma) - g)), 1e-9)

    def test_reconstruction_beta_half_pi(self):
        g = expm(1j * (math.pi / 2) * Y) @ expm(1j * 0.3 * X)
        self.assertLess(np.max(np.abs(_rebuild(*euler_angles(g)) - g)), 1e-9)

    def test_split_phase(self):
        phi, su = split_phase(X)
        self.assertAlmostEqual(abs(phi), math.pi / 2)
        self.assertAlmostEqual(np.linalg.det(su), 1.0)
        np.testing.assert_allclose(np.exp(1j * phi) * su, X, atol=1e-12)

    def test_gate_pulse_count(self):
        self.assertEqual(len(gate_pulses(H)), 3)
        self.assertEqual(len(gate_pulses(X, global_phase=True)), 5)


class TestCircuit(unittest.TestCase):

    def test_bad_index(self):
        with self.assertRaises(InvalidCircuit):
            LogicalCircuit(2, (Gate1(3, X),))
        with self.assertRaises(InvalidCircuit):
            LogicalCircuit(2, (CNOT(1, 1),))
        with self.assertRaises(InvalidCircuit):
            LogicalCircuit(0)

    def test_measure_last(self):
        with self.assertRaises(InvalidCircuit):
            LogicalCircuit(1, (Measure(1), Gate1(1, X)))
        self.assertEqual(LogicalCircuit(1, (Measure(1),)).measurement, Measure(1))

    def test_non_unitary_gate(self):
        with self.assertRaises(NotUnitary):
            Gate1(1, np.array([[1, 0], [0, 2]]))

    def test_min_partition(self):
        self.assertEqual(LogicalCircuit(3).min_partition, 10)

    def test_lowering(self):
        circuit = LogicalCircuit(3, (Gate1(1, X), CNOT(1, 3)))
        lowered = lower_cnots(circuit)
        self.assertTrue(all(op.adjacent for op in lowered.ops if isinstance(op, CNOT)))
        self.assertEqual(len(lowered.ops), 8)
        a, _ = reference_simulate(circuit)
        b, _ = reference_simulate(lowered)
        self.assertAlmostEqual(fidelity(a, b), 1.0)
        self.assertAlmostEqual(abs(a[0b101]), 1.0)


class TestReference(unittest.TestCase):

    def test_hadamard(self):
        vec, p_one = reference_simulate(LogicalCircuit(1, (Gate1(1, H), Measure(1))))
        np.testing.assert_allclose(vec, [1 / math.sqrt(2)] * 2)
        self.assertAlmostEqual(p_one, 0.5)

    def test_unmeasured(self):
        _, p_one = reference_simulate(LogicalCircuit(2))
        self.assertIsNone(p_one)

    def test_cnot(self):
        circuit = LogicalCircuit(2, (Gate1(1, X), CNOT(1, 2), Measure(2)))
        vec, p_one = reference_simulate(circuit)
        self.assertAlmostEqual(abs(vec[3]), 1.0)
        self.assertAlmostEqual(p_one, 1.0)

    def test_scale_guard(self):
        with self.assertRaises(ScaleOverflow):
            reference_simulate(LogicalCircuit(13))


class TestRouting(unittest.TestCase):

    def test_tape_bounds(self):
        with self.assertRaises(RoutingError):
            TapeLayout(2).step_left()
        self.assertEqual(TapeLayout(2).step_right().addressed, 2)

    def test_single_gate_home(self):
        compiled = compile_circuit(LogicalCircuit(1, (Gate1(1, H),)))
        self.assertEqual([s.label for s in compiled.segments], ["GATE q1"])
        self.assertEqual(compiled.final_gap, 0)
        self.assertEqual(compiled.min_partition, 6)
        self.assertEqual(compiled.program.name, "compiled")

    def test_gate_on_second_qubit(self):
        compiled = compile_circuit(LogicalCircuit(2, (Gate1(2, X),)))
        self.assertEqual([s.label for s in compiled.segments],
                         ["STEP_RIGHT", "GATE q2", "STEP_LEFT"])
        self.assertEqual(compiled.gap_trajectory, (0, 1, 1, 0))

    def test_cnot_source_left(self):
        compiled = compile_circuit(LogicalCircuit(2, (CNOT(1, 2),)))
        self.assertEqual([s.label for s in compiled.segments],
                         ["PRE q1", "STEP_RIGHT", "CNOT_SRC_LEFT", "STEP_LEFT", "POST q1"])

    def test_cnot_source_right(self):
        compiled = compile_circuit(LogicalCircuit(2, (CNOT(2, 1),)))
        self.assertEqual([s.label for s in compiled.segments],
                         ["STEP_RIGHT", "PRE q2", "CNOT_SRC_RIGHT", "POST q2", "STEP_LEFT"])

    def test_measure_stays(self):
        compiled = compile_circuit(LogicalCircuit(2, (Measure(2),)))
        self.assertEqual(compiled.final_gap, 1)
        self.assertEqual(compiled.measured_qubit, 2)
        self.assertEqual(compiled.segments[-1].label, "MEASURE_PREP")

    def test_global_phase_option(self):
        circuit = LogicalCircuit(1, (Gate1(1, X),))
        plain = compile_circuit(circuit)
        phased = compile_circuit(circuit, options=CompilerOptions(global_phase=True))
        self.assertEqual(len(phased.program) - len(plain.program), 2)


class TestEndToEnd(unittest.TestCase):

    def _check(self, circuit):
        compiled = compile_circuit(circuit)
        expected, _ = reference_simulate(circuit)
        left, right = _run_on_partition(circuit, compiled)
        self.assertAlmostEqual(fidelity(left, expected), 1.0, places=9)
        self.assertAlmostEqual(fidelity(right, expected), 1.0, places=9)

    def test_hadamard(self):
        self._check(LogicalCircuit(1, (Gate1(1, H),)))

    def test_random_gate(self):
        self._check(LogicalCircuit(1, (Gate1(1, _random_su2(7)),)))

    def test_gate_on_second_qubit(self):
        self._check(LogicalCircuit(2, (Gate1(2, X), Gate1(1, H))))

    def test_cnot(self):
        self._check(LogicalCircuit(2, (Gate1(1, X), CNOT(1, 2))))

    def test_bell_pair(self):
        self._check(LogicalCircuit(2, (Gate1(1, H), CNOT(1, 2))))

    def test_reverse_cnot(self):
        self._check(LogicalCircuit(2, (Gate1(2, H), CNOT(2, 1))))


class TestRandomCircuits(unittest.TestCase):

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([2, 3]))
    def test_unmeasured_matches_reference(self, seed, n):
        circuit = random_circuit(np.random.default_rng(seed), n)
        expected, _ = reference_simulate(circuit)
        state = run_fresh_partition(compile_circuit(circuit), 2 * n + 6)
        left, right = logical_readout(state, (1, 2 * n + 6), n)
        self.assertGreater(fidelity(left, expected), 1 - 1e-9)
        self.assertGreater(fidelity(right, expected), 1 - 1e-9)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([2, 3]))
    def test_measured_signal(self, seed, n):
        circuit = random_circuit(np.random.default_rng(seed), n, measure=True)
        _, p_one = reference_simulate(circuit)
        state = run_fresh_partition(compile_circuit(circuit), 2 * n + 6)
        self.assertAlmostEqual(float(level_populations(state)[4]), 2 * p_one, delta=1e-9)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([2, 3]), measure=st.booleans())
    def test_pointer_follows_trajectory(self, seed, n, measure):
        circuit = random_circuit(np.random.default_rng(seed), n, measure=measure)
        self.assertIsNone(routing_trace(compile_circuit(circuit), 2 * n + 6))


class TestRoutingTrace(unittest.TestCase):

    def test_home_gaps(self):
        state = run_fresh_partition(compile_circuit(LogicalCircuit(2)), 10)
        self.assertEqual(pointer_gaps(state, 10), {(0, 0)})

    def test_measurement_leaves_pointer_out(self):
        compiled = compile_circuit(LogicalCircuit(3, (Gate1(3, X), Measure(3))))
        state = run_fresh_partition(compiled, 12)
        self.assertEqual(pointer_gaps(state, 12), {(2, 2)})
        self.assertEqual(compiled.gap_trajectory[-1], 2)
        self.assertIsNone(routing_trace(compiled, 12))

    def test_wrong_trajectory_detected(self):
        compiled = compile_circuit(LogicalCircuit(2, (Gate1(2, X),)))
        shifted = replace(compiled, segments=tuple(
            replace(seg, gap=seg.gap + 1) for seg in compiled.segments
        ))
        self.assertEqual(routing_trace(shifted, 10), 1)


class TestReadout(unittest.TestCase):

    def test_partition_too_small(self):
        state = make_basis_state(LatticeConfig(6), "523032")
        with self.assertRaises(PartitionTooSmall):
            logical_readout(state, (1, 5), 1)

    def test_pointer_not_home(self):
        state = make_basis_state(LatticeConfig(7), "5000000")
        with self.assertRaises(PointerNotHome):
            logical_readout(state, (1, 6), 1)

    def test_home_state(self):
        state = create_pointers(make_basis_state(LatticeConfig(7), "5000000"))
        left, right = logical_readout(state, (1, 6), 1)
        np.testing.assert_allclose(left, [1, 0], atol=1e-12)
        np.testing.assert_allclose(right, [1, 0], atol=1e-12)


if __name__ == "__main__":
    unittest.main()
