"""
Unit tests for global pulses and sparse evolution.
"""

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tiqca.errors import InvalidPulse, ModeMismatch
from tiqca.lattice import (
    FIVE_LEVEL,
    SIX_LEVEL,
    Boundary,
    LatticeConfig,
    make_basis_state,
    reduced_density,
    reflect_state,
    shift_state,
)
from tiqca.pulses import (
    HALF_PI,
    KET0,
    KET1,
    KET1_I,
    ControlledExchange,
    GlobalLevelSwap,
    PulseProgram,
    QubitVector,
    apply_program,
    apply_pulse,
    invert,
    lx,
    rot,
    site_activation,
)
from tiqca.verify import (
    density_gap,
    far_sites,
    max_amplitude_gap,
    perturbation_gap,
    random_pulse,
    random_state,
)


class TestPulseTypes(unittest.TestCase):

    def test_qubit_vector_normalised(self):
        with self.assertRaises(InvalidPulse):
            QubitVector(1, 1)
        w = QubitVector(1 / math.sqrt(2), 1j / math.sqrt(2))
        self.assertAlmostEqual(abs(w.c1), 1 / math.sqrt(2))

    def test_exchange_validation(self):
        with self.assertRaises(InvalidPulse):
            lx(3, 3, 4).validate(SIX_LEVEL)
        with self.assertRaises(InvalidPulse):
            lx(0, 2, 5).validate(FIVE_LEVEL)
        with self.assertRaises(InvalidPulse):
            ControlledExchange(0, KET0, KET1).validate(SIX_LEVEL)
        with self.assertRaises(InvalidPulse):
            ControlledExchange(0, 1, 2, float("nan"))

    def test_span(self):
        self.assertEqual(lx(0, 3, 4).span(6), frozenset({3, 4}))
        self.assertEqual(rot(0.3, KET0, KET1_I).span(6), frozenset({0, 1}))
        self.assertEqual(GlobalLevelSwap(2, 2).span(6), frozenset())

    def test_inverse(self):
        self.assertEqual(lx(0, 3, 4).inverse().angle, -HALF_PI)
        self.assertEqual(GlobalLevelSwap(2, 3).inverse(), GlobalLevelSwap(2, 3))


class TestPulseProgram(unittest.TestCase):

    def test_invalid_pulse_index(self):
        with self.assertRaises(InvalidPulse) as ctx:
            PulseProgram((GlobalLevelSwap(2, 3), lx(0, 0, 4)))
        self.assertIn("pulse 1", str(ctx.exception))

    def test_join_and_slice(self):
        a = PulseProgram((lx(0, 3, 4),), name="a")
        b = PulseProgram((GlobalLevelSwap(2, 3),), name="b")
        joined = a + b
        self.assertEqual(len(joined), 2)
        self.assertEqual(joined[1:].pulses, b.pulses)
        self.assertEqual(joined.touched_levels(), frozenset({2, 3, 4}))

    def test_join_mode_mismatch(self):
        with self.assertRaises(ModeMismatch):
            PulseProgram((), SIX_LEVEL) + PulseProgram((), FIVE_LEVEL)

    def test_invert_name(self):
        program = PulseProgram((lx(0, 3, 4), GlobalLevelSwap(2, 3)), name="STEP")
        inverse = invert(program)
        self.assertEqual(inverse.name, "STEP^-1")
        self.assertEqual(invert(inverse).name, "STEP")
        self.assertEqual(inverse.pulses[0], GlobalLevelSwap(2, 3))
        self.assertEqual(inverse.pulses[1].angle, -HALF_PI)


class TestApplyPulse(unittest.TestCase):

    def test_activation_counts(self):
        config = LatticeConfig(5)
        self.assertEqual(site_activation((0, 3, 0, 0, 3), lx(3, 0, 1), config), [2, 0, 1, 1, 0])

    def test_single_activation(self):
        config = LatticeConfig(7, Boundary.OPEN)
        out = apply_pulse(make_basis_state(config, "0023000"), lx(0, 3, 4))
        self.assertAlmostEqual(out.amplitude("0024000"), 1j)
        self.assertEqual(len(out), 1)

    def test_double_activation_is_phase(self):
        config = LatticeConfig(3)
        out = apply_pulse(make_basis_state(config, "030"), lx(0, 3, 4))
        self.assertAlmostEqual(out.amplitude("030"), -1)

    def test_no_control_is_identity(self):
        config = LatticeConfig(4)
        state = make_basis_state(config, "2222")
        self.assertEqual(apply_pulse(state, lx(0, 3, 4)).support, state.support)

    def test_global_swap(self):
        out = apply_pulse(make_basis_state(LatticeConfig(4), "0233"), GlobalLevelSwap(2, 3))
        self.assertAlmostEqual(out.amplitude("0322"), 1.0)

    def test_rotation_superposes(self):
        config = LatticeConfig(4, Boundary.OPEN)
        out = apply_pulse(make_basis_state(config, "2300"), rot(math.pi / 4, KET0, KET1))
        self.assertAlmostEqual(out.probability("2300"), 0.5)
        self.assertAlmostEqual(out.probability("2310"), 0.5)

    def test_mode_mismatch(self):
        state = make_basis_state(LatticeConfig(3), "000")
        with self.assertRaises(ModeMismatch):
            apply_program(state, PulseProgram((), FIVE_LEVEL))

    def test_pulse_checked_against_lattice_mode(self):
        state = make_basis_state(LatticeConfig(3, mode=FIVE_LEVEL), "000")
        with self.assertRaises(InvalidPulse):
            apply_pulse(state, lx(5, 0, 2))


class TestEvolutionProperties(unittest.TestCase):

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 6),
           periodic=st.booleans())
    def test_norm_conserved(self, seed, m, periodic):
        rng = np.random.default_rng(seed)
        config = LatticeConfig(m, Boundary.PERIODIC if periodic else Boundary.OPEN)
        state = random_state(rng, config)
        for _ in range(5):
            state = apply_pulse(state, random_pulse(rng))
            self.assertLess(state.norm_drift(), 1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 5))
    def test_inverse_restores(self, seed, m):
        rng = np.random.default_rng(seed)
        config = LatticeConfig(m)
        state = random_state(rng, config)
        program = PulseProgram(tuple(random_pulse(rng) for _ in range(6)))
        back = apply_program(apply_program(state, program), invert(program))
        self.assertLess(max_amplitude_gap(back, state), 1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_five_level_pulses(self, seed):
        rng = np.random.default_rng(seed)
        config = LatticeConfig(4, mode=FIVE_LEVEL)
        state = random_state(rng, config)
        for _ in range(4):
            state = apply_pulse(state, random_pulse(rng, FIVE_LEVEL))
        self.assertLess(state.norm_drift(), 1e-12)


class TestSymmetry(unittest.TestCase):

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(3, 6), periodic=st.booleans(),
           five=st.booleans())
    def test_reflection_commutes(self, seed, m, periodic, five):
        rng = np.random.default_rng(seed)
        mode = FIVE_LEVEL if five else SIX_LEVEL
        config = LatticeConfig(m, Boundary.PERIODIC if periodic else Boundary.OPEN, mode)
        state = random_state(rng, config)
        pulse = random_pulse(rng, mode)
        mirrored = apply_pulse(reflect_state(state), pulse)
        self.assertLess(max_amplitude_gap(mirrored, reflect_state(apply_pulse(state, pulse))),
                        1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(3, 6), k=st.integers(1, 5))
    def test_translation_commutes(self, seed, m, k):
        rng = np.random.default_rng(seed)
        state = random_state(rng, LatticeConfig(m))
        pulse = random_pulse(rng)
        shifted = apply_pulse(shift_state(state, k), pulse)
        self.assertLess(max_amplitude_gap(shifted, shift_state(apply_pulse(state, pulse), k)),
                        1e-12)

    def test_open_boundary_breaks_translation(self):
        config = LatticeConfig(4, Boundary.OPEN)
        state = make_basis_state(config, "3000")
        pulse = lx(3, 0, 4)
        shifted = apply_pulse(shift_state(state, 3), pulse)
        self.assertGreater(max_amplitude_gap(shifted, shift_state(apply_pulse(state, pulse), 3)),
                           0.5)


class TestLocality(unittest.TestCase):

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), t=st.integers(1, 3), extra=st.integers(0, 2),
           periodic=st.booleans())
    def test_far_marginals_unchanged(self, seed, t, extra, periodic):
        rng = np.random.default_rng(seed)
        config = LatticeConfig(2 * t + 2 + extra, Boundary.PERIODIC if periodic else Boundary.OPEN)
        self.assertLess(perturbation_gap(rng, config, t), 1e-12)

    def test_signal_reaches_next_site(self):
        config = LatticeConfig(6, Boundary.OPEN)
        a = apply_pulse(make_basis_state(config, "300000"), lx(3, 0, 4))
        b = apply_pulse(make_basis_state(config, "000000"), lx(3, 0, 4))
        self.assertGreater(density_gap(reduced_density(a, [1]), reduced_density(b, [1])), 0.5)
        far = far_sites(config, 0, 1)
        self.assertLess(density_gap(reduced_density(a, far), reduced_density(b, far)), 1e-12)


if __name__ == "__main__":
    unittest.main()
