"""
Quick-mode runs of the verification suites.
"""

import math
import unittest

import numpy as np

from tiqca.lattice import Boundary, LatticeConfig
from tiqca.verify import (
    CheckResult,
    far_sites,
    list_suites,
    random_circuit,
    random_pulse,
    random_state,
    run_suite,
)


class TestHelpers(unittest.TestCase):

    def test_check_line(self):
        self.assertEqual(CheckResult("x", True, 0.0).line(), "PASS x deviation=0.000e+00")
        self.assertTrue(CheckResult("y", False, detail="why").line().startswith("FAIL y"))
        self.assertTrue(CheckResult("y", False, detail="why").line().endswith(" why"))

    def test_random_state_normalised(self):
        rng = np.random.default_rng(0)
        state = random_state(rng, LatticeConfig(4), support=6)
        self.assertAlmostEqual(state.norm_squared(), 1.0)
        self.assertLessEqual(len(state), 6)

    def test_random_circuit_shape(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            circuit = random_circuit(rng, 3, measure=True)
            self.assertLessEqual(len(circuit.ops), 8)
            self.assertIsNotNone(circuit.measurement)
        self.assertIsNone(random_circuit(rng, 2).measurement)

    def test_far_sites(self):
        self.assertEqual(far_sites(LatticeConfig(8), 0, 3), [4])
        self.assertEqual(far_sites(LatticeConfig(8, Boundary.OPEN), 0, 5), [6, 7])

    def test_random_pulses_are_valid(self):
        rng = np.random.default_rng(1)
        config = LatticeConfig(3)
        for _ in range(50):
            random_pulse(rng).validate(config.mode)

    def test_registry(self):
        self.assertEqual(
            list_suites(),
            ["oracle", "protocols", "pure-mixed", "scaling", "conservation", "locality", "compiler"],
        )
        with self.assertRaises(KeyError):
            run_suite("nonexistent")


class TestSuites(unittest.TestCase):

    def _assert_passed(self, results):
        self.assertTrue(results)
        for result in results:
            self.assertTrue(result.passed, msg=result.line())

    def test_protocols(self):
        self._assert_passed(run_suite("protocols"))

    def test_oracle(self):
        self._assert_passed(run_suite("oracle", quick=True, seed=5))

    def test_pure_mixed(self):
        self._assert_passed(run_suite("pure-mixed", quick=True))

    def test_conservation(self):
        self._assert_passed(run_suite("conservation", quick=True, seed=2))

    def test_locality(self):
        self._assert_passed(run_suite("locality", quick=True, seed=3))

    def test_compiler(self):
        results = run_suite("compiler", quick=True, seed=4)
        self._assert_passed(results)
        self.assertEqual(len(results), 3)

    def test_scaling_closed_form(self):
        results = run_suite("scaling", quick=True)
        self._assert_passed(results[:4])
        self.assertEqual(len(results), 12)
        self.assertTrue(all(math.isfinite(r.deviation) for r in results))


if __name__ == "__main__":
    unittest.main()
