"""
Golden-string tests for the pointer macros and the classical census helpers.
"""

import unittest

from tiqca.errors import InvalidInput, ModeMismatch
from tiqca.lattice import FIVE_LEVEL, SIX_LEVEL, Boundary, LatticeConfig, make_basis_state
from tiqca.macros import (
    MacroName,
    PointerCensus,
    create_pointers,
    get_macro_name,
    list_macros,
    macro_program,
    partition_split,
    pointer_census,
)
from tiqca.pulses import apply_program
from tiqca.verify import single_string


def run(text, *macros, boundary=Boundary.OPEN, mode=SIX_LEVEL):
    state = make_basis_state(LatticeConfig(len(text), boundary, mode), text)
    for macro in macros:
        state = apply_program(state, macro_program(macro, mode))
    return state


class TestRegistry(unittest.TestCase):

    def test_list(self):
        self.assertEqual(len(list_macros()), 6)
        self.assertIn("MEASURE_PREP", list_macros())

    def test_lookup(self):
        self.assertIs(get_macro_name("step-right"), MacroName.STEP_RIGHT)
        self.assertIs(get_macro_name(MacroName.STEP_LEFT), MacroName.STEP_LEFT)
        with self.assertRaises(InvalidInput):
            get_macro_name("JUMP")

    def test_wall_level_must_match_mode(self):
        with self.assertRaises(ModeMismatch):
            macro_program(MacroName.POINTER_CREATE, SIX_LEVEL, wall_level=1)
        program = macro_program(MacroName.POINTER_CREATE, FIVE_LEVEL, wall_level=1)
        self.assertEqual(program.pulses[0].control, 1)

    def test_six_level_macros_never_touch_walls(self):
        for name in MacroName:
            self.assertNotIn(5, macro_program(name).touched_levels(), msg=name.value)


class TestStep(unittest.TestCase):

    def test_step_right_moves_pointer(self):
        self.assertEqual(single_string(run("0023000", MacroName.STEP_RIGHT)), "0002300")

    def test_step_right_passes_qubit_one(self):
        self.assertEqual(single_string(run("0023100", MacroName.STEP_RIGHT)), "0012300")

    def test_left_pointer_moves_left(self):
        self.assertEqual(single_string(run("0032230", MacroName.STEP_RIGHT)), "0320023")

    def test_step_left_undoes_step_right(self):
        state = run("0023100", MacroName.STEP_RIGHT, MacroName.STEP_LEFT)
        self.assertEqual(single_string(state), "0023100")
        self.assertAlmostEqual(state.amplitude("0023100"), 1.0)

    def test_crossing(self):
        self.assertEqual(single_string(run("2332", MacroName.STEP_RIGHT)), "3223")
        state = run("23032", MacroName.STEP_RIGHT)
        self.assertEqual(single_string(state), "04040")
        self.assertEqual(single_string(apply_program(state, macro_program("STEP_RIGHT"))),
                         "32023")

    def test_reflection_at_wall(self):
        self.assertEqual(single_string(run("235", MacroName.STEP_RIGHT)), "325")
        self.assertEqual(single_string(run("532", MacroName.STEP_RIGHT)), "523")


class TestCreation(unittest.TestCase):

    def test_six_level(self):
        state = run("5000005", MacroName.POINTER_CREATE, boundary=Boundary.PERIODIC)
        self.assertEqual(single_string(state), "5230325")

    def test_create_pointers_helper(self):
        state = make_basis_state(LatticeConfig(8), "50000000")
        self.assertEqual(single_string(create_pointers(state)), "52300032")

    def test_five_level(self):
        state = run("00100", MacroName.POINTER_CREATE, boundary=Boundary.PERIODIC,
                    mode=FIVE_LEVEL)
        self.assertEqual(single_string(state), "32123")

    def test_open_boundary_line(self):
        state = run("0000005000000000000050005000000005", MacroName.POINTER_CREATE)
        self.assertEqual(single_string(state), "0000325230000000003250005230000325")


class TestCnot(unittest.TestCase):

    def test_source_zero_flips_target(self):
        state = run("0230", MacroName.CNOT_SRC_LEFT)
        self.assertAlmostEqual(state.amplitude("0231"), 1j)
        state = run("0231", MacroName.CNOT_SRC_LEFT)
        self.assertAlmostEqual(state.amplitude("0230"), 1j)

    def test_source_one_is_phase(self):
        state = run("1230", MacroName.CNOT_SRC_LEFT)
        self.assertAlmostEqual(state.amplitude("1230"), -1)

    def test_source_right(self):
        state = run("0230", MacroName.CNOT_SRC_RIGHT)
        self.assertAlmostEqual(state.amplitude("1230"), 1j)

    def test_inactive_pair_untouched(self):
        for macro in (MacroName.CNOT_SRC_LEFT, MacroName.CNOT_SRC_RIGHT):
            state = run("5040405", macro, boundary=Boundary.PERIODIC)
            self.assertEqual(single_string(state), "5040405")


class TestMeasurePrep(unittest.TestCase):

    def test_marks_one(self):
        self.assertEqual(single_string(run("5231", MacroName.MEASURE_PREP)), "5234")

    def test_leaves_zero(self):
        self.assertEqual(single_string(run("5230", MacroName.MEASURE_PREP)), "5230")


class TestCensus(unittest.TestCase):

    def test_pointer_pair(self):
        census = pointer_census((5, 2, 3, 0, 3, 2, 5), periodic=True)
        self.assertEqual(census, PointerCensus(right=1, left=1, inactive=0, walls=(0, 6)))
        self.assertEqual(census.total, 2)

    def test_inactive_counts_two(self):
        census = pointer_census((0, 4, 0, 4, 0))
        self.assertEqual(census.inactive, 1)
        self.assertEqual(census.total, 2)

    def test_five_level_walls(self):
        census = pointer_census((3, 2, 1, 2, 3), FIVE_LEVEL, periodic=True)
        self.assertEqual(census.walls, (2,))
        self.assertEqual(census.total, 2)


class TestPartitions(unittest.TestCase):

    def test_open(self):
        runs = partition_split((0, 0, 5, 0, 0, 0, 5, 0), boundary=Boundary.OPEN)
        self.assertEqual([length for _, length in runs], [2, 3, 1])

    def test_periodic_joins_wrap(self):
        runs = partition_split((0, 0, 5, 0, 0, 0, 5, 0), boundary="periodic")
        self.assertEqual(runs, [(3, 3), (7, 3)])

    def test_no_walls(self):
        self.assertEqual(partition_split((0, 0, 0)), [(0, 3)])

    def test_adjacent_walls(self):
        self.assertEqual(partition_split((5, 5, 0), boundary=Boundary.OPEN), [(2, 1)])


if __name__ == "__main__":
    unittest.main()
