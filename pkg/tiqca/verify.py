"""
Verification suites behind ``tiqca verify``.

Each suite returns a list of :class:`CheckResult`; a suite passes when
every check does.  ``quick=True`` shrinks sizes for the unit tests.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Set, Tuple

import numpy as np

from .compiler import (
    CNOT,
    CompiledProgram,
    Gate1,
    LogicalCircuit,
    Measure,
    compile_circuit,
    fidelity,
    logical_readout,
    reference_simulate,
)
from .ensemble import (
    EnsembleParams,
    expected_partitions,
    expected_working,
    pure_mixed_equivalence,
    protocol_program,
    run_ensemble,
    scaling_table,
)
from .lattice import (
    FIVE_LEVEL,
    SIX_LEVEL,
    Boundary,
    LatticeConfig,
    SchemeMode,
    SparseState,
    format_basis,
    from_dense,
    level_count_matrix_element,
    level_populations,
    make_basis_state,
    parse_basis,
    reduced_density,
    reflect_state,
    shift_state,
    to_dense,
)
from .macros import MacroName, create_pointers, macro_program, pointer_census
from .oracle import apply_pulse_dense
from .pulses import (
    HALF_PI,
    KET0,
    KET1,
    ControlledExchange,
    GlobalLevelSwap,
    Pulse,
    PulseProgram,
    QubitVector,
    apply_program,
    apply_pulse,
    invert,
    rot,
)

logger = logging.getLogger(__name__)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)

# (input, boundary, macro sequence, expected strings after each macro)
KNOWN_REPLAYS = [
    ("0000005000000000000050005000000005", Boundary.OPEN, SIX_LEVEL,
     [MacroName.POINTER_CREATE], ["0000325230000000003250005230000325"]),
    ("0023320", Boundary.OPEN, SIX_LEVEL, [MacroName.STEP_RIGHT], ["0032230"]),
    ("23032", Boundary.OPEN, SIX_LEVEL,
     [MacroName.STEP_RIGHT, MacroName.STEP_RIGHT], ["04040", "32023"]),
    ("23132", Boundary.OPEN, SIX_LEVEL,
     [MacroName.STEP_RIGHT, MacroName.STEP_RIGHT], ["14141", "32123"]),
    ("235", Boundary.OPEN, SIX_LEVEL, [MacroName.STEP_RIGHT], ["325"]),
    ("00100", Boundary.PERIODIC, FIVE_LEVEL, [MacroName.POINTER_CREATE], ["32123"]),
    ("5000005", Boundary.PERIODIC, SIX_LEVEL, [MacroName.POINTER_CREATE], ["5230325"]),
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} deviation={self.deviation:.3e}"
        return f"{text} {self.detail}" if self.detail else text


# ── Random inputs ─────────────────────────────────────────────────────────

def random_qubit_vector(rng: np.random.Generator) -> QubitVector:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z /= np.linalg.norm(z)
    return QubitVector(z[0], z[1])


def random_pulse(rng: np.random.Generator, mode: SchemeMode = SIX_LEVEL) -> Pulse:
    """Any pulse kind the engine supports, valid for *mode*."""
    d = mode.levels
    kind = int(rng.integers(4))
    if kind == 0:
        return GlobalLevelSwap(int(rng.integers(d)), int(rng.integers(d)))
    if kind == 1:
        control = int(rng.integers(2, d))
        return ControlledExchange(control, random_qubit_vector(rng), random_qubit_vector(rng),
                                  float(rng.uniform(-math.pi, math.pi)))
    control = int(rng.integers(d))
    others = [x for x in range(d) if x != control]
    u = int(rng.choice(others))
    v = u if kind == 3 else int(rng.choice(others))
    angle = HALF_PI * (1 if rng.random() < 0.5 else -1) if kind == 2 else rng.uniform(-3, 3)
    return ControlledExchange(control, u, v, float(angle))


def random_state(
    rng: np.random.Generator, config: LatticeConfig, support: int = 4
) -> SparseState:
    """Normalised superposition of a few random basis strings."""
    table: Dict[tuple, complex] = {}
    for _ in range(support):
        s = tuple(int(x) for x in rng.integers(config.levels, size=config.m))
        table[s] = table.get(s, 0j) + complex(rng.normal(), rng.normal())
    norm = math.sqrt(sum(abs(a) ** 2 for a in table.values()))
    return SparseState.from_amplitudes(config, {s: a / norm for s, a in table.items()})


def max_amplitude_gap(a: SparseState, b: SparseState) -> float:
    keys = set(a.amplitudes) | set(b.amplitudes)
    return max((abs(a.amplitude(s) - b.amplitude(s)) for s in keys), default=0.0)


def single_string(state: SparseState) -> str:
    """Digit string of a one-entry state, or '' for a superposition."""
    if len(state) != 1:
        return ""
    return format_basis(state.support[0])


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(
    rng: np.random.Generator, n: int, max_ops: int = 8, measure: bool = False
) -> LogicalCircuit:
    """Up to *max_ops* operations on n qubits, the last one a Measure if asked."""
    count = int(rng.integers(1, max_ops + 1))
    ops: list = []
    for _ in range(count - 1 if measure else count):
        if n == 1 or rng.random() < 0.5:
            ops.append(Gate1(int(rng.integers(1, n + 1)), random_unitary(rng)))
        else:
            control, target = rng.choice(np.arange(1, n + 1), size=2, replace=False)
            ops.append(CNOT(int(control), int(target)))
    if measure:
        ops.append(Measure(int(rng.integers(1, n + 1))))
    return LogicalCircuit(n, tuple(ops))


# ── Locality ──────────────────────────────────────────────────────────────

def far_sites(config: LatticeConfig, site: int, radius: int) -> List[int]:
    return [i for i in range(config.m) if config.distance(i, site) > radius]


def density_gap(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0j) - b.get(k, 0j)) for k in keys), default=0.0)


def perturbation_gap(
    rng: np.random.Generator, config: LatticeConfig, pulses: int
) -> float:
    """Far-site marginal change after *pulses* random pulses from a one-site change."""
    d, m = config.levels, config.m
    s = [int(x) for x in rng.integers(d, size=m)]
    j = int(rng.integers(m))
    t = list(s)
    t[j] = (s[j] + int(rng.integers(1, d))) % d
    a = make_basis_state(config, s)
    b = make_basis_state(config, t)
    for _ in range(pulses):
        pulse = random_pulse(rng, config.mode)
        a, b = apply_pulse(a, pulse), apply_pulse(b, pulse)
    far = far_sites(config, j, pulses)
    if not far:
        return 0.0
    return density_gap(reduced_density(a, far), reduced_density(b, far))


# ── Pointer tracing ───────────────────────────────────────────────────────

def run_fresh_partition(compiled: CompiledProgram, length: int) -> SparseState:
    """Creation then *compiled* on one partition of *length* sites after a wall."""
    state = make_basis_state(LatticeConfig(length + 1), (5,) + (0,) * length)
    return apply_program(create_pointers(state), compiled.program)


def pointer_gaps(state: SparseState, length: int) -> Set[Tuple[int, int]]:
    """(left, right) gaps of the two pointers in a partition starting at site 1."""
    gaps = set()
    for s in state:
        twos = [i for i in range(1, length + 1) if s[i] == 2]
        gaps.add((twos[0] - 1, length - twos[-1]) if twos else (-1, -1))
    return gaps


def routing_trace(compiled: CompiledProgram, length: int) -> Optional[int]:
    """Index of the first segment whose pointer gap disagrees with the trajectory."""
    state = create_pointers(make_basis_state(LatticeConfig(length + 1), (5,) + (0,) * length))
    if pointer_gaps(state, length) != {(0, 0)}:
        return 0
    for index, seg in enumerate(compiled.segments):
        state = apply_program(state, compiled.program[seg.start:seg.stop])
        if pointer_gaps(state, length) != {(seg.gap, seg.gap)}:
            return index + 1
    return None


# ── Suites ────────────────────────────────────────────────────────────────

def oracle_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """Sparse per-site rule against the dense matrix exponential."""
    rng = np.random.default_rng(seed)
    cases = 20 if quick else 200
    max_m = 4 if quick else 6
    worst = 0.0
    for _ in range(cases):
        m = int(rng.integers(2, max_m + 1))
        boundary = Boundary.PERIODIC if rng.random() < 0.5 else Boundary.OPEN
        config = LatticeConfig(m, boundary, SIX_LEVEL)
        state = random_state(rng, config)
        pulse = random_pulse(rng)
        sparse = apply_pulse(state, pulse)
        dense = apply_pulse_dense(to_dense(state), pulse)
        worst = max(worst, max_amplitude_gap(sparse, from_dense(dense)))
    results = [CheckResult(f"sparse vs dense ({cases} cases)", worst <= 1e-10, worst)]

    drift = 0.0
    identity_gap = 0.0
    config = LatticeConfig(4, Boundary.PERIODIC, SIX_LEVEL)
    for _ in range(10 if quick else 1000):
        state = random_state(rng, config)
        program = PulseProgram(tuple(random_pulse(rng) for _ in range(10)), SIX_LEVEL)
        out = state
        for pulse in program:
            out = apply_pulse(out, pulse)
            drift = max(drift, out.norm_drift())
        back = apply_program(out, invert(program))
        identity_gap = max(identity_gap, max_amplitude_gap(back, state))
    results.append(CheckResult("norm drift per pulse", drift <= 1e-12, drift))
    results.append(CheckResult("program then inverse", identity_gap <= 1e-12, identity_gap))

    mirror = shift = 0.0
    for _ in range(cases):
        m = int(rng.integers(3, max_m + 1))
        boundary = Boundary.PERIODIC if rng.random() < 0.5 else Boundary.OPEN
        state = random_state(rng, LatticeConfig(m, boundary, SIX_LEVEL))
        pulse = random_pulse(rng)
        mirror = max(mirror, max_amplitude_gap(
            apply_pulse(reflect_state(state), pulse), reflect_state(apply_pulse(state, pulse))
        ))
        if boundary is Boundary.PERIODIC:
            k = int(rng.integers(1, m))
            shift = max(shift, max_amplitude_gap(
                apply_pulse(shift_state(state, k), pulse), shift_state(apply_pulse(state, pulse), k)
            ))
    results.append(CheckResult("reflection commutes with pulses", mirror <= 1e-12, mirror))
    results.append(CheckResult("translation commutes with pulses", shift <= 1e-12, shift))
    return results


def locality_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """One-site perturbations stay within radius t after t pulses."""
    rng = np.random.default_rng(seed)
    cases = 10 if quick else 40
    max_m = 8 if quick else 12
    max_t = 3 if quick else 5
    results = []
    for mode in (SIX_LEVEL, FIVE_LEVEL):
        worst = 0.0
        for _ in range(cases):
            t = int(rng.integers(1, max_t + 1))
            m = int(rng.integers(2 * t + 2, max_m + 1))
            boundary = Boundary.PERIODIC if rng.random() < 0.5 else Boundary.OPEN
            worst = max(worst, perturbation_gap(rng, LatticeConfig(m, boundary, mode), t))
        results.append(CheckResult(
            f"{mode.label} far marginals unchanged ({cases} cases, m <= {max_m}, t <= {max_t})",
            worst <= 1e-12, worst,
        ))
    return results


def compiler_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """Random circuits on a fresh partition of length 2n+6 against the reference."""
    rng = np.random.default_rng(seed)
    cases = 10 if quick else 50
    fid_gap = m4_gap = 0.0
    routing_failures = []
    for case in range(cases):
        n = int(rng.choice((2, 3)))
        circuit = random_circuit(rng, n, measure=bool(case % 2))
        compiled = compile_circuit(circuit)
        length = 2 * n + 6
        state = run_fresh_partition(compiled, length)
        expected, p_one = reference_simulate(circuit)
        if p_one is None:
            left, right = logical_readout(state, (1, length), n)
            fid_gap = max(fid_gap, 1.0 - fidelity(left, expected), 1.0 - fidelity(right, expected))
        else:
            m4_gap = max(m4_gap, abs(float(level_populations(state)[4]) - 2.0 * p_one))
        bad = routing_trace(compiled, length)
        if bad is not None:
            routing_failures.append(f"case {case} segment {bad}")
    return [
        CheckResult(f"fidelity both computers ({cases} circuits)", fid_gap <= 1e-9, fid_gap),
        CheckResult("<M4> = 2 Pr[1] after measurement", m4_gap <= 1e-9, m4_gap),
        CheckResult("pointer follows the gap trajectory", not routing_failures,
                    detail=", ".join(routing_failures)),
    ]


def protocols_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """Replay known pointer strings."""
    results = []
    for text, boundary, mode, macros, expected in KNOWN_REPLAYS:
        config = LatticeConfig(len(text), boundary, mode)
        state = make_basis_state(config, parse_basis(text, mode))
        seen = []
        for macro in macros:
            state = apply_program(state, macro_program(macro, mode))
            seen.append(single_string(state))
        ok = seen == expected
        results.append(CheckResult(
            f"{text} -> {' -> '.join(expected)}", ok,
            detail="" if ok else f"got {' -> '.join(s or '<superposition>' for s in seen)}",
        ))

    config = LatticeConfig(7, Boundary.PERIODIC, SIX_LEVEL)
    start = make_basis_state(config, "5040405")
    for macro in (MacroName.CNOT_SRC_LEFT, MacroName.CNOT_SRC_RIGHT):
        out = apply_program(start, macro_program(macro))
        results.append(CheckResult(f"inactive 04040 under {macro.value}",
                                   single_string(out) == "5040405"))
    out = apply_pulse(start, rot(0.7, KET0, KET1))
    results.append(CheckResult("inactive 04040 under ROT", single_string(out) == "5040405"))
    return results


def pure_mixed_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """Pure product superposition against the p_i-weighted wall ensemble."""
    results = []
    circuit = LogicalCircuit(1, (Gate1(1, HADAMARD), Measure(1)))
    sizes = (6,) if quick else (10, 12)
    for mode in (SIX_LEVEL, FIVE_LEVEL):
        program = protocol_program(mode, compile_circuit(circuit, mode))
        for m in sizes if mode is SIX_LEVEL else sizes[:1]:
            for eps in (0.1, 0.2):
                dev = pure_mixed_equivalence(m, eps, program, mode)
                results.append(CheckResult(f"{mode.label} m={m} eps={eps}", dev <= 1e-10, dev))

    m = 4 if quick else 6
    config = LatticeConfig(m, Boundary.PERIODIC, SIX_LEVEL)
    program = protocol_program(SIX_LEVEL, compile_circuit(circuit, SIX_LEVEL))
    branches = []
    for bits in range(2**m):
        walls = tuple(5 if bits >> i & 1 else 0 for i in range(m))
        branches.append(apply_program(make_basis_state(config, walls), program))
    worst = 0.0
    for i, a in enumerate(branches):
        for b in branches[i + 1:]:
            for x in range(SIX_LEVEL.levels):
                worst = max(worst, abs(level_count_matrix_element(a, b, x)))
    results.append(CheckResult(f"diagonal collapse m={m}", worst == 0.0, worst))
    return results


def scaling_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """Closed-form scaling values and Monte Carlo counts within 3 standard errors."""
    rows = scaling_table(range(2, 1001))
    ratios = [row.ratio for row in rows]
    results = [
        CheckResult("ratio n=2", abs(ratios[0] - 0.1001) < 5e-5, abs(ratios[0] - 0.75**8)),
        CheckResult("ratio n=10", abs(ratios[8] - 0.7857) < 5e-5, abs(ratios[8] - 0.99**24)),
        CheckResult("ratio increasing", all(a < b for a, b in zip(ratios, ratios[1:]))),
        CheckResult("ratio -> 1", 0.99 < ratios[-1] < 1.0, 1.0 - ratios[-1]),
    ]
    m = 10_000 if quick else 100_000
    trials = 20 if quick else 50
    for eps in (0.01, 0.02):
        for n in (2, 4):
            params = EnsembleParams(m, eps, n, trials=trials, master_seed=seed)
            report = run_ensemble(params, LogicalCircuit(n))
            dev_p = abs(report.partitions_mean - expected_partitions(m, eps))
            dev_w = abs(report.working_mean - expected_working(m, eps, n))
            results.append(CheckResult(
                f"partitions eps={eps} n={n}", dev_p <= 3 * report.partitions_stderr, dev_p,
                f"stderr={report.partitions_stderr:.3g}",
            ))
            results.append(CheckResult(
                f"working eps={eps} n={n}", dev_w <= 3 * report.working_stderr, dev_w,
                f"stderr={report.working_stderr:.3g}",
            ))
    return results


def conservation_configs(
    rng: np.random.Generator, count: int, max_m: int = 14
) -> List[SparseState]:
    """Random pointer-bearing states: walls, creation, then a few steps."""
    states = []
    for _ in range(count):
        m = int(rng.integers(6, max_m + 1))
        walls = rng.random(m) < 0.25
        walls[0] = True
        s = tuple(5 if w else 0 for w in walls)
        state = create_pointers(make_basis_state(LatticeConfig(m), s))
        steps = macro_program(MacroName.STEP_RIGHT)
        for _ in range(int(rng.integers(0, 6))):
            state = apply_program(state, steps)
        states.append(state)
    return states


def _census_totals(state: SparseState) -> set:
    periodic = state.config.periodic
    return {pointer_census(s, state.config.mode, periodic).total for s in state}


def _walls(state: SparseState) -> set:
    return {pointer_census(s, state.config.mode).walls for s in state}


def conservation_suite(quick: bool = False, seed: int = 0) -> List[CheckResult]:
    """Wall positions and pointer counts under macros."""
    rng = np.random.default_rng(seed)
    programs = [macro_program(name) for name in MacroName if name is not MacroName.POINTER_CREATE]
    compiled = compile_circuit(LogicalCircuit(1, (Gate1(1, HADAMARD),)), SIX_LEVEL)
    programs.append(compiled.program)

    touched = set()
    for program in programs + [macro_program(MacroName.POINTER_CREATE)]:
        touched |= program.touched_levels()
    results = [CheckResult("no pulse exchanges the wall level", SIX_LEVEL.wall_level not in touched)]

    wall_ok = census_ok = True
    for state in conservation_configs(rng, 20 if quick else 100):
        before_total, before_walls = _census_totals(state), _walls(state)
        for program in programs:
            after = apply_program(state, program)
            wall_ok &= _walls(after) == before_walls
            if program.name in (MacroName.STEP_RIGHT.value, MacroName.STEP_LEFT.value,
                                MacroName.CNOT_SRC_LEFT.value, MacroName.CNOT_SRC_RIGHT.value,
                                MacroName.MEASURE_PREP.value):
                census_ok &= _census_totals(after) == before_total
    results.append(CheckResult("wall positions invariant", bool(wall_ok)))
    results.append(CheckResult("pointer census invariant", bool(census_ok)))
    return results


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    "oracle": oracle_suite,
    "protocols": protocols_suite,
    "pure-mixed": pure_mixed_suite,
    "scaling": scaling_suite,
    "conservation": conservation_suite,
    "locality": locality_suite,
    "compiler": compiler_suite,
}


def list_suites() -> List[str]:
    return list(SUITES)


def run_suite(name: str, quick: bool = False, seed: int = 0) -> List[CheckResult]:
    if name not in SUITES:
        available = ", ".join(SUITES)
        raise KeyError(f"Unknown suite '{name}'. Available: {available}")
    results = SUITES[name](quick=quick, seed=seed)
    failed = sum(not r.passed for r in results)
    logger.info("Suite %s: %d checks, %d failed", name, len(results), failed)
    return results
