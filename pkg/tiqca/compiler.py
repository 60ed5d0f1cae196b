"""
Circuit compiler: logical n-qubit circuits -> global pulse programs.

Tape model: the pointer of each computer sits in a *gap* between logical
qubits k and k+1 (home is gap 0, next to the wall).  STEP_RIGHT moves the
gap up by one, STEP_LEFT down by one.  A single-qubit gate acts on qubit
gap+1, the qubit next to the pointer's level 3.  The CNOT macros act on
the qubits on both sides of the pointer.

Both computers of a partition (the "23" pointer at its left end and the
mirrored "32" pointer at its right end) see the same pulses and run the
same logical program.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    InvalidCircuit,
    NotSpecialUnitary,
    NotUnitary,
    PartitionTooSmall,
    PointerNotHome,
    RoutingError,
    ScaleOverflow,
)
from .lattice import SIX_LEVEL, SchemeMode, SparseState
from .macros import MacroName, macro_program
from .pulses import (
    KET0,
    KET1,
    KET1_I,
    POINTER_CONTROL,
    ControlledExchange,
    Pulse,
    PulseProgram,
    rot,
)

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-10
REFERENCE_QUBIT_LIMIT = 12

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
# applied to the CNOT source after the macro: S·X
_SOURCE_CORRECTION = np.array([[0, 1], [1j, 0]], dtype=np.complex128)


# ---------------------------------------------------------------------------
# Logical circuits
# ---------------------------------------------------------------------------

def _check_unitary(matrix: np.ndarray) -> None:
    err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(2)))
    if not err <= UNITARY_TOLERANCE:
        raise NotUnitary(f"matrix is not unitary (|G^dag G - I| = {err:.3e})")


@dataclass(frozen=True, eq=False)
class Gate1:
    target: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (2, 2):
            raise InvalidCircuit(f"single-qubit gate needs a 2x2 matrix, got {mat.shape}")
        _check_unitary(mat)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "target", int(self.target))


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    @property
    def adjacent(self) -> bool:
        return abs(self.control - self.target) == 1


@dataclass(frozen=True)
class Measure:
    q: int


Operation = Union[Gate1, CNOT, Measure]


@dataclass(frozen=True, eq=False)
class LogicalCircuit:
    """n qubits, numbered 1..n, and an ordered gate list."""
    n: int
    ops: Tuple[Operation, ...] = ()

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidCircuit(f"qubit count must be >= 1, got {self.n!r}")
        ops = tuple(self.ops)
        for index, op in enumerate(ops):
            if isinstance(op, Gate1):
                self._check_index(op.target, index)
            elif isinstance(op, CNOT):
                self._check_index(op.control, index)
                self._check_index(op.target, index)
                if op.control == op.target:
                    raise InvalidCircuit(f"op {index}: CNOT control equals target")
            elif isinstance(op, Measure):
                self._check_index(op.q, index)
                if index != len(ops) - 1:
                    raise InvalidCircuit(f"op {index}: measurement must be the last operation")
            else:
                raise InvalidCircuit(f"op {index}: unknown operation {op!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "ops", ops)

    def _check_index(self, q: int, index: int) -> None:
        if not 1 <= q <= self.n:
            raise InvalidCircuit(f"op {index}: qubit {q} outside 1..{self.n}")

    @property
    def measurement(self) -> Optional[Measure]:
        if self.ops and isinstance(self.ops[-1], Measure):
            return self.ops[-1]
        return None

    @property
    def min_partition(self) -> int:
        return 2 * self.n + 4


def _swap(a: int, b: int) -> List[CNOT]:
    return [CNOT(a, b), CNOT(b, a), CNOT(a, b)]


def lower_cnots(circuit: LogicalCircuit) -> LogicalCircuit:
    """Rewrite non-adjacent CNOTs as swap chains around an adjacent CNOT."""
    ops: List[Operation] = []
    for op in circuit.ops:
        if not isinstance(op, CNOT) or op.adjacent:
            ops.append(op)
            continue
        step = 1 if op.target > op.control else -1
        chain: List[CNOT] = []
        q = op.control
        while q + step != op.target:
            chain.extend(_swap(q, q + step))
            q += step
        ops.extend(chain)
        ops.append(CNOT(q, op.target))
        ops.extend(reversed(chain))
    return LogicalCircuit(circuit.n, tuple(ops))


# ---------------------------------------------------------------------------
# Single-qubit synthesis
# ---------------------------------------------------------------------------

def _wrap(angle: float) -> float:
    """Map to (-pi, pi]."""
    wrapped = math.remainder(angle, 2 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


def split_phase(matrix: np.ndarray) -> Tuple[float, np.ndarray]:
    """G -> (phi, S) with G = e^{i phi} S and det S = 1."""
    mat = np.asarray(matrix, dtype=np.complex128)
    _check_unitary(mat)
    phi = cmath.phase(np.linalg.det(mat)) / 2
    return phi, mat * cmath.exp(-1j * phi)


def euler_angles(matrix: np.ndarray) -> Tuple[float, float, float]:
    """(alpha, beta, gamma) with G = e^{i alpha X} e^{i beta Y} e^{i gamma X}.

    Conjugating by a Hadamard turns the X-Y-X product into Z-Y-Z, whose
    first column reads off the angles directly.
    """
    g = np.asarray(matrix, dtype=np.complex128)
    if g.shape != (2, 2):
        raise NotUnitary(f"expected a 2x2 matrix, got {g.shape}")
    _check_unitary(g)
    det = np.linalg.det(g)
    if abs(det - 1) > UNITARY_TOLERANCE:
        raise NotSpecialUnitary(f"det = {det:.6g}, expected 1")

    v = _HADAMARD @ g @ _HADAMARD
    beta = math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-12:
        return _wrap(cmath.phase(v[0, 0])), 0.0, 0.0
    if abs(v[0, 0]) < 1e-12:
        return _wrap(-cmath.phase(v[1, 0])), beta, 0.0
    p00, p10 = cmath.phase(v[0, 0]), cmath.phase(v[1, 0])
    return _wrap((p00 - p10) / 2), beta, _wrap((p00 + p10) / 2)


def gate_pulses(matrix: np.ndarray, global_phase: bool = False) -> List[Pulse]:
    """Rotations applying *matrix* to every qubit next to a single level 3."""
    phi, su = split_phase(matrix)
    alpha, beta, gamma = euler_angles(su)
    pulses: List[Pulse] = [rot(gamma, KET0, KET1), rot(beta, KET0, KET1_I), rot(alpha, KET0, KET1)]
    if global_phase and abs(phi) > 1e-15:
        # u = v exchange: generator 2|w><w|, so angle phi/2 on each level
        pulses.append(ControlledExchange(POINTER_CONTROL, KET0, KET0, phi / 2))
        pulses.append(ControlledExchange(POINTER_CONTROL, KET1, KET1, phi / 2))
    return pulses


# ---------------------------------------------------------------------------
# Tape model and compilation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TapeLayout:
    n: int
    gap: int = 0

    def __post_init__(self):
        if not 0 <= self.gap <= self.n:
            raise RoutingError(f"gap {self.gap} outside 0..{self.n}")

    def step_right(self) -> "TapeLayout":
        return TapeLayout(self.n, self.gap + 1)

    def step_left(self) -> "TapeLayout":
        return TapeLayout(self.n, self.gap - 1)

    @property
    def addressed(self) -> int:
        """Qubit a single-qubit gate acts on."""
        return self.gap + 1


@dataclass(frozen=True)
class CompilerOptions:
    global_phase: bool = False


@dataclass(frozen=True)
class Segment:
    label: str
    start: int
    stop: int
    gap: int          # gap after the segment


@dataclass(frozen=True, eq=False)
class CompiledProgram:
    program: PulseProgram
    n: int
    min_partition: int
    segments: Tuple[Segment, ...] = ()
    final_gap: int = 0
    measured_qubit: Optional[int] = None

    @property
    def gap_trajectory(self) -> Tuple[int, ...]:
        return (0,) + tuple(seg.gap for seg in self.segments)


class _Emitter:
    def __init__(self, n: int, mode: SchemeMode, options: CompilerOptions):
        self.mode = mode
        self.options = options
        self.layout = TapeLayout(n)
        self.pulses: List[Pulse] = []
        self.segments: List[Segment] = []
        self._step_right = macro_program(MacroName.STEP_RIGHT, mode).pulses
        self._step_left = macro_program(MacroName.STEP_LEFT, mode).pulses

    def push(self, label: str, pulses: Sequence[Pulse]) -> None:
        start = len(self.pulses)
        self.pulses.extend(pulses)
        self.segments.append(Segment(label, start, len(self.pulses), self.layout.gap))

    def route(self, gap: int) -> None:
        while self.layout.gap < gap:
            self.layout = self.layout.step_right()
            self.push(MacroName.STEP_RIGHT.value, self._step_right)
        while self.layout.gap > gap:
            self.layout = self.layout.step_left()
            self.push(MacroName.STEP_LEFT.value, self._step_left)

    def gate(self, q: int, matrix: np.ndarray, label: str = "GATE") -> None:
        self.route(q - 1)
        self.push(f"{label} q{q}", gate_pulses(matrix, self.options.global_phase))

    def cnot(self, op: CNOT) -> None:
        if not op.adjacent:
            raise RoutingError(f"CNOT({op.control},{op.target}) is not adjacent")
        n = self.layout.n
        if op.target == op.control + 1:
            macro, gap = MacroName.CNOT_SRC_LEFT, op.control
        else:
            macro, gap = MacroName.CNOT_SRC_RIGHT, op.target
        if not 1 <= gap <= n - 1:
            raise RoutingError(f"CNOT needs a gap inside 1..{n - 1}, got {gap}")
        # the macro flips on source 0; X before and S·X after give a standard CNOT
        self.gate(op.control, _PAULI_X, "PRE")
        self.route(gap)
        self.push(macro.value, macro_program(macro, self.mode).pulses)
        self.gate(op.control, _SOURCE_CORRECTION, "POST")

    def measure(self, op: Measure) -> None:
        self.route(op.q - 1)
        self.push(MacroName.MEASURE_PREP.value, macro_program(MacroName.MEASURE_PREP, self.mode).pulses)


def compile_circuit(
    circuit: LogicalCircuit,
    mode: SchemeMode = SIX_LEVEL,
    options: Optional[CompilerOptions] = None,
) -> CompiledProgram:
    """Lower *circuit* to a pulse program for every computer in a partition."""
    options = options or CompilerOptions()
    lowered = lower_cnots(circuit)
    emitter = _Emitter(circuit.n, mode, options)
    measured = None
    for op in lowered.ops:
        if isinstance(op, Gate1):
            emitter.gate(op.target, op.matrix)
        elif isinstance(op, CNOT):
            emitter.cnot(op)
        else:
            emitter.measure(op)
            measured = op.q
    if measured is None:
        emitter.route(0)

    program = PulseProgram(tuple(emitter.pulses), mode, "compiled")
    logger.info(
        "Compiled %d ops on %d qubits into %d pulses (%d segments)",
        len(circuit.ops), circuit.n, len(program), len(emitter.segments),
    )
    return CompiledProgram(
        program=program,
        n=circuit.n,
        min_partition=circuit.min_partition,
        segments=tuple(emitter.segments),
        final_gap=emitter.layout.gap,
        measured_qubit=measured,
    )


# ---------------------------------------------------------------------------
# Reference simulation and readout
# ---------------------------------------------------------------------------

def _apply_one(psi: np.ndarray, matrix: np.ndarray, q: int) -> np.ndarray:
    psi = np.tensordot(matrix, psi, axes=([1], [q - 1]))
    return np.moveaxis(psi, 0, q - 1)


def reference_simulate(circuit: LogicalCircuit) -> Tuple[np.ndarray, Optional[float]]:
    """Gate-by-gate 2^n simulation from |0...0>, qubit 1 most significant.

    Returns the final (pre-measurement) vector and, for a measured circuit,
    the probability of outcome 1.
    """
    n = circuit.n
    if n > REFERENCE_QUBIT_LIMIT:
        raise ScaleOverflow(f"reference simulation limited to {REFERENCE_QUBIT_LIMIT} qubits")
    psi = np.zeros((2,) * n, dtype=np.complex128)
    psi[(0,) * n] = 1.0
    p_one: Optional[float] = None
    for op in circuit.ops:
        if isinstance(op, Gate1):
            psi = _apply_one(psi, op.matrix, op.target)
        elif isinstance(op, CNOT):
            flipped = _apply_one(psi, _PAULI_X, op.target)
            index = [slice(None)] * n
            index[op.control - 1] = 1
            psi = psi.copy()
            psi[tuple(index)] = flipped[tuple(index)]
        else:
            index = [slice(None)] * n
            index[op.q - 1] = 1
            p_one = float(np.sum(np.abs(psi[tuple(index)]) ** 2))
    return psi.reshape(-1), p_one


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k]) if abs(vec[k]) > 0 else vec


def _principal(rows: dict, n: int) -> np.ndarray:
    cols = sorted({c for row in rows.values() for c in row})
    col_index = {c: j for j, c in enumerate(cols)}
    mat = np.zeros((2**n, len(cols)), dtype=np.complex128)
    for r, row in rows.items():
        for c, amp in row.items():
            mat[r, col_index[c]] += amp
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    vec = u[:, 0]
    return _canonical_phase(vec / np.linalg.norm(vec))


def logical_readout(
    state: SparseState, partition: Tuple[int, int], n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Logical states of the left and the mirrored right computer of a partition."""
    start, length = partition
    if length < 2 * n + 4:
        raise PartitionTooSmall(f"partition length {length} < 2n+4 = {2 * n + 4}")
    m = state.config.m
    sites = [(start + k) % m for k in range(length)]
    left_q = sites[2:2 + n]
    left_set = set(left_q)
    right_q = [sites[length - 3 - k] for k in range(n)]
    right_set = set(right_q)

    left_rows: dict = {}
    right_rows: dict = {}
    for s, amp in state.items():
        if (s[sites[0]], s[sites[1]], s[sites[-2]], s[sites[-1]]) != (2, 3, 3, 2):
            raise PointerNotHome(f"pointers not at home in partition starting at site {start}")
        bits_l = [s[i] for i in left_q]
        bits_r = [s[i] for i in right_q]
        if any(b not in (0, 1) for b in bits_l + bits_r):
            raise PointerNotHome("a qubit site holds a non-qubit level")
        li = int("".join(map(str, bits_l)), 2)
        ri = int("".join(map(str, bits_r)), 2)
        rest = tuple(x for i, x in enumerate(s) if i not in left_set)
        left_rows.setdefault(li, {})
        left_rows[li][rest] = left_rows[li].get(rest, 0) + amp
        rest = tuple(x for i, x in enumerate(s) if i not in right_set)
        right_rows.setdefault(ri, {})
        right_rows[ri][rest] = right_rows[ri].get(rest, 0) + amp
    if not left_rows:
        raise PointerNotHome("empty state")
    return _principal(left_rows, n), _principal(right_rows, n)
