"""
Global pulses and their exact action on sparse states.

A ``ControlledExchange`` is the evolution e^{iHt} under the translation
and reflection invariant next-neighbour Hamiltonian that exchanges ``u``
and ``v`` on sites adjacent to the control level.  All terms commute, so
each site evolves independently by e^{i t k A} where ``k`` is the number
of its neighbours holding the control level and A = |u><v| + |v><u|.
``GlobalLevelSwap`` exchanges two levels on every site.
"""

from __future__ import annotations

import cmath
import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm

from .errors import InvalidPulse, ModeMismatch, NormDriftError
from .lattice import (
    NORM_TOLERANCE,
    PRUNE_CUTOFF,
    SIX_LEVEL,
    BasisString,
    LatticeConfig,
    SchemeMode,
    SparseState,
)

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2
POINTER_CONTROL = 3

_VECTOR_TOLERANCE = 1e-12
_DRIFT_WARNING = 1e-12


# ---------------------------------------------------------------------------
# Pulse types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitVector:
    """Normalised state c0|0> + c1|1> in the qubit subspace."""
    c0: complex = 1.0
    c1: complex = 0.0

    def __post_init__(self):
        c0, c1 = complex(self.c0), complex(self.c1)
        if not (cmath.isfinite(c0) and cmath.isfinite(c1)):
            raise InvalidPulse(f"qubit vector components must be finite: ({c0}, {c1})")
        norm = abs(c0) ** 2 + abs(c1) ** 2
        if abs(norm - 1.0) > _VECTOR_TOLERANCE:
            raise InvalidPulse(f"qubit vector has squared norm {norm!r}")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "c1", c1)

    def embed(self, levels: int) -> np.ndarray:
        vec = np.zeros(levels, dtype=np.complex128)
        vec[0], vec[1] = self.c0, self.c1
        return vec


KET0 = QubitVector(1, 0)
KET1 = QubitVector(0, 1)
KET1_I = QubitVector(0, 1j)

Component = Union[int, QubitVector]


def embed_component(w: Component, levels: int) -> np.ndarray:
    if isinstance(w, QubitVector):
        return w.embed(levels)
    vec = np.zeros(levels, dtype=np.complex128)
    vec[w] = 1.0
    return vec


@dataclass(frozen=True)
class ControlledExchange:
    """Exchange ``u`` and ``v`` next to ``control`` for time ``angle``."""
    control: int
    u: Component
    v: Component
    angle: float = HALF_PI

    def __post_init__(self):
        for name in ("u", "v"):
            w = getattr(self, name)
            if isinstance(w, QubitVector):
                continue
            if isinstance(w, bool) or not isinstance(w, (int, np.integer)):
                raise InvalidPulse(f"{name} must be a level or a QubitVector, got {w!r}")
            object.__setattr__(self, name, int(w))
        object.__setattr__(self, "control", int(self.control))
        angle = float(self.angle)
        if not math.isfinite(angle):
            raise InvalidPulse(f"angle must be finite, got {self.angle!r}")
        object.__setattr__(self, "angle", angle)

    @property
    def is_basis(self) -> bool:
        return not isinstance(self.u, QubitVector) and not isinstance(self.v, QubitVector)

    def validate(self, mode: SchemeMode) -> None:
        if not 0 <= self.control < mode.levels:
            raise InvalidPulse(f"control level {self.control} out of range for {mode.label}")
        for name in ("u", "v"):
            w = getattr(self, name)
            if isinstance(w, QubitVector):
                if abs(w.embed(mode.levels)[self.control]) > _VECTOR_TOLERANCE:
                    raise InvalidPulse(f"{name} overlaps the control level {self.control}")
            else:
                if not 0 <= w < mode.levels:
                    raise InvalidPulse(f"{name}={w} out of range for {mode.label}")
                if w == self.control:
                    raise InvalidPulse(f"{name} equals the control level {self.control}")

    def generator(self, levels: int) -> np.ndarray:
        """Single-site generator A = |u><v| + |v><u|."""
        a = embed_component(self.u, levels)
        b = embed_component(self.v, levels)
        return np.outer(a, b.conj()) + np.outer(b, a.conj())

    def span(self, levels: int) -> FrozenSet[int]:
        """Levels the pulse can change or re-phase."""
        gen = self.generator(levels)
        return frozenset(
            int(x) for x in range(levels)
            if np.any(np.abs(gen[:, x]) > 0) or np.any(np.abs(gen[x, :]) > 0)
        )

    def inverse(self) -> "ControlledExchange":
        return replace(self, angle=-self.angle)


@dataclass(frozen=True)
class GlobalLevelSwap:
    """Exchange levels ``x`` and ``y`` on every site."""
    x: int
    y: int

    def __post_init__(self):
        object.__setattr__(self, "x", int(self.x))
        object.__setattr__(self, "y", int(self.y))

    def validate(self, mode: SchemeMode) -> None:
        for level in (self.x, self.y):
            if not 0 <= level < mode.levels:
                raise InvalidPulse(f"swap level {level} out of range for {mode.label}")

    def permute(self, level: int) -> int:
        if level == self.x:
            return self.y
        if level == self.y:
            return self.x
        return level

    def span(self, levels: int) -> FrozenSet[int]:
        return frozenset() if self.x == self.y else frozenset((self.x, self.y))

    def inverse(self) -> "GlobalLevelSwap":
        return self


Pulse = Union[ControlledExchange, GlobalLevelSwap]


def lx(control: int, u: int, v: int, sign: int = +1) -> ControlledExchange:
    """Basis-level exchange with angle sign * pi/2."""
    return ControlledExchange(control, u, v, HALF_PI if sign >= 0 else -HALF_PI)


def rot(angle: float, u: QubitVector, v: QubitVector) -> ControlledExchange:
    """Rotation of the qubit next to a pointer's level 3."""
    return ControlledExchange(POINTER_CONTROL, u, v, angle)


def describe_pulse(pulse: Pulse) -> str:
    if isinstance(pulse, GlobalLevelSwap):
        return f"SW {pulse.x} {pulse.y}"
    if pulse.is_basis and abs(abs(pulse.angle) - HALF_PI) < 1e-15:
        return f"LX {pulse.control} {pulse.u} {pulse.v} {'+' if pulse.angle > 0 else '-'}"
    return f"CX control={pulse.control} u={pulse.u} v={pulse.v} angle={pulse.angle:.6g}"


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PulseProgram:
    """Ordered pulse list for one scheme mode.  The name is a label only."""
    pulses: Tuple[Pulse, ...] = ()
    mode: SchemeMode = SIX_LEVEL
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        pulses = tuple(self.pulses)
        for index, pulse in enumerate(pulses):
            if not isinstance(pulse, (ControlledExchange, GlobalLevelSwap)):
                raise InvalidPulse(f"pulse {index} is not a pulse: {pulse!r}")
            try:
                pulse.validate(self.mode)
            except InvalidPulse as exc:
                raise InvalidPulse(f"pulse {index}: {exc}") from exc
        object.__setattr__(self, "pulses", pulses)

    def __len__(self) -> int:
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return PulseProgram(self.pulses[index], self.mode, self.name)
        return self.pulses[index]

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        if not isinstance(other, PulseProgram):
            return NotImplemented
        if other.mode != self.mode:
            raise ModeMismatch(f"cannot join {self.mode.label} and {other.mode.label} programs")
        return PulseProgram(self.pulses + other.pulses, self.mode)

    def touched_levels(self) -> FrozenSet[int]:
        touched: set = set()
        for pulse in self.pulses:
            touched |= pulse.span(self.mode.levels)
        return frozenset(touched)

    @classmethod
    def concat(cls, programs: Iterable["PulseProgram"], mode: SchemeMode,
               name: Optional[str] = None) -> "PulseProgram":
        pulses: List[Pulse] = []
        for program in programs:
            if program.mode != mode:
                raise ModeMismatch(f"{program.mode.label} program in a {mode.label} sequence")
            pulses.extend(program.pulses)
        return cls(tuple(pulses), mode, name)


def _inverse_name(name: Optional[str]) -> Optional[str]:
    if name is None:
        return None
    return name[:-3] if name.endswith("^-1") else f"{name}^-1"


def invert(program: PulseProgram) -> PulseProgram:
    """Run *program* backwards: reversed order, negated angles."""
    pulses = tuple(p.inverse() for p in reversed(program.pulses))
    return PulseProgram(pulses, program.mode, _inverse_name(program.name))


# ---------------------------------------------------------------------------
# Sparse evolution
# ---------------------------------------------------------------------------

# column table: per activation count k, per input level, the (level, coeff)
# pairs of e^{i t k A}; None marks levels outside the span
_Column = Optional[Tuple[Tuple[int, complex], ...]]


@lru_cache(maxsize=1024)
def _activation_table(pulse: ControlledExchange, levels: int) -> Tuple[Tuple[_Column, ...], ...]:
    gen = pulse.generator(levels)
    active = sorted(pulse.span(levels))
    sub = gen[np.ix_(active, active)]
    table: List[Tuple[_Column, ...]] = [tuple([None] * levels)]
    for k in (1, 2):
        unitary = expm(1j * pulse.angle * k * sub)
        cols: List[_Column] = [None] * levels
        for jj, level in enumerate(active):
            cols[level] = tuple(
                (active[ii], complex(unitary[ii, jj]))
                for ii in range(len(active))
                if abs(unitary[ii, jj]) >= PRUNE_CUTOFF
            )
        table.append(tuple(cols))
    return tuple(table)


def site_activation(
    s: Sequence[int], pulse: ControlledExchange, config: LatticeConfig
) -> List[int]:
    """Number of neighbours of every site that hold the control level."""
    control = pulse.control
    return [
        sum(1 for j in neighbors if s[j] == control)
        for neighbors in config.neighbor_table
    ]


def _exchange_branches(
    s: BasisString, amp: complex, pulse: ControlledExchange, config: LatticeConfig, table
):
    branches = []
    for i, k in enumerate(site_activation(s, pulse, config)):
        if k:
            col = table[k][s[i]]
            if col is not None:
                branches.append((i, col))
    if not branches:
        yield s, amp
        return
    work = list(s)
    for choice in itertools.product(*(col for _, col in branches)):
        coeff = amp
        for (i, _), (level, c) in zip(branches, choice):
            work[i] = level
            coeff *= c
        yield tuple(work), coeff


def apply_pulse(state: SparseState, pulse: Pulse) -> SparseState:
    """Exact action of one global pulse on a sparse state."""
    config = state.config
    if not isinstance(pulse, (ControlledExchange, GlobalLevelSwap)):
        raise InvalidPulse(f"not a pulse: {pulse!r}")
    pulse.validate(config.mode)

    if isinstance(pulse, GlobalLevelSwap):
        table = {tuple(pulse.permute(x) for x in s): a for s, a in state.items()}
    else:
        columns = _activation_table(pulse, config.levels)
        table = defaultdict(complex)
        for s, amp in state.items():
            for out, coeff in _exchange_branches(s, amp, pulse, config, columns):
                table[out] += coeff

    result = SparseState.from_amplitudes(config, table, check_keys=False)
    drift = result.norm_drift()
    if not drift <= NORM_TOLERANCE:
        raise NormDriftError(f"norm drift {drift:.3e} after {describe_pulse(pulse)}")
    if drift > _DRIFT_WARNING:
        logger.warning("norm drift %.3e after %s", drift, describe_pulse(pulse))
    return result


def apply_pulses(state: SparseState, pulses: Iterable[Pulse]) -> SparseState:
    for pulse in pulses:
        state = apply_pulse(state, pulse)
    return state


def apply_program(state: SparseState, program: PulseProgram) -> SparseState:
    """Apply every pulse of *program* in order."""
    if program.mode != state.config.mode:
        raise ModeMismatch(
            f"{program.mode.label} program on a {state.config.mode.label} lattice"
        )
    for index, pulse in enumerate(program.pulses):
        state = apply_pulse(state, pulse)
        logger.debug("pulse %d %s: support %d", index, describe_pulse(pulse), len(state))
    return state
