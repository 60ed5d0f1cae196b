"""
Named pulse sequences and classical pointer/partition utilities.

Macros are data: each name maps to a fixed pulse list for a scheme mode,
so programs built from them can be serialised, inverted and audited.
A pointer is the adjacent pair "23" (moves right under STEP_RIGHT) or its
mirror "32"; the qubit it addresses is the site next to its level 3.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .errors import InvalidInput, ModeMismatch
from .lattice import SIX_LEVEL, Boundary, SchemeMode, SparseState
from .pulses import GlobalLevelSwap, Pulse, PulseProgram, apply_program, invert, lx

logger = logging.getLogger(__name__)


class MacroName(str, Enum):
    POINTER_CREATE = "POINTER_CREATE"
    STEP_RIGHT = "STEP_RIGHT"
    STEP_LEFT = "STEP_LEFT"
    CNOT_SRC_LEFT = "CNOT_SRC_LEFT"
    CNOT_SRC_RIGHT = "CNOT_SRC_RIGHT"
    MEASURE_PREP = "MEASURE_PREP"


# ── Sequences ─────────────────────────────────────────────────────────────

def _pointer_create(mode: SchemeMode) -> Tuple[Pulse, ...]:
    wall = mode.wall_level
    return (lx(wall, 0, 2), lx(2, 0, 3), lx(3, 2, 4), lx(wall, 0, 2), lx(3, 2, 4))


def _step_right(mode: SchemeMode) -> Tuple[Pulse, ...]:
    return (
        lx(0, 3, 4), lx(4, 0, 2), lx(0, 4, 3),
        lx(1, 3, 4), lx(4, 1, 2), lx(1, 4, 3),
        GlobalLevelSwap(2, 3),
    )


def _step_left(mode: SchemeMode) -> Tuple[Pulse, ...]:
    return invert(PulseProgram(_step_right(mode), mode)).pulses


def _cnot_src_left(mode: SchemeMode) -> Tuple[Pulse, ...]:
    return (lx(0, 2, 4), lx(4, 3, 2), lx(2, 1, 0), lx(4, 3, 2), lx(2, 1, 0), lx(0, 2, 4))


def _swap_23(level: int) -> int:
    return {2: 3, 3: 2}.get(level, level)


def _cnot_src_right(mode: SchemeMode) -> Tuple[Pulse, ...]:
    return tuple(
        lx(_swap_23(p.control), _swap_23(p.u), _swap_23(p.v))
        for p in _cnot_src_left(mode)
    )


def _measure_prep(mode: SchemeMode) -> Tuple[Pulse, ...]:
    return (lx(3, 1, 4),)


MACROS: Dict[MacroName, Callable[[SchemeMode], Tuple[Pulse, ...]]] = {
    MacroName.POINTER_CREATE: _pointer_create,
    MacroName.STEP_RIGHT: _step_right,
    MacroName.STEP_LEFT: _step_left,
    MacroName.CNOT_SRC_LEFT: _cnot_src_left,
    MacroName.CNOT_SRC_RIGHT: _cnot_src_right,
    MacroName.MEASURE_PREP: _measure_prep,
}

# CNOT_SRC_* on (source, target): source 0 flips the target with phase i,
# source 1 leaves it with phase -1.
CNOT_FLIP_ON_SOURCE = 0


def list_macros() -> List[str]:
    return [name.value for name in MacroName]


def get_macro_name(name: Union[str, MacroName]) -> MacroName:
    if isinstance(name, MacroName):
        return name
    key = name.strip().upper().replace("-", "_")
    try:
        return MacroName(key)
    except ValueError:
        available = ", ".join(list_macros())
        raise InvalidInput(f"Unknown macro '{name}'. Available: {available}") from None


def macro_program(
    name: Union[str, MacroName],
    mode: SchemeMode = SIX_LEVEL,
    wall_level: Optional[int] = None,
) -> PulseProgram:
    """Pulse program of a named macro for *mode*.

    ``wall_level`` pins the wall the creation sequence is built for; it
    must match the mode.
    """
    macro = get_macro_name(name)
    if wall_level is not None and wall_level != mode.wall_level:
        raise ModeMismatch(
            f"{macro.value} for wall level {wall_level} in {mode.label} mode "
            f"(wall level {mode.wall_level})"
        )
    return PulseProgram(MACROS[macro](mode), mode, macro.value)


def create_pointers(state: SparseState) -> SparseState:
    """Apply the creation sequence: partitions of >= 5 sites gain wall·23…32·wall."""
    program = macro_program(MacroName.POINTER_CREATE, state.config.mode)
    return apply_program(state, program)


# ── Census and partitions ─────────────────────────────────────────────────

_INACTIVE = ((0, 4, 0, 4, 0), (1, 4, 1, 4, 1))


@dataclass(frozen=True)
class PointerCensus:
    """Pointer patterns and wall positions of one basis string."""
    right: int = 0        # "23"
    left: int = 0         # "32"
    inactive: int = 0     # "04040" / "14141", two pointers each
    walls: Tuple[int, ...] = ()

    @property
    def total(self) -> int:
        return self.right + self.left + 2 * self.inactive


def _windows(s: Sequence[int], width: int, periodic: bool):
    m = len(s)
    stop = m if periodic else m - width + 1
    for i in range(max(stop, 0)):
        yield tuple(s[(i + k) % m] for k in range(width))


def pointer_census(
    s: Sequence[int], mode: SchemeMode = SIX_LEVEL, periodic: bool = False
) -> PointerCensus:
    """Count pointer patterns in *s*; ``periodic`` also scans across the wrap."""
    s = tuple(s)
    right = left = inactive = 0
    if len(s) >= 2:
        for pair in _windows(s, 2, periodic and len(s) > 2):
            if pair == (2, 3):
                right += 1
            elif pair == (3, 2):
                left += 1
    if len(s) >= 5:
        inactive = sum(1 for w in _windows(s, 5, periodic and len(s) > 5) if w in _INACTIVE)
    walls = tuple(i for i, x in enumerate(s) if x == mode.wall_level)
    return PointerCensus(right, left, inactive, walls)


def partition_split(
    s: Sequence[int],
    mode: SchemeMode = SIX_LEVEL,
    boundary: Union[Boundary, str] = Boundary.PERIODIC,
) -> List[Tuple[int, int]]:
    """Maximal wall-free runs as (start, length); periodic joins the wrap run."""
    s = tuple(s)
    m = len(s)
    wall = mode.wall_level
    walls = [i for i, x in enumerate(s) if x == wall]
    if not walls:
        return [(0, m)] if m else []

    runs: List[Tuple[int, int]] = []
    if Boundary(boundary) is Boundary.PERIODIC:
        for w, nxt in zip(walls, walls[1:] + [walls[0] + m]):
            if nxt - w > 1:
                runs.append(((w + 1) % m, nxt - w - 1))
        return sorted(runs)

    edges = [-1] + walls + [m]
    for w, nxt in zip(edges, edges[1:]):
        if nxt - w > 1:
            runs.append((w + 1, nxt - w - 1))
    return runs
