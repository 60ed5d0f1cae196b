"""
Line-oriented text formats for pulse programs and logical circuits.

Pulse programs::

    LX <x> <a> <b> <+|->          controlled exchange of basis levels, angle +-pi/2
    ROT <t> <u0> <u1> <v0> <v1>   control-3 exchange of qubit vectors, each
                                  component written as "<re> <im>"
    SW <x> <y>                    global level swap

Circuits::

    qubits <n>
    g <q> <re00> <im00> <re01> <im01> <re10> <im10> <re11> <im11>
    cx <control> <target>
    measure <q>

``#`` starts a comment in both formats.  Reals are written with ``repr``
so programs survive a write/read cycle exactly.
"""

from __future__ import annotations

import cmath
import logging
import math
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .compiler import CNOT, Gate1, LogicalCircuit, Measure, Operation
from .errors import FormatError, InvalidInput, ParseError
from .lattice import SIX_LEVEL, SchemeMode
from .pulses import (
    HALF_PI,
    POINTER_CONTROL,
    ControlledExchange,
    GlobalLevelSwap,
    Pulse,
    PulseProgram,
    QubitVector,
    lx,
)

logger = logging.getLogger(__name__)

# (line number, [(column, token), ...])
_Line = Tuple[int, List[Tuple[int, str]]]


def _tokenize(text: str) -> Iterator[_Line]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens: List[Tuple[int, str]] = []
        col = 0
        for word in body.split():
            col = body.index(word, col)
            tokens.append((col + 1, word))
            col += len(word)
        if tokens:
            yield lineno, tokens


def _int(token: Tuple[int, str], lineno: int) -> int:
    col, word = token
    try:
        return int(word)
    except ValueError:
        raise ParseError(f"expected an integer, got {word!r}", lineno, col) from None


def _real(token: Tuple[int, str], lineno: int) -> float:
    col, word = token
    try:
        value = float(word)
    except ValueError:
        raise ParseError(f"expected a real number, got {word!r}", lineno, col) from None
    if not math.isfinite(value):
        raise ParseError(f"expected a finite real, got {word!r}", lineno, col)
    return value


def _arity(tokens, expected: int, lineno: int) -> None:
    if len(tokens) != expected:
        col, word = tokens[0]
        raise ParseError(
            f"{word} takes {expected - 1} arguments, got {len(tokens) - 1}", lineno, col
        )


# ---------------------------------------------------------------------------
# Pulse programs
# ---------------------------------------------------------------------------

def _parse_pulse(tokens, lineno: int) -> Pulse:
    col, head = tokens[0]
    keyword = head.upper()
    if keyword == "LX":
        _arity(tokens, 5, lineno)
        sign_col, sign = tokens[4]
        if sign not in ("+", "-"):
            raise ParseError(f"angle sign must be + or -, got {sign!r}", lineno, sign_col)
        x, a, b = (_int(t, lineno) for t in tokens[1:4])
        return lx(x, a, b, +1 if sign == "+" else -1)
    if keyword == "ROT":
        _arity(tokens, 10, lineno)
        t = _real(tokens[1], lineno)
        re = [_real(tok, lineno) for tok in tokens[2:]]
        u = QubitVector(complex(re[0], re[1]), complex(re[2], re[3]))
        v = QubitVector(complex(re[4], re[5]), complex(re[6], re[7]))
        return ControlledExchange(POINTER_CONTROL, u, v, t)
    if keyword == "SW":
        _arity(tokens, 3, lineno)
        return GlobalLevelSwap(_int(tokens[1], lineno), _int(tokens[2], lineno))
    raise ParseError(f"unknown pulse keyword {head!r}", lineno, col)


def parse_program(
    text: str, mode: SchemeMode = SIX_LEVEL, name: Optional[str] = None
) -> PulseProgram:
    """Parse the pulse-program text format."""
    pulses: List[Pulse] = []
    for lineno, tokens in _tokenize(text):
        try:
            pulse = _parse_pulse(tokens, lineno)
            pulse.validate(mode)
        except ParseError:
            raise
        except InvalidInput as exc:
            raise ParseError(str(exc), lineno, tokens[0][0]) from exc
        pulses.append(pulse)
    logger.debug("Parsed %d pulses", len(pulses))
    return PulseProgram(tuple(pulses), mode, name)


def _qubit_components(w) -> Tuple[complex, complex]:
    if isinstance(w, QubitVector):
        return w.c0, w.c1
    if w == 0:
        return 1 + 0j, 0j
    if w == 1:
        return 0j, 1 + 0j
    raise FormatError(f"level {w} is outside the qubit subspace")


def format_pulse(pulse: Pulse) -> str:
    if isinstance(pulse, GlobalLevelSwap):
        return f"SW {pulse.x} {pulse.y}"
    if pulse.is_basis and abs(pulse.angle) == HALF_PI:
        return f"LX {pulse.control} {pulse.u} {pulse.v} {'+' if pulse.angle > 0 else '-'}"
    if pulse.control != POINTER_CONTROL:
        raise FormatError(f"no text form for a control-{pulse.control} pulse at this angle")
    parts = [repr(pulse.angle)]
    for w in (pulse.u, pulse.v):
        for c in _qubit_components(w):
            parts.extend((repr(c.real), repr(c.imag)))
    return "ROT " + " ".join(parts)


def format_program(
    program: PulseProgram,
    header: Sequence[str] = (),
    labels: Sequence[Tuple[int, str]] = (),
) -> str:
    """Program text; *header* lines and (pulse index, label) pairs become comments."""
    lines = [f"# {h}" for h in header]
    marks = {}
    for index, label in labels:
        marks.setdefault(index, []).append(label)
    for index, pulse in enumerate(program.pulses):
        lines.extend(f"# {label}" for label in marks.get(index, ()))
        lines.append(format_pulse(pulse))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------

def _parse_op(tokens, lineno: int) -> Operation:
    col, head = tokens[0]
    keyword = head.lower()
    if keyword == "g":
        _arity(tokens, 10, lineno)
        q = _int(tokens[1], lineno)
        re = [_real(tok, lineno) for tok in tokens[2:]]
        matrix = np.array(
            [[complex(re[0], re[1]), complex(re[2], re[3])],
             [complex(re[4], re[5]), complex(re[6], re[7])]]
        )
        try:
            return Gate1(q, matrix)
        except InvalidInput as exc:
            raise ParseError(str(exc), lineno, col) from exc
    if keyword == "cx":
        _arity(tokens, 3, lineno)
        return CNOT(_int(tokens[1], lineno), _int(tokens[2], lineno))
    if keyword == "measure":
        _arity(tokens, 2, lineno)
        return Measure(_int(tokens[1], lineno))
    raise ParseError(f"unknown circuit keyword {head!r}", lineno, col)


def parse_circuit(text: str) -> LogicalCircuit:
    """Parse the circuit text format; ``qubits`` must come first."""
    lines = list(_tokenize(text))
    if not lines:
        raise ParseError("empty circuit: expected 'qubits <n>'", 1, 1)
    lineno, tokens = lines[0]
    if tokens[0][1].lower() != "qubits":
        raise ParseError("circuit must start with 'qubits <n>'", lineno, tokens[0][0])
    _arity(tokens, 2, lineno)
    n = _int(tokens[1], lineno)
    ops = [_parse_op(tokens, lineno) for lineno, tokens in lines[1:]]
    return LogicalCircuit(n, tuple(ops))


def parse_site_amplitudes(text: str, mode: SchemeMode = SIX_LEVEL) -> List[complex]:
    """``"0=0.8,5=0.6"`` -> per-level amplitude list for a product state."""
    amps = [0j] * mode.levels
    for col, item in _items(text):
        level_text, sep, amp_text = item.partition("=")
        if not sep:
            raise ParseError(f"expected <level>=<amplitude>, got {item!r}", 1, col)
        try:
            level = int(level_text)
            amp = complex(amp_text.replace(" ", ""))
        except ValueError:
            raise ParseError(f"bad site amplitude {item!r}", 1, col) from None
        if not cmath.isfinite(amp):
            raise ParseError(f"site amplitude must be finite, got {item!r}", 1, col)
        if not 0 <= level < mode.levels:
            raise ParseError(f"level {level} out of range for {mode.label}", 1, col)
        amps[level] = amp
    return amps


def _items(text: str) -> Iterable[Tuple[int, str]]:
    col = 0
    for item in text.split(","):
        yield col + 1, item.strip()
        col += len(item) + 1
