"""
Lattice configuration space and quantum states.

A lattice of ``m`` sites carries one ``levels``-level system per site.
Classical configurations (basis strings) are tuples of level ids, site 0
first.  The canonical quantum state is a sparse map from basis strings to
complex amplitudes; dense vectors only exist as verification oracles and
use site-major big-endian indexing (site 0 is the most significant digit).
"""

from __future__ import annotations

import cmath
import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ConfigMismatch,
    InvalidConfig,
    InvalidLevel,
    ModeMismatch,
    NormDriftError,
    NotNormalized,
    OracleTooLarge,
    SupportOverflow,
)

logger = logging.getLogger(__name__)

LevelId = int
BasisString = Tuple[int, ...]

PRUNE_CUTOFF = 1e-14
NORM_TOLERANCE = 1e-10
DENSE_NORM_TOLERANCE = 1e-12
DENSE_LIMIT = 10**7
SUPPORT_LIMIT = 10**7

# levels -> wall level
_WALL_LEVELS: Dict[int, int] = {6: 5, 5: 1}


# ---------------------------------------------------------------------------
# Scheme mode and lattice configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeMode:
    """Number of internal levels per site and the level used as wall."""
    levels: int = 6
    wall_level: int = 5

    def __post_init__(self):
        if self.levels not in _WALL_LEVELS:
            raise InvalidConfig(f"levels must be 5 or 6, got {self.levels}")
        if self.wall_level != _WALL_LEVELS[self.levels]:
            raise ModeMismatch(
                f"{self.levels}-level mode uses wall level {_WALL_LEVELS[self.levels]}, "
                f"got {self.wall_level}"
            )

    @classmethod
    def from_levels(cls, levels: int) -> "SchemeMode":
        if levels not in _WALL_LEVELS:
            raise InvalidConfig(f"levels must be 5 or 6, got {levels}")
        return cls(levels, _WALL_LEVELS[levels])

    def check_level(self, x: int) -> int:
        if not 0 <= x < self.levels:
            raise InvalidLevel(f"level {x} out of range for {self.levels}-level mode")
        return int(x)

    @property
    def label(self) -> str:
        return f"{self.levels}-level"


SIX_LEVEL = SchemeMode(6, 5)
FIVE_LEVEL = SchemeMode(5, 1)


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class LatticeConfig:
    """Site count, boundary condition and scheme mode.

    Under periodic boundary site m-1 neighbours site 0; under open
    boundary the end sites have a single neighbour.
    """
    m: int
    boundary: Boundary = Boundary.PERIODIC
    mode: SchemeMode = SIX_LEVEL

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)):
            raise InvalidConfig(f"site count must be an integer, got {self.m!r}")
        if self.m < 2:
            raise InvalidConfig(f"site count must be >= 2, got {self.m}")
        try:
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        except ValueError as exc:
            raise InvalidConfig(f"unknown boundary {self.boundary!r}") from exc
        if not isinstance(self.mode, SchemeMode):
            raise InvalidConfig(f"mode must be a SchemeMode, got {self.mode!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def levels(self) -> int:
        return self.mode.levels

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    def neighbors(self, i: int) -> Tuple[int, ...]:
        """Neighbour sites of *i*; periodic m=2 lists site 1-i twice."""
        m = self.m
        if self.periodic:
            return ((i - 1) % m, (i + 1) % m)
        return tuple(j for j in (i - 1, i + 1) if 0 <= j < m)

    @cached_property
    def neighbor_table(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.neighbors(i) for i in range(self.m))

    def bonds(self) -> List[Tuple[int, int]]:
        """Next-neighbour pairs (i, i+1), including the wrap bond when periodic."""
        if self.periodic:
            return [(i, (i + 1) % self.m) for i in range(self.m)]
        return [(i, i + 1) for i in range(self.m - 1)]

    def distance(self, i: int, j: int) -> int:
        d = abs(i - j)
        return min(d, self.m - d) if self.periodic else d

    def validate_basis(self, s: Sequence[int]) -> BasisString:
        key = tuple(int(x) for x in s)
        if len(key) != self.m:
            raise InvalidConfig(f"basis string has {len(key)} sites, lattice has {self.m}")
        for x in key:
            self.mode.check_level(x)
        return key


# ---------------------------------------------------------------------------
# Basis strings
# ---------------------------------------------------------------------------

def parse_basis(text: str, mode: SchemeMode = SIX_LEVEL) -> BasisString:
    """Digit string (site 0 leftmost) -> basis string."""
    text = text.strip()
    if not text:
        raise InvalidConfig("empty basis string")
    if any(ch not in "0123456789" for ch in text):
        raise InvalidLevel(f"basis string must contain digits only: {text!r}")
    return tuple(mode.check_level(int(ch)) for ch in text)


def format_basis(s: Iterable[int]) -> str:
    return "".join(str(x) for x in s)


def basis_index(s: Sequence[int], levels: int) -> int:
    """Dense index of *s*: sum_i s[i] * d**(m-1-i)."""
    index = 0
    for x in s:
        index = index * levels + int(x)
    return index


@lru_cache(maxsize=16)
def basis_digits(m: int, levels: int) -> np.ndarray:
    """(d**m, m) array of the digits of every dense index."""
    size = levels**m
    if size > DENSE_LIMIT:
        raise OracleTooLarge(f"{levels}**{m} = {size} exceeds the dense limit {DENSE_LIMIT}")
    idx = np.arange(size, dtype=np.int64)
    powers = levels ** np.arange(m - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, np.newaxis] // powers[np.newaxis, :]) % levels
    digits.setflags(write=False)
    return digits


# ---------------------------------------------------------------------------
# Sparse state
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SparseState:
    """Immutable map basis string -> complex amplitude.

    Build through :meth:`from_amplitudes`, which prunes entries below
    ``PRUNE_CUTOFF`` (without renormalising) and orders keys.
    """
    config: LatticeConfig
    amplitudes: Mapping[BasisString, complex] = field(default_factory=dict)

    @classmethod
    def from_amplitudes(
        cls,
        config: LatticeConfig,
        amplitudes: Mapping[BasisString, complex],
        check_keys: bool = True,
    ) -> "SparseState":
        kept: Dict[BasisString, complex] = {}
        for key in sorted(amplitudes):
            amp = complex(amplitudes[key])
            if abs(amp) < PRUNE_CUTOFF:
                continue
            if check_keys:
                key = config.validate_basis(key)
            kept[key] = amp
        return cls(config, MappingProxyType(kept))

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __iter__(self) -> Iterator[BasisString]:
        return iter(self.amplitudes)

    def items(self):
        return self.amplitudes.items()

    @property
    def support(self) -> Tuple[BasisString, ...]:
        return tuple(self.amplitudes)

    def amplitude(self, s: Union[str, Sequence[int]]) -> complex:
        if isinstance(s, str):
            s = parse_basis(s, self.config.mode)
        return self.amplitudes.get(tuple(s), 0j)

    def probability(self, s: Union[str, Sequence[int]]) -> float:
        return abs(self.amplitude(s)) ** 2

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def norm_drift(self) -> float:
        return abs(self.norm_squared() - 1.0)

    def check_norm(self, tolerance: float = NORM_TOLERANCE) -> "SparseState":
        drift = self.norm_drift()
        if not drift <= tolerance:
            raise NormDriftError(f"norm drift {drift:.3e} exceeds {tolerance:.1e}")
        return self

    def ranked(self) -> List[Tuple[BasisString, complex]]:
        """Support entries by decreasing probability, ties by basis string."""
        return sorted(self.amplitudes.items(), key=lambda kv: (-abs(kv[1]) ** 2, kv[0]))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def make_basis_state(config: LatticeConfig, s: Union[str, Sequence[int]]) -> SparseState:
    """Single basis string with amplitude 1."""
    if isinstance(s, str):
        s = parse_basis(s, config.mode)
    key = config.validate_basis(s)
    return SparseState(config, MappingProxyType({key: 1.0 + 0j}))


def make_product_state(config: LatticeConfig, site_amps: Sequence[complex]) -> SparseState:
    """m-fold tensor power of one site state given as per-level amplitudes."""
    amps = [complex(a) for a in site_amps]
    if len(amps) > config.levels:
        raise InvalidLevel(f"{len(amps)} site amplitudes for {config.levels}-level sites")
    if not all(cmath.isfinite(a) for a in amps):
        raise NotNormalized(f"site amplitudes must be finite: {amps}")
    norm = math.fsum(abs(a) ** 2 for a in amps)
    if not abs(norm - 1.0) <= DENSE_NORM_TOLERANCE:
        raise NotNormalized(f"site amplitudes have squared norm {norm!r}")
    nonzero = [(level, a) for level, a in enumerate(amps) if a != 0]
    size = len(nonzero) ** config.m
    if size > SUPPORT_LIMIT:
        raise SupportOverflow(f"product support {size} exceeds {SUPPORT_LIMIT}")

    table: Dict[BasisString, complex] = {}
    for choice in itertools.product(nonzero, repeat=config.m):
        key = tuple(level for level, _ in choice)
        table[key] = math.prod(a for _, a in choice)
    logger.debug("Product state on %d sites: %d support entries", config.m, len(table))
    return SparseState.from_amplitudes(config, table, check_keys=False)


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------

def expectation_level_count(state: SparseState, x: int) -> float:
    """<M_x>: expected number of sites found in level *x*."""
    state.config.mode.check_level(x)
    return math.fsum(abs(a) ** 2 * s.count(x) for s, a in state.items())


def level_populations(state: SparseState) -> np.ndarray:
    """<M_x> for every level x, as an array indexed by level."""
    pops = np.zeros(state.config.levels, dtype=np.float64)
    for s, a in state.items():
        p = abs(a) ** 2
        for x in s:
            pops[x] += p
    return pops


def _check_same_config(a: SparseState, b: SparseState) -> None:
    if a.config != b.config:
        raise ConfigMismatch(f"{a.config} != {b.config}")


def inner_product(a: SparseState, b: SparseState) -> complex:
    """<a|b> over the shared support."""
    _check_same_config(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for s in small:
        if s in large.amplitudes:
            total += a.amplitudes[s].conjugate() * b.amplitudes[s]
    return total


def level_count_matrix_element(a: SparseState, b: SparseState, x: int) -> complex:
    """<a|M_x|b>; M_x is diagonal in the basis."""
    _check_same_config(a, b)
    a.config.mode.check_level(x)
    total = 0j
    for s, amp in a.items():
        other = b.amplitudes.get(s)
        if other is not None:
            total += amp.conjugate() * other * s.count(x)
    return total


# ---------------------------------------------------------------------------
# Symmetry helpers
# ---------------------------------------------------------------------------

def reflect_state(state: SparseState) -> SparseState:
    """Mirror the lattice: site i -> site m-1-i."""
    table = {s[::-1]: a for s, a in state.items()}
    return SparseState.from_amplitudes(state.config, table, check_keys=False)


def shift_state(state: SparseState, k: int = 1) -> SparseState:
    """Cyclic translation by *k* sites to the right."""
    m = state.config.m
    k %= m
    table = {s[m - k:] + s[:m - k]: a for s, a in state.items()}
    return SparseState.from_amplitudes(state.config, table, check_keys=False)


def reduced_density(
    state: SparseState, sites: Sequence[int]
) -> Dict[Tuple[BasisString, BasisString], complex]:
    """Reduced density matrix on *sites*, as {(row, col): entry}."""
    sites = tuple(sites)
    rest = tuple(i for i in range(state.config.m) if i not in set(sites))
    groups: Dict[BasisString, List[Tuple[BasisString, complex]]] = defaultdict(list)
    for s, a in state.items():
        groups[tuple(s[i] for i in rest)].append((tuple(s[i] for i in sites), a))

    rho: Dict[Tuple[BasisString, BasisString], complex] = defaultdict(complex)
    for members in groups.values():
        for row, a in members:
            for col, b in members:
                rho[(row, col)] += a * b.conjugate()
    return {key: val for key, val in rho.items() if abs(val) >= PRUNE_CUTOFF}


# ---------------------------------------------------------------------------
# Dense state (verification oracle representation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DenseState:
    """Full d**m amplitude vector, site 0 most significant."""
    config: LatticeConfig
    vector: np.ndarray

    def __post_init__(self):
        size = self.config.levels**self.config.m
        if size > DENSE_LIMIT:
            raise OracleTooLarge(f"dense dimension {size} exceeds {DENSE_LIMIT}")
        vec = np.asarray(self.vector, dtype=np.complex128)
        if vec.shape != (size,):
            raise InvalidConfig(f"dense vector shape {vec.shape}, expected ({size},)")
        if not np.all(np.isfinite(vec)):
            raise NotNormalized("dense vector has non-finite amplitudes")
        norm = float(np.vdot(vec, vec).real)
        if not abs(norm - 1.0) <= DENSE_NORM_TOLERANCE:
            raise NotNormalized(f"dense vector has squared norm {norm!r}")
        object.__setattr__(self, "vector", vec)


def to_dense(state: SparseState) -> DenseState:
    config = state.config
    size = config.levels**config.m
    if size > DENSE_LIMIT:
        raise OracleTooLarge(f"dense dimension {size} exceeds {DENSE_LIMIT}")
    vec = np.zeros(size, dtype=np.complex128)
    for s, a in state.items():
        vec[basis_index(s, config.levels)] = a
    return DenseState(config, vec)


def from_dense(dense: DenseState) -> SparseState:
    config = dense.config
    digits = basis_digits(config.m, config.levels)
    nz = np.flatnonzero(np.abs(dense.vector) >= PRUNE_CUTOFF)
    table = {tuple(int(x) for x in digits[i]): complex(dense.vector[i]) for i in nz}
    return SparseState.from_amplitudes(config, table, check_keys=False)
