"""
Ensemble statistics over random wall configurations.

Every site is independently a wall with probability epsilon.  In the
six-level scheme walls never move, so each partition is simulated on its
own: partitions long enough for the circuit take the logical fast path,
short ones run pulse by pulse on a small lattice.  The five-level scheme
has no such guarantee and is simulated on the full lattice.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .compiler import CompiledProgram, LogicalCircuit, compile_circuit, reference_simulate
from .errors import CrossCheckError, InvalidParams, InvalidScaling, ScaleOverflow
from .lattice import (
    SIX_LEVEL,
    BasisString,
    Boundary,
    LatticeConfig,
    SchemeMode,
    SparseState,
    level_populations,
    make_basis_state,
    make_product_state,
)
from .macros import MacroName, create_pointers, macro_program
from .pulses import PulseProgram, apply_program

logger = logging.getLogger(__name__)

PURE_MIXED_LIMIT = 12
CROSSCHECK_TOLERANCE = 1e-9
LEAKAGE_THRESHOLD = 1e-9


# ---------------------------------------------------------------------------
# Parameters and seeding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleParams:
    """Monte Carlo run parameters.

    ``pulse_cap`` bounds the length of short partitions simulated pulse by
    pulse; ``crosscheck`` is how many working partition lengths are also
    run pulse by pulse to confirm the fast path; ``full_lattice_cap``
    bounds m in five-level mode.
    """
    m: int
    epsilon: float
    n: int
    trials: int = 1
    master_seed: int = 0
    mode: SchemeMode = SIX_LEVEL
    pulse_cap: int = 16
    crosscheck: int = 4
    full_lattice_cap: int = 16

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidParams(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.n < 1:
            raise InvalidParams(f"n must be >= 1, got {self.n}")
        if self.trials < 1:
            raise InvalidParams(f"trials must be >= 1, got {self.trials}")
        if self.m < 2 * self.n + 6:
            raise InvalidParams(f"m must be >= 2n+6 = {2 * self.n + 6}, got {self.m}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidParams(
                f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}"
            )
        if self.pulse_cap < 0 or self.crosscheck < 0:
            raise InvalidParams("pulse_cap and crosscheck must be non-negative")


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, fixed by (master_seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial,)))


# ---------------------------------------------------------------------------
# Wall sampling and formulas
# ---------------------------------------------------------------------------

def _check_probability(epsilon: float) -> None:
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidParams(f"epsilon must lie in [0, 1], got {epsilon}")


def sample_walls(m: int, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean wall mask, one Bernoulli(epsilon) draw per site."""
    _check_probability(epsilon)
    return rng.random(m) < epsilon


def sample_wall_config(
    m: int, epsilon: float, rng: np.random.Generator, mode: SchemeMode = SIX_LEVEL
) -> BasisString:
    walls = sample_walls(m, epsilon, rng)
    return tuple(int(x) for x in np.where(walls, mode.wall_level, 0))


def wall_probability(s: Sequence[int], epsilon: float, mode: SchemeMode = SIX_LEVEL) -> float:
    """p_i = eps^(#walls) (1-eps)^(#zeros)."""
    walls = sum(1 for x in s if x == mode.wall_level)
    return epsilon**walls * (1.0 - epsilon) ** (len(s) - walls)


def partition_lengths(walls: np.ndarray, periodic: bool = True) -> np.ndarray:
    """Length of the run following every wall (zero for adjacent walls).

    A wall-free periodic lattice is one partition of length m; open
    boundary adds the run before the first wall.
    """
    m = walls.size
    idx = np.flatnonzero(walls)
    if idx.size == 0:
        return np.array([m], dtype=np.int64)
    if periodic:
        return np.diff(np.append(idx, idx[0] + m)) - 1
    return np.diff(np.concatenate(([-1], idx, [m]))) - 1


def expected_partitions(m: int, epsilon: float) -> float:
    return m * epsilon


def tail_probability(epsilon: float, k: int) -> float:
    """Probability that a partition has k or more sites."""
    return (1.0 - epsilon) ** k


def expected_working(m: int, epsilon: float, n: int) -> float:
    return m * epsilon * tail_probability(epsilon, 2 * n + 4)


def wilson_interval(successes: float, total: float, z: float = 3.0) -> Tuple[float, float]:
    if total <= 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    epsilon: float
    ratio: float
    working_density: float


def scaling_table(n_values: Sequence[int]) -> List[ScalingRow]:
    """Working fraction (1-1/n^2)^(2n+4) for the choice epsilon = 1/n^2."""
    rows = []
    for n in n_values:
        if n < 2:
            raise InvalidScaling(f"n must be >= 2 for epsilon = 1/n^2 < 1, got {n}")
        eps = 1.0 / (n * n)
        ratio = tail_probability(eps, 2 * n + 4)
        rows.append(ScalingRow(int(n), eps, ratio, eps * ratio))
    return rows


def scaling_csv(rows: Sequence[ScalingRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "epsilon", "ratio", "working_density"])
    for row in rows:
        writer.writerow([row.n, repr(row.epsilon), repr(row.ratio), repr(row.working_density)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class EnsembleReport:
    m: int
    epsilon: float
    n: int
    trials: int
    seed: int
    levels: int
    partitions_mean: float
    partitions_stderr: float
    working_mean: float
    working_stderr: float
    computers_mean: float
    predicted_partitions: float
    predicted_working: float
    m3_mean: float
    m3_stderr: float
    m4_mean: float
    m4_stderr: float
    m4_working_mean: Optional[float]
    m4_garbage_mean: Optional[float]
    p_one: Optional[float]
    working_fraction: float
    working_fraction_low: float
    working_fraction_high: float
    skipped_count: int
    crosschecked: int
    leakage_fraction: Optional[float] = None
    leakage_weight_mean: Optional[float] = None

    @property
    def signal_ratio(self) -> Optional[float]:
        if self.m4_working_mean is None or self.m4_garbage_mean is None:
            return None
        if self.m4_working_mean == 0:
            return None
        return self.m4_garbage_mean / self.m4_working_mean

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["signal_ratio"] = self.signal_ratio
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class _Trial:
    partitions: int = 0
    working: int = 0
    m3: float = 0.0
    m4: float = 0.0
    m4_working: float = 0.0
    m4_garbage: float = 0.0
    skipped: int = 0
    leakage: float = 0.0


def _mean_stderr(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


# ---------------------------------------------------------------------------
# Partition simulation
# ---------------------------------------------------------------------------

def run_partition(length: int, program: PulseProgram) -> Tuple[float, float]:
    """(<M_3>, <M_4>) of one partition: creation then *program*, pulse by pulse.

    The partition is embedded in a periodic lattice of length+1 sites with
    a single wall, which reproduces the neighbourhood of a real partition.
    """
    return _run_partition_cached(int(length), program)


@lru_cache(maxsize=256)
def _run_partition_cached(length: int, program: PulseProgram) -> Tuple[float, float]:
    if length == 0:
        return 0.0, 0.0
    mode = program.mode
    config = LatticeConfig(length + 1, Boundary.PERIODIC, mode)
    state = make_basis_state(config, (mode.wall_level,) + (0,) * length)
    state = apply_program(create_pointers(state), program)
    pops = level_populations(state)
    return float(pops[3]), float(pops[4])


def _crosscheck(lengths: Sequence[int], program: PulseProgram, p_one: float) -> int:
    checked = 0
    for length in lengths:
        m3, m4 = run_partition(length, program)
        if abs(m3 - 2.0) > CROSSCHECK_TOLERANCE or abs(m4 - 2.0 * p_one) > CROSSCHECK_TOLERANCE:
            raise CrossCheckError(
                f"partition of length {length}: pulse level gives M3={m3:.12g}, M4={m4:.12g}; "
                f"logical path gives M3=2, M4={2.0 * p_one:.12g}"
            )
        checked += 1
    return checked


def _six_level_trial(
    params: EnsembleParams, walls: np.ndarray, program: PulseProgram, p_one: float
) -> _Trial:
    lengths = partition_lengths(walls)
    threshold = 2 * params.n + 4
    record = _Trial(partitions=int(lengths.size))
    if not walls.any():
        return record

    working = lengths >= threshold
    record.working = int(working.sum())
    record.m4_working = 2.0 * p_one * record.working
    record.m3 = 2.0 * record.working

    short, counts = np.unique(lengths[~working], return_counts=True)
    for length, count in zip(short.tolist(), counts.tolist()):
        if length > params.pulse_cap:
            record.skipped += count
            continue
        m3, m4 = run_partition(length, program)
        record.m3 += m3 * count
        record.m4_garbage += m4 * count
    record.m4 = record.m4_working + record.m4_garbage
    return record


def _five_level_trial(
    params: EnsembleParams, walls: np.ndarray, program: PulseProgram
) -> _Trial:
    mode = params.mode
    lengths = partition_lengths(walls)
    record = _Trial(partitions=int(lengths.size))
    if walls.any():
        record.working = int((lengths >= 2 * params.n + 4).sum())

    config = LatticeConfig(params.m, Boundary.PERIODIC, mode)
    initial = tuple(int(x) for x in np.where(walls, mode.wall_level, 0))
    state = apply_program(create_pointers(make_basis_state(config, initial)), program)
    pops = level_populations(state)
    record.m3, record.m4 = float(pops[3]), float(pops[4])

    wall_sites = np.flatnonzero(walls)
    record.leakage = math.fsum(
        abs(a) ** 2 for s, a in state.items()
        if any(s[i] != mode.wall_level for i in wall_sites)
    )
    return record


def run_ensemble(
    params: EnsembleParams,
    circuit: LogicalCircuit,
    compiled: Optional[CompiledProgram] = None,
) -> EnsembleReport:
    """Monte Carlo over wall configurations for one compiled circuit."""
    if circuit.n != params.n:
        raise InvalidParams(f"circuit has {circuit.n} qubits, params say n={params.n}")
    compiled = compiled or compile_circuit(circuit, params.mode)
    program = compiled.program
    five_level = params.mode.levels == 5
    if five_level and params.m > params.full_lattice_cap:
        raise ScaleOverflow(
            f"five-level mode simulates the full lattice; m={params.m} exceeds "
            f"full_lattice_cap={params.full_lattice_cap}"
        )

    _, p_one = reference_simulate(circuit)
    p_one = p_one or 0.0
    logger.info(
        "Ensemble: m=%d eps=%g n=%d trials=%d seed=%d (%s)",
        params.m, params.epsilon, params.n, params.trials, params.master_seed, params.mode.label,
    )

    records: List[_Trial] = []
    working_lengths: set = set()
    threshold = 2 * params.n + 4
    for trial in range(params.trials):
        walls = sample_walls(params.m, params.epsilon, trial_rng(params.master_seed, trial))
        if five_level:
            record = _five_level_trial(params, walls, program)
        else:
            record = _six_level_trial(params, walls, program, p_one)
            if walls.any():
                lengths = partition_lengths(walls)
                working_lengths.update(int(x) for x in lengths[lengths >= threshold])
        logger.debug("trial %d: %s", trial, record)
        records.append(record)

    crosschecked = 0
    if not five_level and params.crosscheck:
        eligible = sorted(x for x in working_lengths if x <= params.pulse_cap)
        crosschecked = _crosscheck(eligible[:params.crosscheck], program, p_one)

    skipped = sum(r.skipped for r in records)
    if skipped:
        logger.warning(
            "%d short partitions longer than pulse_cap=%d were skipped", skipped, params.pulse_cap
        )

    partitions = _mean_stderr([r.partitions for r in records])
    working = _mean_stderr([r.working for r in records])
    m3 = _mean_stderr([r.m3 for r in records])
    m4 = _mean_stderr([r.m4 for r in records])
    total_partitions = sum(r.partitions for r in records)
    total_working = sum(r.working for r in records)
    low, high = wilson_interval(total_working, total_partitions)

    report = EnsembleReport(
        m=params.m,
        epsilon=params.epsilon,
        n=params.n,
        trials=params.trials,
        seed=params.master_seed,
        levels=params.mode.levels,
        partitions_mean=partitions[0],
        partitions_stderr=partitions[1],
        working_mean=working[0],
        working_stderr=working[1],
        computers_mean=2.0 * working[0],
        predicted_partitions=expected_partitions(params.m, params.epsilon),
        predicted_working=expected_working(params.m, params.epsilon, params.n),
        m3_mean=m3[0],
        m3_stderr=m3[1],
        m4_mean=m4[0],
        m4_stderr=m4[1],
        m4_working_mean=None if five_level else float(np.mean([r.m4_working for r in records])),
        m4_garbage_mean=None if five_level else float(np.mean([r.m4_garbage for r in records])),
        p_one=p_one if circuit.measurement is not None else None,
        working_fraction=total_working / total_partitions if total_partitions else 0.0,
        working_fraction_low=low,
        working_fraction_high=high,
        skipped_count=skipped,
        crosschecked=crosschecked,
    )
    if five_level:
        report.leakage_fraction = float(
            np.mean([r.leakage > LEAKAGE_THRESHOLD for r in records])
        )
        report.leakage_weight_mean = float(np.mean([r.leakage for r in records]))
    logger.info(
        "Ensemble done: partitions %.3f (pred %.3f), working %.3f (pred %.3f), <M4> %.6g",
        report.partitions_mean, report.predicted_partitions,
        report.working_mean, report.predicted_working, report.m4_mean,
    )
    return report


# ---------------------------------------------------------------------------
# Pure product state versus classical mixture
# ---------------------------------------------------------------------------

def _site_amplitudes(epsilon: float, mode: SchemeMode) -> List[complex]:
    amps = [0j] * mode.levels
    amps[0] = math.sqrt(1.0 - epsilon)
    amps[mode.wall_level] = math.sqrt(epsilon)
    return amps


def pure_mixed_equivalence(
    m: int,
    epsilon: float,
    program: PulseProgram,
    mode: Optional[SchemeMode] = None,
    boundary: Boundary = Boundary.PERIODIC,
) -> float:
    """Max over x of |<M_x> pure - sum_i p_i <M_x>_i|.

    The pure side evolves (sqrt(1-eps)|0> + sqrt(eps)|wall>)^m; the mixed
    side runs every wall configuration separately and weights it by p_i.
    """
    mode = mode or program.mode
    if m > PURE_MIXED_LIMIT:
        raise ScaleOverflow(f"pure/mixed check limited to m <= {PURE_MIXED_LIMIT}, got {m}")
    _check_probability(epsilon)
    config = LatticeConfig(m, boundary, mode)

    pure = apply_program(make_product_state(config, _site_amplitudes(epsilon, mode)), program)
    pure_pops = level_populations(pure)

    mixed_pops = np.zeros(mode.levels, dtype=np.float64)
    for walls in itertools.product((0, mode.wall_level), repeat=m):
        weight = wall_probability(walls, epsilon, mode)
        if weight == 0.0:
            continue
        branch = apply_program(make_basis_state(config, walls), program)
        mixed_pops += weight * level_populations(branch)

    deviation = float(np.max(np.abs(pure_pops - mixed_pops)))
    logger.debug("pure/mixed deviation m=%d eps=%g: %.3e", m, epsilon, deviation)
    return deviation


def protocol_program(
    mode: SchemeMode, compiled: Optional[CompiledProgram] = None, measure: bool = True
) -> PulseProgram:
    """Creation, then an optional compiled circuit, then optionally MEASURE_PREP."""
    parts = [macro_program(MacroName.POINTER_CREATE, mode)]
    if compiled is not None:
        parts.append(compiled.program)
    if measure and (compiled is None or compiled.measured_qubit is None):
        parts.append(macro_program(MacroName.MEASURE_PREP, mode))
    return PulseProgram.concat(parts, mode, "protocol")


def pointer_configurations(state: SparseState) -> Dict[Tuple[Tuple[int, int], ...], float]:
    """Weights q_i of the pointer configurations present in *state*.

    A configuration is the set of (site, level) pairs holding the pointer
    levels 2, 3 or 4; the weights sum to the squared norm.
    """
    weights: Dict[Tuple[Tuple[int, int], ...], float] = {}
    for s, a in state.items():
        key = tuple((i, x) for i, x in enumerate(s) if x in (2, 3, 4))
        weights[key] = weights.get(key, 0.0) + abs(a) ** 2
    return dict(sorted(weights.items()))
