"""
Dense verification oracle.

Assembles the next-neighbour Hamiltonian of a controlled exchange as a
sparse d^m x d^m matrix, term by term, and applies e^{iHt} with a generic
matrix exponential.  Nothing here uses the per-site activation rule of
:mod:`tiqca.pulses`, so the two paths can check each other.
"""

from __future__ import annotations

import logging
import math
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import InvalidConfig, InvalidPulse, OracleTooLarge
from .lattice import DENSE_LIMIT, DenseState, LatticeConfig, basis_digits
from .pulses import ControlledExchange, GlobalLevelSwap, Pulse, embed_component

logger = logging.getLogger(__name__)


def _check_size(config: LatticeConfig) -> int:
    size = config.levels**config.m
    if size > DENSE_LIMIT:
        raise OracleTooLarge(f"{config.levels}**{config.m} = {size} exceeds {DENSE_LIMIT}")
    return size


def _on_site(op: np.ndarray, site: int, config: LatticeConfig) -> sp.csr_matrix:
    d, m = config.levels, config.m
    left = sp.identity(d**site, dtype=np.complex128, format="csr")
    right = sp.identity(d ** (m - site - 1), dtype=np.complex128, format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def hamiltonian(pulse: ControlledExchange, config: LatticeConfig) -> sp.csr_matrix:
    """H = sum over bonds (i, j) of |x><x|_i (|a><b| + |b><a|)_j plus the mirrored term."""
    _check_size(config)
    pulse.validate(config.mode)
    d = config.levels
    a = embed_component(pulse.u, d)
    b = embed_component(pulse.v, d)
    x = embed_component(pulse.control, d)
    projector = np.outer(x, x.conj())
    exchange = np.outer(a, b.conj()) + np.outer(b, a.conj())

    size = d**config.m
    ham = sp.csr_matrix((size, size), dtype=np.complex128)
    for i, j in config.bonds():
        ham = ham + _on_site(projector, i, config) @ _on_site(exchange, j, config)
        ham = ham + _on_site(exchange, i, config) @ _on_site(projector, j, config)
    return ham.tocsr()


def _permute_levels(dense: DenseState, new_digits: np.ndarray) -> DenseState:
    config = dense.config
    powers = config.levels ** np.arange(config.m - 1, -1, -1, dtype=np.int64)
    target = new_digits @ powers
    vec = np.zeros_like(dense.vector)
    vec[target] = dense.vector
    return DenseState(config, vec)


def apply_pulse_dense(dense: DenseState, pulse: Pulse) -> DenseState:
    """e^{iHt} on a dense vector via ``expm_multiply``."""
    config = dense.config
    _check_size(config)
    pulse.validate(config.mode)
    if isinstance(pulse, GlobalLevelSwap):
        digits = basis_digits(config.m, config.levels)
        lookup = np.arange(config.levels)
        lookup[pulse.x], lookup[pulse.y] = pulse.y, pulse.x
        return _permute_levels(dense, lookup[digits])

    ham = hamiltonian(pulse, config)
    vec = expm_multiply((1j * pulse.angle) * ham, dense.vector)
    logger.debug("dense pulse on %d amplitudes, H nnz=%d", vec.size, ham.nnz)
    return DenseState(config, vec)


# ---------------------------------------------------------------------------
# Staggered two-layer form
# ---------------------------------------------------------------------------

def _layers(config: LatticeConfig) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    if config.periodic and config.m % 2:
        raise InvalidConfig("staggered layers need open boundary or an even periodic lattice")
    bonds = config.bonds()
    return [b for b in bonds if b[0] % 2 == 0], [b for b in bonds if b[0] % 2 == 1]


def apply_staggered(dense: DenseState, pulse: ControlledExchange) -> DenseState:
    """Phase-free pairwise form: |x a> <-> |x b> on every even bond, then every odd bond.

    Agrees with :func:`apply_pulse_dense` on basis inputs up to a phase per
    basis string (i per single activation, -1 per double activation).
    """
    if not isinstance(pulse, ControlledExchange) or not pulse.is_basis:
        raise InvalidPulse("staggered form needs a basis-level controlled exchange")
    if not math.isclose(abs(pulse.angle), math.pi / 2, abs_tol=1e-12):
        raise InvalidPulse("staggered form is the pi/2 exchange only")
    config = dense.config
    pulse.validate(config.mode)
    x, a, b = pulse.control, pulse.u, pulse.v

    digits = np.array(basis_digits(config.m, config.levels))
    for layer in _layers(config):
        for i, j in layer:
            si, sj = digits[:, i].copy(), digits[:, j].copy()
            right = (si == x) & ((sj == a) | (sj == b))
            left = (sj == x) & ((si == a) | (si == b))
            digits[right, j] = a + b - sj[right]
            digits[left, i] = a + b - si[left]
    return _permute_levels(dense, digits)
