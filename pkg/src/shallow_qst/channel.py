"""Shadow-channel eigenvalues ``m_P`` and Pauli correlations ``tau(P, Q)``.

Exact values are kept as :class:`fractions.Fraction` and converted to floats
only where they enter dense linear algebra.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clifford import (
    EnsembleKind,
    EnsembleSpec,
    _conjugate_masks,
    sample_ensemble,
)
from .pauli import (
    BlockPartition,
    PauliError,
    PauliString,
    block_pattern,
    block_weight,
    commutes,
    restrict,
)


class NonInvertibleChannel(ZeroDivisionError):
    pass


def m_block(p: PauliString, k: int) -> Fraction:
    """``(2^k + 1)^(-w)`` with ``w`` the number of ``k``-blocks touched by ``p``."""
    w = block_weight(p, BlockPartition(p.n_qubits, k))
    return Fraction(1, ((1 << k) + 1) ** w)


# -- two-layer ensembles ---------------------------------------------------------

def _pbc_transfer(k: int) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Transfer matrices over the state "right half of the U1 block is nontrivial".

    For a touched U1 block the conjugated Pauli is uniform over the
    ``4^k - 1`` nontrivial block Paulis, so its (left, right) half-support is
    (0,1) or (1,0) with probability ``1/(2^k+1)`` each and (1,1) otherwise.
    Each staggered U2 block (right half of block i, left half of block i+1)
    contributes ``1/(2^k+1)`` when nontrivial.
    """
    z = 1 << k
    a = Fraction(1, z + 1)
    t0 = [[Fraction(1), Fraction(0)], [a, Fraction(0)]]
    t1 = [[a * a, 2 * z * a * a], [a * a, z * a * a]]
    return t0, t1


def _matmul(a, b):
    return [[sum(a[i][l] * b[l][j] for l in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _m_pbc_transfer(pattern: tuple[int, ...], k: int) -> Fraction:
    t = _pbc_transfer(k)
    acc = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    for w in pattern:
        acc = _matmul(acc, t[w])
    return acc[0][0] + acc[1][1]


def _m_two_layer_enumerate(pattern: tuple[int, ...], first: BlockPartition, second: BlockPartition) -> Fraction:
    """Exact ``m_P`` by enumerating the half-support outcomes of every first-layer block."""
    sec_blocks = [set(b) for b in second.blocks]
    options = []
    for touched, blk in zip(pattern, first.blocks):
        pieces = []
        for j, sb in enumerate(sec_blocks):
            inter = sb.intersection(blk)
            if inter:
                pieces.append((j, len(inter)))
        if not touched:
            options.append([((), Fraction(1))])
            continue
        total = 4 ** len(blk) - 1
        opts = []
        for sel in itertools.product((0, 1), repeat=len(pieces)):
            if not any(sel):
                continue
            cnt = 1
            hit = []
            for s, (j, size) in zip(sel, pieces):
                if s:
                    cnt *= 4 ** size - 1
                    hit.append(j)
            opts.append((tuple(hit), Fraction(cnt, total)))
        options.append(opts)
    factors = [Fraction(1, (1 << len(b)) + 1) for b in second.blocks]
    out = Fraction(0)
    for combo in itertools.product(*options):
        prob = Fraction(1)
        hit: set[int] = set()
        for blocks_hit, pr in combo:
            prob *= pr
            hit.update(blocks_hit)
        for j in hit:
            prob *= factors[j]
        out += prob
    return out


def m_from_pattern(spec: EnsembleSpec, pattern: tuple[int, ...]) -> Fraction:
    """``m_P`` as a function of which first-layer blocks ``P`` touches."""
    if spec.kind in (EnsembleKind.BLOCK, EnsembleKind.MUB_PRODUCT):
        return Fraction(1, ((1 << spec.k) + 1) ** sum(pattern))
    if spec.kind is EnsembleKind.BRICKWORK_PBC:
        return _m_pbc_transfer(pattern, spec.k)
    first, second = spec.layers
    return _m_two_layer_enumerate(pattern, first, second)


def m_brickwork(p: PauliString, spec: EnsembleSpec) -> Fraction:
    if not spec.is_brickwork:
        raise PauliError(f"{spec} is not a brickwork ensemble")
    if p.n_qubits != spec.n_qubits:
        raise PauliError("Pauli length differs from ensemble size")
    return m_from_pattern(spec, block_pattern(p, spec.layers[0]))


@dataclass
class ChannelSpectrum:
    """Eigenvalues ``m_P`` of the shadow channel for one ensemble.

    ``m_P`` depends only on which first-layer blocks ``P`` touches (a block
    Clifford maps any nontrivial block Pauli to a uniformly random one), so
    values are cached per touched-block pattern.
    """

    spec: EnsembleSpec
    _exact: dict = field(default_factory=dict, repr=False)
    _table: np.ndarray | None = field(default=None, repr=False)

    @property
    def first_layer(self) -> BlockPartition:
        return self.spec.layers[0]

    def m_pattern(self, pattern: tuple[int, ...]) -> Fraction:
        if pattern not in self._exact:
            self._exact[pattern] = m_from_pattern(self.spec, pattern)
        return self._exact[pattern]

    def m(self, p: PauliString) -> Fraction:
        if p.n_qubits != self.spec.n_qubits:
            raise PauliError("Pauli length differs from ensemble size")
        return self.m_pattern(block_pattern(p, self.first_layer))

    def inverse(self, p: PauliString) -> float:
        return inverse_channel_coefficient(self, p)

    def inverse_table(self) -> np.ndarray:
        """Float ``1/m`` indexed by the touched-block bitmask (block 0 = bit 0)."""
        if self._table is None:
            nb = len(self.first_layer.blocks)
            tab = np.empty(1 << nb)
            for idx in range(1 << nb):
                m = self.m_pattern(tuple((idx >> b) & 1 for b in range(nb)))
                tab[idx] = math.inf if m == 0 else float(1 / m)
            self._table = tab
        return self._table

    def pattern_index(self, xs, zs) -> np.ndarray:
        sup = np.asarray(xs, dtype=np.int64) | np.asarray(zs, dtype=np.int64)
        idx = np.zeros_like(sup)
        for b, mask in enumerate(self.first_layer.masks):
            idx |= ((sup & mask) != 0).astype(np.int64) << b
        return idx

    def inverse_coefficients(self, xs, zs) -> np.ndarray:
        return self.inverse_table()[self.pattern_index(xs, zs)]


def inverse_channel_coefficient(spectrum: ChannelSpectrum, p: PauliString) -> float:
    m = spectrum.m(p)
    if m == 0:
        raise NonInvertibleChannel(f"m_P = 0 for {p}: channel not invertible")
    return float(1 / m)


# -- Pauli correlations --------------------------------------------------------------

def tau_full(p: PauliString, q: PauliString, n: int | None = None) -> Fraction:
    """``tau(P, Q; n)`` for the full Clifford group on ``n`` qubits."""
    n = p.n_qubits if n is None else n
    if p.n_qubits != q.n_qubits:
        raise PauliError("length mismatch")
    if not commutes(p, q):
        return Fraction(0)
    pi, qi = p.is_identity(), q.is_identity()
    d = 1 << n
    if pi and qi:
        return Fraction(1)
    if pi or qi or (p.x, p.z) == (q.x, q.z):
        return Fraction(1, d + 1)
    return Fraction(2, (d + 1) * (d + 2))


def tau_block(p: PauliString, q: PauliString, part: BlockPartition | EnsembleSpec) -> Fraction:
    """Product of per-block ``tau_full`` values over a block layer."""
    if isinstance(part, EnsembleSpec):
        if part.kind not in (EnsembleKind.BLOCK, EnsembleKind.MUB_PRODUCT):
            raise PauliError("tau_block needs a single block layer")
        part = part.layers[0]
    if p.n_qubits != part.n_qubits or q.n_qubits != part.n_qubits:
        raise PauliError("partition does not match Pauli length")
    out = Fraction(1)
    for blk in part.blocks:
        out *= tau_full(restrict(p, blk), restrict(q, blk), len(blk))
        if out == 0:
            break
    return out


# -- Monte Carlo cross-checks -----------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int

    def within(self, target: float, n_sigma: float = 5.0) -> bool:
        if self.stderr == 0:
            return abs(self.value - target) < 1e-12
        return abs(self.value - target) <= n_sigma * self.stderr


def _binomial(hits: int, samples: int) -> MonteCarloEstimate:
    f = hits / samples
    return MonteCarloEstimate(f, math.sqrt(f * (1 - f) / samples), samples)


def monte_carlo_m(spec: EnsembleSpec, p: PauliString, samples: int, rng: np.random.Generator) -> MonteCarloEstimate:
    """Empirical frequency of ``U P U^dagger`` landing in +-Z."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if p.is_identity():
        return MonteCarloEstimate(1.0, 0.0, samples)
    hits = 0
    for _ in range(samples):
        u = sample_ensemble(spec, rng)
        hits += _conjugate_masks(u, p.x, p.z, 0)[0] == 0
    return _binomial(hits, samples)


def monte_carlo_tau(spec: EnsembleSpec, p: PauliString, q: PauliString, samples: int,
                    rng: np.random.Generator) -> MonteCarloEstimate:
    """Empirical joint frequency of ``U P U^dagger`` and ``U PQ U^dagger`` in +-Z."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if p.is_identity() and q.is_identity():
        return MonteCarloEstimate(1.0, 0.0, samples)
    hits = 0
    for _ in range(samples):
        u = sample_ensemble(spec, rng)
        hits += (_conjugate_masks(u, p.x, p.z, 0)[0] == 0
                 and _conjugate_masks(u, p.x ^ q.x, p.z ^ q.z, 0)[0] == 0)
    return _binomial(hits, samples)
