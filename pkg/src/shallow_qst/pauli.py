"""Signed Pauli strings in symplectic (bitmask) form.

A Pauli string on ``n`` qubits is stored as two integer bitmasks ``x`` and
``z`` plus a power of ``i``.  Qubit 0 is the leftmost tensor factor and maps
to the most significant bit of the masks, which is also the convention used
for computational-basis indices and measurement outcomes throughout the
package.  The operator represented is::

    i**phase * sigma_0 (x) sigma_1 (x) ... (x) sigma_{n-1}

with ``sigma_q`` in {I, X, Y, Z} selected by the bits ``(x_q, z_q)``.
Hermitian Pauli strings have ``phase`` in {0, 2}.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

DENSE_LIMIT = 10

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}


class PauliError(ValueError):
    pass


def popcount(a):
    """Number of set bits, for Python ints or numpy integer arrays."""
    if isinstance(a, (int, np.integer)):
        return int(a).bit_count()
    return np.bitwise_count(np.asarray(a)).astype(np.int64)


def qubit_bit(n: int, q: int) -> int:
    """Mask with only qubit ``q`` set (qubit 0 is the MSB)."""
    return 1 << (n - 1 - q)


def mask_of(n: int, qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        if not 0 <= q < n:
            raise PauliError(f"qubit index {q} out of range for n={n}")
        m |= qubit_bit(n, q)
    return m


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise PauliError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full or self.x < 0 or self.z < 0:
            raise PauliError("bitmask wider than n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse text such as ``"-XZIY"`` (optional leading sign)."""
        phase = 0
        if label.startswith("-"):
            phase, label = 2, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        if not label:
            raise PauliError("empty Pauli label")
        n = len(label)
        x = z = 0
        for q, ch in enumerate(label.upper()):
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise PauliError(f"bad Pauli letter {ch!r}") from None
            if bx:
                x |= qubit_bit(n, q)
            if bz:
                z |= qubit_bit(n, q)
        return cls(n, x, z, phase)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        bx, bz = _BITS[letter.upper()]
        b = qubit_bit(n, qubit)
        return cls(n, b if bx else 0, b if bz else 0)

    @classmethod
    def from_bits(cls, x_bits: Sequence[int], z_bits: Sequence[int], sign: int = 1) -> "PauliString":
        if len(x_bits) != len(z_bits):
            raise PauliError("x_bits and z_bits differ in length")
        n = len(x_bits)
        x = mask_of(n, [q for q, b in enumerate(x_bits) if b])
        z = mask_of(n, [q for q, b in enumerate(z_bits) if b])
        if sign not in (1, -1):
            raise PauliError("sign must be +1 or -1")
        return cls(n, x, z, 0 if sign == 1 else 2)

    # -- views --------------------------------------------------------------
    @property
    def x_bits(self) -> np.ndarray:
        return np.array([(self.x >> (self.n_qubits - 1 - q)) & 1 for q in range(self.n_qubits)], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([(self.z >> (self.n_qubits - 1 - q)) & 1 for q in range(self.n_qubits)], dtype=np.uint8)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise PauliError(f"non-Hermitian Pauli (phase i^{self.phase}) has no real sign")
        return 1 if self.phase == 0 else -1

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return popcount(self.support)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z, self.phase + 2)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[self.phase]
        letters = "".join(
            _LETTERS[((self.x >> (self.n_qubits - 1 - q)) & 1, (self.z >> (self.n_qubits - 1 - q)) & 1)]
            for q in range(self.n_qubits)
        )
        return prefix + letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def _check_same(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise PauliError(f"length mismatch: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product ``a @ b`` with the full power of ``i`` tracked."""
    _check_same(a, b)
    # sigma(x, z) = i^{|x&z|} X^x Z^z and Z^za X^xb = (-1)^{|za&xb|} X^xb Z^za
    pa = a.phase + popcount(a.x & a.z)
    pb = b.phase + popcount(b.x & b.z)
    x, z = a.x ^ b.x, a.z ^ b.z
    p = pa + pb + 2 * popcount(a.z & b.x) - popcount(x & z)
    return PauliString(a.n_qubits, x, z, p)


def multiply_hermitian(a: PauliString, b: PauliString) -> PauliString:
    """Product restricted to Hermitian results; raises on anticommuting pairs."""
    out = multiply(a, b)
    if not out.is_hermitian:
        raise PauliError(f"product of {a} and {b} is not Hermitian")
    return out


def symplectic_product(a: PauliString, b: PauliString) -> int:
    _check_same(a, b)
    return popcount((a.x & b.z) ^ (a.z & b.x)) & 1


def commutes(a: PauliString, b: PauliString) -> bool:
    return symplectic_product(a, b) == 0


def is_z_string(p: PauliString) -> bool:
    return p.x == 0


def restrict(p: PauliString, qubits: Sequence[int]) -> PauliString:
    """Sub-Pauli on ``qubits`` (in the given order), sign dropped."""
    qubits = list(qubits)
    if not qubits:
        raise PauliError("empty qubit set")
    k = len(qubits)
    x = z = 0
    for j, q in enumerate(qubits):
        if not 0 <= q < p.n_qubits:
            raise PauliError(f"qubit index {q} out of range for n={p.n_qubits}")
        b = qubit_bit(p.n_qubits, q)
        if p.x & b:
            x |= qubit_bit(k, j)
        if p.z & b:
            z |= qubit_bit(k, j)
    return PauliString(k, x, z)


@dataclass(frozen=True)
class BlockPartition:
    """Blocks of ``k`` consecutive qubits, optionally staggered by ``offset``.

    ``offset=0`` gives the aligned layer ``{0..k-1}, {k..2k-1}, ...``.
    ``offset=k//2`` gives the staggered layer; with ``periodic=True`` the
    last block wraps around to ``{n-k/2..n-1, 0..k/2-1}``, otherwise the two
    edge halves are separate blocks of size ``k/2``.
    """

    n_qubits: int
    k: int
    offset: int = 0
    periodic: bool = True

    def __post_init__(self):
        if self.k < 1 or self.n_qubits % self.k:
            raise PauliError(f"block size k={self.k} must divide n={self.n_qubits}")
        if self.offset not in (0, self.k // 2) or (self.offset and self.k % 2):
            raise PauliError("offset must be 0 or k/2 with k even")

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        n, k, h = self.n_qubits, self.k, self.offset
        if h == 0:
            return tuple(tuple(range(s, s + k)) for s in range(0, n, k))
        inner = tuple(tuple(range(s, s + k)) for s in range(h, n - h, k))
        if self.periodic:
            return inner + (tuple(range(n - h, n)) + tuple(range(h)),)
        return (tuple(range(h)),) + inner + (tuple(range(n - h, n)),)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(mask_of(self.n_qubits, b) for b in self.blocks)


def block_weight(p: PauliString, part: BlockPartition) -> int:
    """Number of blocks of ``part`` on which ``p`` acts nontrivially."""
    if part.n_qubits != p.n_qubits:
        raise PauliError("partition does not match Pauli length")
    s = p.support
    return sum(1 for m in part.masks if s & m)


def block_pattern(p: PauliString, part: BlockPartition) -> tuple[int, ...]:
    if part.n_qubits != p.n_qubits:
        raise PauliError("partition does not match Pauli length")
    s = p.support
    return tuple(int(bool(s & m)) for m in part.masks)


def all_paulis(n: int) -> Iterator[PauliString]:
    """All 4**n unsigned Pauli strings, identity first."""
    for x in range(1 << n):
        for z in range(1 << n):
            yield PauliString(n, x, z)


# -- dense bridge ------------------------------------------------------------

def _check_dense(n: int, dense_limit: int | None) -> None:
    limit = DENSE_LIMIT if dense_limit is None else dense_limit
    if n > limit:
        raise PauliError(f"n={n} exceeds dense limit {limit}")


def to_dense(p: PauliString, dense_limit: int | None = None) -> np.ndarray:
    _check_dense(p.n_qubits, dense_limit)
    coeff = 1j ** p.phase
    return pauli_sum_dense(p.n_qubits, np.array([p.x]), np.array([p.z]), np.array([coeff]))


def pauli_sum_dense(n: int, xs, zs, coeffs) -> np.ndarray:
    """Dense matrix of ``sum_j coeffs[j] * sigma(xs[j], zs[j])``.

    ``sigma(x, z)`` is the Hermitian Pauli with those bits (sign +1), whose
    entries are ``sigma[j ^ x, j] = i**|x & z| * (-1)**|z & j|``.
    """
    d = 1 << n
    xs = np.asarray(xs, dtype=np.int64)
    zs = np.asarray(zs, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=complex)
    js = np.arange(d, dtype=np.int64)
    rows = xs[:, None] ^ js[None, :]
    signs = 1 - 2 * (popcount(zs[:, None] & js[None, :]) & 1)
    ipow = (1j) ** (popcount(xs & zs) % 4)
    vals = (coeffs * ipow)[:, None] * signs
    flat = (rows * d + js[None, :]).ravel()
    re = np.bincount(flat, weights=vals.real.ravel(), minlength=d * d)
    im = np.bincount(flat, weights=vals.imag.ravel(), minlength=d * d)
    return (re + 1j * im).reshape(d, d)


def pauli_expectations(rho: np.ndarray, xs, zs) -> np.ndarray:
    """Real parts of ``Tr(rho sigma(x, z))`` for arrays of Pauli masks."""
    d = rho.shape[0]
    xs = np.asarray(xs, dtype=np.int64)
    zs = np.asarray(zs, dtype=np.int64)
    js = np.arange(d, dtype=np.int64)
    rows = xs[:, None] ^ js[None, :]
    signs = 1 - 2 * (popcount(zs[:, None] & js[None, :]) & 1)
    ipow = (1j) ** (popcount(xs & zs) % 4)
    # Tr(rho P) = sum_j rho[j, j^x] P[j^x, j]
    vals = rho[js[None, :], rows] * signs
    return (ipow * vals.sum(axis=1)).real


def pauli_coefficients(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expansion ``rho = sum_P c_P P / d`` over all 4**n Paulis.

    Returns ``(xs, zs, c)`` with ``c[j] = Tr(rho P_j)``.
    """
    d = rho.shape[0]
    xs, zs = np.divmod(np.arange(d * d, dtype=np.int64), d)
    return xs, zs, pauli_expectations(rho, xs, zs)
