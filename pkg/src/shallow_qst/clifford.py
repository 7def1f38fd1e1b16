"""Clifford tableaus, uniform sampling and the measurement ensembles.

A :class:`CliffordTableau` stores the images of the single-qubit generators
under conjugation ``P -> U P U^dagger``.  Row ``q`` is the image of ``X_q``
and row ``n + q`` the image of ``Z_q``; each row is a pair of bitmasks plus
a sign bit.  Bitmask conventions follow :mod:`shallow_qst.pauli`.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .pauli import (
    BlockPartition,
    PauliString,
    pauli_sum_dense,
    popcount,
    qubit_bit,
)


class CliffordError(ValueError):
    pass


def _sympl(ax: int, az: int, bx: int, bz: int) -> int:
    return ((ax & bz) ^ (az & bx)).bit_count() & 1


@dataclass(frozen=True, eq=False)
class CliffordTableau:
    n_qubits: int
    x_rows: tuple[int, ...]
    z_rows: tuple[int, ...]
    phase_bits: tuple[int, ...]

    def __post_init__(self):
        n = self.n_qubits
        if not (len(self.x_rows) == len(self.z_rows) == len(self.phase_bits) == 2 * n):
            raise CliffordError("tableau needs 2n rows")

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        xs = tuple(qubit_bit(n, q) for q in range(n)) + (0,) * n
        zs = (0,) * n + tuple(qubit_bit(n, q) for q in range(n))
        return cls(n, xs, zs, (0,) * (2 * n))

    @classmethod
    def from_images(cls, x_images: Sequence[PauliString], z_images: Sequence[PauliString]) -> "CliffordTableau":
        """Tableau sending ``X_q -> x_images[q]`` and ``Z_q -> z_images[q]``."""
        rows = list(x_images) + list(z_images)
        n = len(x_images)
        if len(z_images) != n or any(r.n_qubits != n for r in rows):
            raise CliffordError("images must be n Paulis on n qubits each")
        t = cls(n, tuple(r.x for r in rows), tuple(r.z for r in rows), tuple((r.sign == -1) * 1 for r in rows))
        if not t.is_symplectic():
            raise CliffordError("images do not satisfy the Pauli commutation relations")
        return t

    @classmethod
    def from_matrix(cls, symplectic_matrix, phase_bits) -> "CliffordTableau":
        s = np.asarray(symplectic_matrix, dtype=np.uint8) & 1
        nn = s.shape[0]
        if s.shape != (nn, nn) or nn % 2:
            raise CliffordError("symplectic matrix must be 2n x 2n")
        n = nn // 2
        weights = np.array([1 << (n - 1 - q) for q in range(n)], dtype=object)
        xs = tuple(int(np.dot(s[r, :n].astype(object), weights)) for r in range(nn))
        zs = tuple(int(np.dot(s[r, n:].astype(object), weights)) for r in range(nn))
        return cls(n, xs, zs, tuple(int(b) & 1 for b in phase_bits))

    # -- views --------------------------------------------------------------
    @cached_property
    def symplectic_matrix(self) -> np.ndarray:
        n = self.n_qubits
        out = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for r in range(2 * n):
            for q in range(n):
                out[r, q] = (self.x_rows[r] >> (n - 1 - q)) & 1
                out[r, n + q] = (self.z_rows[r] >> (n - 1 - q)) & 1
        out.setflags(write=False)
        return out

    def row(self, r: int) -> PauliString:
        return PauliString(self.n_qubits, self.x_rows[r], self.z_rows[r], 2 * self.phase_bits[r])

    def x_image(self, q: int) -> PauliString:
        return self.row(q)

    def z_image(self, q: int) -> PauliString:
        return self.row(self.n_qubits + q)

    def is_symplectic(self) -> bool:
        """Check ``S Lambda S^T = Lambda`` over GF(2)."""
        n, xs, zs = self.n_qubits, self.x_rows, self.z_rows
        for a in range(2 * n):
            for b in range(a, 2 * n):
                want = 1 if b == a + n and a < n else 0
                if _sympl(xs[a], zs[a], xs[b], zs[b]) != want:
                    return False
        return True

    def action_key(self) -> tuple:
        return (self.x_rows, self.z_rows, self.phase_bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordTableau):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.action_key() == other.action_key()

    def __hash__(self) -> int:
        return hash((self.n_qubits, self.action_key()))

    # -- serialization ------------------------------------------------------
    def to_text(self) -> str:
        n = self.n_qubits
        s = self.symplectic_matrix
        lines = [f"tableau n={n}"]
        for r in range(2 * n):
            lines.append("".join(map(str, s[r])) + f" {self.phase_bits[r]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CliffordTableau":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "tableau" or not head[1].startswith("n="):
            raise CliffordError(f"bad tableau header {lines[0]!r}")
        n = int(head[1][2:])
        if len(lines) != 2 * n + 1:
            raise CliffordError("wrong number of tableau rows")
        mat, ph = [], []
        for ln in lines[1:]:
            bits, p = ln.split()
            if len(bits) != 2 * n:
                raise CliffordError("wrong row width")
            mat.append([int(b) for b in bits])
            ph.append(int(p))
        return cls.from_matrix(mat, ph)

    def to_compact(self) -> str:
        """One-token encoding ``n:hexrows:phasebits`` for line-oriented files."""
        n = self.n_qubits
        width = (2 * n + 3) // 4
        rows = "".join(format((x << n) | z, f"0{width}x") for x, z in zip(self.x_rows, self.z_rows))
        return f"{n}:{rows}:{''.join(map(str, self.phase_bits))}"

    @classmethod
    def from_compact(cls, token: str) -> "CliffordTableau":
        n_s, rows, ph = token.split(":")
        n = int(n_s)
        width = (2 * n + 3) // 4
        vals = [int(rows[i:i + width], 16) for i in range(0, len(rows), width)]
        mask = (1 << n) - 1
        return cls(n, tuple(v >> n for v in vals), tuple(v & mask for v in vals), tuple(int(c) for c in ph))


# -- conjugation ---------------------------------------------------------------

def _conjugate_masks(c: CliffordTableau, x: int, z: int, phase: int) -> tuple[int, int, int]:
    n = c.n_qubits
    ax = az = 0
    ap = phase + (x & z).bit_count()
    xs, zs, ps = c.x_rows, c.z_rows, c.phase_bits
    for r in range(2 * n):
        if r < n:
            if not (x >> (n - 1 - r)) & 1:
                continue
        elif not (z >> (2 * n - 1 - r)) & 1:
            continue
        rx, rz = xs[r], zs[r]
        ap += 2 * ps[r] + (rx & rz).bit_count() + 2 * (az & rx).bit_count()
        ax ^= rx
        az ^= rz
    return ax, az, (ap - (ax & az).bit_count()) % 4


def conjugate_pauli(c: CliffordTableau, p: PauliString) -> PauliString:
    """Return ``U P U^dagger`` with its exact phase."""
    if c.n_qubits != p.n_qubits:
        raise CliffordError("dimension mismatch between tableau and Pauli")
    return PauliString(c.n_qubits, *_conjugate_masks(c, p.x, p.z, p.phase))


def conjugate_many(c: CliffordTableau, xs, zs, phases=None):
    """Vectorised conjugation of arrays of Pauli masks.

    Returns ``(xs, zs, phases)`` of the images, phases as powers of ``i`` in
    the Hermitian convention.
    """
    n = c.n_qubits
    xs = np.asarray(xs, dtype=np.int64)
    zs = np.asarray(zs, dtype=np.int64)
    ph = np.zeros_like(xs) if phases is None else np.asarray(phases, dtype=np.int64).copy()
    ax = np.zeros_like(xs)
    az = np.zeros_like(xs)
    ap = ph + popcount(xs & zs)
    for r in range(2 * n):
        q = r % n
        src = xs if r < n else zs
        sel = (src >> (n - 1 - q)) & 1
        rx, rz = c.x_rows[r], c.z_rows[r]
        gp = 2 * c.phase_bits[r] + popcount(rx & rz)
        ap = ap + sel * (gp + 2 * popcount(az & rx))
        ax = ax ^ (sel * rx)
        az = az ^ (sel * rz)
    return ax, az, (ap - popcount(ax & az)) % 4


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Tableau of ``A B``: conjugation by the result is ``a(b(P))``."""
    if a.n_qubits != b.n_qubits:
        raise CliffordError("size mismatch in compose")
    xs, zs, ps = [], [], []
    for r in range(2 * b.n_qubits):
        x, z, p = _conjugate_masks(a, b.x_rows[r], b.z_rows[r], 2 * b.phase_bits[r])
        xs.append(x)
        zs.append(z)
        ps.append(p // 2)
    return CliffordTableau(a.n_qubits, tuple(xs), tuple(zs), tuple(ps))


def inverse(c: CliffordTableau) -> CliffordTableau:
    """Inverse via ``S^-1 = Lambda S^T Lambda`` followed by a sign fix-up."""
    n = c.n_qubits
    xr, zr = c.x_rows, c.z_rows
    ixs, izs = [], []
    # row a of S^-1 reads column swap(a) of S down the swapped rows
    for a in range(2 * n):
        src = zr if a < n else xr
        shift = n - 1 - (a % n)
        ix = iz = 0
        for q in range(n):
            bit = 1 << (n - 1 - q)
            if (src[n + q] >> shift) & 1:
                ix |= bit
            if (src[q] >> shift) & 1:
                iz |= bit
        ixs.append(ix)
        izs.append(iz)
    fixed = tuple(_conjugate_masks(c, ixs[r], izs[r], 0)[2] // 2 for r in range(2 * n))
    return CliffordTableau(n, tuple(ixs), tuple(izs), fixed)


# -- GF(2) helpers -------------------------------------------------------------

def _symplectic_basis(vectors: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Symplectic Gram-Schmidt: a basis ``e1, f1, e2, f2, ...`` of the span."""
    vecs = [v for v in vectors if v[0] or v[1]]
    out: list[tuple[int, int]] = []
    while vecs:
        u = vecs.pop()
        for i, t in enumerate(vecs):
            if _sympl(*u, *t):
                break
        else:
            continue
        t = vecs.pop(i)
        out += [u, t]
        nxt = []
        for v in vecs:
            a, b = _sympl(*v, *t), _sympl(*v, *u)
            vx = v[0] ^ (u[0] if a else 0) ^ (t[0] if b else 0)
            vz = v[1] ^ (u[1] if a else 0) ^ (t[1] if b else 0)
            if vx or vz:
                nxt.append((vx, vz))
        vecs = nxt
    return out


def _combine(basis: list[tuple[int, int]], coeffs: int) -> tuple[int, int]:
    x = z = 0
    for j, (bx, bz) in enumerate(basis):
        if (coeffs >> j) & 1:
            x ^= bx
            z ^= bz
    return x, z


def random_symplectic_rows(k: int, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    """Uniform symplectic matrix on ``k`` qubits, built pair by pair.

    At step ``q`` the image of ``X_q`` is a uniform nonzero vector of the
    symplectic complement of the pairs chosen so far, and the image of
    ``Z_q`` is uniform among complement vectors pairing to 1 with it.
    """
    if k > 31:
        raise CliffordError("sampler supports k <= 31")
    cur = []
    for q in range(k):
        b = qubit_bit(k, q)
        cur += [(b, 0), (0, b)]
    xv: list[tuple[int, int]] = []
    zv: list[tuple[int, int]] = []
    for _ in range(k):
        dim = len(cur)
        v = _combine(cur, int(rng.integers(1, 1 << dim)))
        w = _combine(cur, int(rng.integers(0, 1 << dim)))
        if not _sympl(*v, *w):
            u0 = next(u for u in cur if _sympl(*v, *u))
            w = (w[0] ^ u0[0], w[1] ^ u0[1])
        xv.append(v)
        zv.append(w)
        proj = []
        for u in cur:
            a, c = _sympl(*u, *w), _sympl(*u, *v)
            proj.append((u[0] ^ (v[0] if a else 0) ^ (w[0] if c else 0), u[1] ^ (v[1] if a else 0) ^ (w[1] if c else 0)))
        cur = _symplectic_basis(proj)
    rows = xv + zv
    return [r[0] for r in rows], [r[1] for r in rows]


def random_clifford(k: int, rng: np.random.Generator) -> CliffordTableau:
    """Exactly uniform element of Cl(k) (modulo global phase)."""
    if k < 1:
        raise CliffordError("k must be positive")
    xs, zs = random_symplectic_rows(k, rng)
    phases = rng.integers(0, 2, size=2 * k)
    return CliffordTableau(k, tuple(xs), tuple(zs), tuple(int(p) for p in phases))


def enumerate_cl1() -> list[CliffordTableau]:
    """All 24 single-qubit Cliffords, identity first."""
    vecs = [(1, 0), (0, 1), (1, 1)]
    out = []
    for (ax, az), (bx, bz) in itertools.product(vecs, vecs):
        if not _sympl(ax, az, bx, bz):
            continue
        for p0, p1 in itertools.product((0, 1), repeat=2):
            out.append(CliffordTableau(1, (ax, bx), (az, bz), (p0, p1)))
    out.sort(key=lambda t: t != CliffordTableau.identity(1))
    if len({t.action_key() for t in out}) != 24:
        raise AssertionError("Cl(1) enumeration is not 24 distinct actions")
    return out


def enumerate_clifford(k: int) -> list[CliffordTableau]:
    """Every element of Cl(k) for tiny ``k`` by exhaustive pair completion."""
    if k > 2:
        raise CliffordError("exhaustive enumeration limited to k <= 2")
    full = [(x, z) for x in range(1 << k) for z in range(1 << k) if x or z]

    def extend(chosen):
        if len(chosen) == k:
            yield chosen
            return
        for v in full:
            if any(_sympl(*v, *a) or _sympl(*v, *b) for a, b in chosen):
                continue
            for w in full:
                if _sympl(*v, *w) and not any(_sympl(*w, *a) or _sympl(*w, *b) for a, b in chosen):
                    yield from extend(chosen + [(v, w)])

    out = []
    for pairs in extend([]):
        rows = [p[0] for p in pairs] + [p[1] for p in pairs]
        for ph in itertools.product((0, 1), repeat=2 * k):
            out.append(CliffordTableau(k, tuple(r[0] for r in rows), tuple(r[1] for r in rows), ph))
    return out


# -- block structure ------------------------------------------------------------

def _spread(mask: int, k: int, qubits: Sequence[int], n: int) -> int:
    out = 0
    for j, q in enumerate(qubits):
        if mask & (1 << (k - 1 - j)):
            out |= 1 << (n - 1 - q)
    return out


def embed(blocks: Sequence[tuple[CliffordTableau, Sequence[int]]], n: int) -> CliffordTableau:
    """Tensor product of block Cliffords placed on the given qubit sets."""
    ident = CliffordTableau.identity(n)
    xs, zs, ps = list(ident.x_rows), list(ident.z_rows), list(ident.phase_bits)
    used: set[int] = set()
    for c, qubits in blocks:
        qubits = list(qubits)
        k = c.n_qubits
        if len(qubits) != k:
            raise CliffordError("qubit set size differs from block size")
        if used & set(qubits) or len(set(qubits)) != k:
            raise CliffordError("overlapping qubit sets")
        if any(not 0 <= q < n for q in qubits):
            raise CliffordError("qubit index out of range")
        used |= set(qubits)
        for j, q in enumerate(qubits):
            for src, dst in ((j, q), (k + j, n + q)):
                xs[dst] = _spread(c.x_rows[src], k, qubits, n)
                zs[dst] = _spread(c.z_rows[src], k, qubits, n)
                ps[dst] = c.phase_bits[src]
    return CliffordTableau(n, tuple(xs), tuple(zs), tuple(ps))


def restrict_tableau(c: CliffordTableau, qubits: Sequence[int]) -> CliffordTableau:
    """Sub-tableau on ``qubits``; the block must not mix with the rest."""
    n = c.n_qubits
    qubits = list(qubits)
    k = len(qubits)
    inside = sum(qubit_bit(n, q) for q in qubits)
    xs, zs, ps = [], [], []
    for r in [qubits[j] for j in range(k)] + [n + qubits[j] for j in range(k)]:
        rx, rz = c.x_rows[r], c.z_rows[r]
        if (rx | rz) & ~inside:
            raise CliffordError("tableau acts outside the requested block")
        gx = gz = 0
        for j, q in enumerate(qubits):
            b = qubit_bit(n, q)
            if rx & b:
                gx |= qubit_bit(k, j)
            if rz & b:
                gz |= qubit_bit(k, j)
        xs.append(gx)
        zs.append(gz)
        ps.append(c.phase_bits[r])
    return CliffordTableau(k, tuple(xs), tuple(zs), tuple(ps))


def to_unitary(c: CliffordTableau, dense_limit: int = 8) -> np.ndarray:
    """Dense unitary realising the tableau, up to a global phase.

    Column 0 is the joint +1 eigenvector of the ``Z_q`` images; column ``j``
    is obtained by applying the ``X_q`` images selected by the bits of ``j``.
    """
    n = c.n_qubits
    if n > dense_limit:
        raise CliffordError(f"n={n} exceeds dense limit {dense_limit}")
    d = 1 << n
    rows = [c.row(r) for r in range(2 * n)]
    dense = [pauli_sum_dense(n, [p.x], [p.z], [p.sign]) for p in rows]
    proj = np.eye(d, dtype=complex)
    for q in range(n):
        proj = proj @ (np.eye(d) + dense[n + q]) / 2
    col = proj[:, np.argmax(np.linalg.norm(proj, axis=0))]
    col = col / np.linalg.norm(col)
    u = np.zeros((d, d), dtype=complex)
    for j in range(d):
        v = col
        for q in reversed(range(n)):
            if j & qubit_bit(n, q):
                v = dense[q] @ v
        u[:, j] = v
    return u


# -- ensembles --------------------------------------------------------------------

class EnsembleKind(str, enum.Enum):
    BLOCK = "block"
    BRICKWORK_PBC = "brickwork_pbc"
    BRICKWORK_OBC_U2SPLIT = "brickwork_obc_u2split"
    BRICKWORK_OBC_U1SPLIT = "brickwork_obc_u1split"
    MUB_PRODUCT = "mub_product"


BRICKWORK_KINDS = (
    EnsembleKind.BRICKWORK_PBC,
    EnsembleKind.BRICKWORK_OBC_U2SPLIT,
    EnsembleKind.BRICKWORK_OBC_U1SPLIT,
)


@dataclass(frozen=True)
class EnsembleSpec:
    kind: EnsembleKind
    n_qubits: int
    k: int

    def __post_init__(self):
        object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if self.k < 1 or self.n_qubits % self.k:
            raise CliffordError(f"k={self.k} must divide n={self.n_qubits}")
        if self.kind in BRICKWORK_KINDS and self.k % 2:
            raise CliffordError("brickwork ensembles need even k")

    @property
    def is_brickwork(self) -> bool:
        return self.kind in BRICKWORK_KINDS

    @property
    def layers(self) -> tuple[BlockPartition, ...]:
        """Block layers in the order they are applied (first layer first)."""
        n, k, h = self.n_qubits, self.k, self.k // 2
        kind = self.kind
        if kind in (EnsembleKind.BLOCK, EnsembleKind.MUB_PRODUCT):
            return (BlockPartition(n, k),)
        if kind is EnsembleKind.BRICKWORK_PBC:
            return (BlockPartition(n, k), BlockPartition(n, k, h, periodic=True))
        if kind is EnsembleKind.BRICKWORK_OBC_U2SPLIT:
            return (BlockPartition(n, k), BlockPartition(n, k, h, periodic=False))
        return (BlockPartition(n, k, h, periodic=False), BlockPartition(n, k))

    def __str__(self) -> str:
        return f"{self.kind.value}(n={self.n_qubits},k={self.k})"


def sample_layer(part: BlockPartition, rng: np.random.Generator) -> CliffordTableau:
    return embed([(random_clifford(len(b), rng), b) for b in part.blocks], part.n_qubits)


def sample_ensemble(spec: EnsembleSpec, rng: np.random.Generator) -> CliffordTableau:
    """Draw one unitary ``U = U_2 U_1`` (or ``U_1`` for block ensembles)."""
    if spec.kind is EnsembleKind.MUB_PRODUCT:
        raise CliffordError("MUB products are enumerated deterministically, not sampled")
    layers = [sample_layer(p, rng) for p in spec.layers]
    u = layers[0]
    for nxt in layers[1:]:
        u = compose(nxt, u)
    return u


def sample_layers(spec: EnsembleSpec, rng: np.random.Generator) -> list[CliffordTableau]:
    """The individual layer unitaries ``[U_1, U_2]`` behind one draw."""
    if spec.kind is EnsembleKind.MUB_PRODUCT:
        raise CliffordError("MUB products are enumerated deterministically, not sampled")
    return [sample_layer(p, rng) for p in spec.layers]


# -- mutually unbiased bases --------------------------------------------------------

def _solve_gf2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One solution of ``a @ x = b`` over GF(2)."""
    a = a.copy() % 2
    b = b.copy() % 2
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        hit = next((i for i in range(r, rows) if a[i, c]), None)
        if hit is None:
            continue
        a[[r, hit]] = a[[hit, r]]
        b[[r, hit]] = b[[hit, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
                b[i] ^= b[r]
        piv.append(c)
        r += 1
        if r == rows:
            break
    if np.any(b[r:]):
        raise CliffordError("inconsistent GF(2) system")
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = b[i]
    return x


def clifford_from_stabilizers(gens: Sequence[PauliString]) -> CliffordTableau:
    """A Clifford ``C`` with ``C g_q C^dagger = Z_q`` for commuting generators."""
    k = len(gens)
    if any(g.n_qubits != k for g in gens):
        raise CliffordError("need k independent generators on k qubits")

    def vec(p):
        return np.array([(p[0] >> (k - 1 - q)) & 1 for q in range(k)] + [(p[1] >> (k - 1 - q)) & 1 for q in range(k)])

    def form_row(p):
        v = vec(p)
        return np.concatenate([v[k:], v[:k]])

    gv = [(g.x, g.z) for g in gens]
    destab: list[tuple[int, int]] = []
    for q in range(k):
        rows = [form_row(g) for g in gv] + [form_row(d) for d in destab]
        rhs = [1 if r == q else 0 for r in range(k)] + [0] * len(destab)
        sol = _solve_gf2(np.array(rows, dtype=np.int64), np.array(rhs, dtype=np.int64))
        dx = sum(int(sol[j]) << (k - 1 - j) for j in range(k))
        dz = sum(int(sol[k + j]) << (k - 1 - j) for j in range(k))
        destab.append((dx, dz))
    t = CliffordTableau(
        k,
        tuple(d[0] for d in destab) + tuple(g[0] for g in gv),
        tuple(d[1] for d in destab) + tuple(g[1] for g in gv),
        (0,) * k + tuple((g.sign == -1) * 1 for g in gens),
    )
    if not t.is_symplectic():
        raise CliffordError("generators are not independent and commuting")
    return inverse(t)


def _mub_classes(k: int) -> list[list[PauliString]]:
    nontrivial = [PauliString(k, x, z) for x in range(1 << k) for z in range(1 << k) if x or z]
    target = (1 << k) + 1

    def closed_groups(pool):
        # commuting subgroups of size 2^k, keyed by a pair of generators (k <= 2)
        seen = set()
        for combo in itertools.combinations(pool, k):
            if any(_sympl(a.x, a.z, b.x, b.z) for a, b in itertools.combinations(combo, 2)):
                continue
            members = set()
            for sel in itertools.product((0, 1), repeat=k):
                x = z = 0
                for s, g in zip(sel, combo):
                    if s:
                        x ^= g.x
                        z ^= g.z
                if x or z:
                    members.add((x, z))
            if len(members) != (1 << k) - 1:
                continue
            key = frozenset(members)
            if key not in seen:
                seen.add(key)
                yield key

    groups = list(closed_groups(nontrivial))

    def search(chosen, used):
        if len(chosen) == target:
            return chosen
        for g in groups:
            if used & g or (chosen and min(g) < min(chosen[-1])):
                continue
            res = search(chosen + [g], used | g)
            if res:
                return res
        return None

    found = search([], frozenset())
    if found is None:
        raise CliffordError("no MUB partition found")
    return [sorted((PauliString(k, x, z) for x, z in g), key=lambda p: (p.x, p.z)) for g in found]


_MUB_CACHE: dict[int, list[CliffordTableau]] = {}


def mub_bases(k: int) -> list[CliffordTableau]:
    """``2^k + 1`` Cliffords whose computational bases are mutually unbiased.

    Basis ``j`` measures the commuting class ``{C_j^dagger Z C_j}``.  For
    ``k = 1`` the order is Z, X, Y.
    """
    if k not in (1, 2):
        raise CliffordError("MUB construction supported for k in {1, 2}")
    if k not in _MUB_CACHE:
        if k == 1:
            gens = [[PauliString.from_label("Z")], [PauliString.from_label("X")], [PauliString.from_label("Y")]]
        else:
            gens = []
            for cls in _mub_classes(k):
                a = cls[0]
                b = next(p for p in cls[1:] if (p.x, p.z) != (a.x, a.z))
                gens.append([a, b])
        _MUB_CACHE[k] = [clifford_from_stabilizers(g) for g in gens]
    return list(_MUB_CACHE[k])


def diagonalized_paulis(c: CliffordTableau) -> set[tuple[int, int]]:
    """Masks ``(x, z)`` of unsigned Paulis ``P`` with ``C P C^dagger`` in +-Z."""
    inv = inverse(c)
    n = c.n_qubits
    zs = np.arange(1 << n, dtype=np.int64)
    ax, az, _ = conjugate_many(inv, np.zeros_like(zs), zs)
    return {(int(x), int(z)) for x, z in zip(ax, az)}
