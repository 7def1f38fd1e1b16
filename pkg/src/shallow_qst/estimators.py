"""Shadow snapshots and the four state estimators.

* :func:`snapshot_to_matrix` / :func:`mean_estimator`: unbiased shallow-shadow
  estimator built from the exact channel spectrum.
* :func:`mub_collect` / :func:`mub_estimator`: exhaustive product-MUB design.
* :func:`two_layer_fullrank_estimator`: ``N_U`` brickwork unitaries with
  ``N_S`` shots each.
* :func:`biased_haar_estimator`: the global-Haar inverse applied to a
  shallow snapshot, kept for bias demonstrations.

Internally a snapshot is expanded as a signed sum over the ``2**n`` Paulis
``U^dagger Z_z U`` (its stabilizer group), so no dense unitary is needed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelSpectrum, NonInvertibleChannel
from .clifford import (
    CliffordTableau,
    EnsembleKind,
    EnsembleSpec,
    embed,
    mub_bases,
    restrict_tableau,
    sample_ensemble,
    to_unitary,
)
from .pauli import BlockPartition, PauliError, PauliString, pauli_coefficients, pauli_sum_dense, popcount
from .states import StateError, _sample_from, n_qubits_of, stabilizer_paulis, walsh_signs


class EstimatorError(ValueError):
    pass


@dataclass(frozen=True)
class Snapshot:
    unitary: CliffordTableau
    outcome: int
    spec: EnsembleSpec

    def __post_init__(self):
        n = self.spec.n_qubits
        if self.unitary.n_qubits != n:
            raise EstimatorError("tableau size differs from ensemble size")
        if not 0 <= self.outcome < (1 << n):
            raise EstimatorError(f"outcome {self.outcome} out of range for n={n}")


@dataclass
class SnapshotSet:
    spec: EnsembleSpec
    snapshots: list[Snapshot] = field(default_factory=list)
    master_seed: int | None = None

    def __post_init__(self):
        for s in self.snapshots:
            self._check(s)

    def _check(self, s: Snapshot) -> None:
        if s.spec != self.spec:
            raise EstimatorError("snapshot spec differs from set spec")

    def append(self, s: Snapshot) -> None:
        self._check(s)
        self.snapshots.append(s)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)


# -- state preparation shortcuts --------------------------------------------------

class _PreparedState:
    """Pauli coefficients of ``rho`` cached for repeated Born-probability queries."""

    def __init__(self, rho: np.ndarray):
        self.n = n_qubits_of(rho)
        self.d = 1 << self.n
        self.coeff = pauli_coefficients(rho)[2]
        self.walsh = walsh_signs(self.n)

    def probabilities(self, stab) -> np.ndarray:
        xs, zs, signs = stab
        ev = signs * self.coeff[xs * self.d + zs]
        return self.walsh @ ev / self.d


def _check_spectrum(spec: EnsembleSpec, spectrum: ChannelSpectrum) -> None:
    if spectrum.spec != spec:
        raise EstimatorError(f"spectrum built for {spectrum.spec}, snapshot uses {spec}")


def _inverse_weights(spectrum: ChannelSpectrum, xs, zs) -> np.ndarray:
    w = spectrum.inverse_coefficients(xs, zs)
    if not np.all(np.isfinite(w)):
        raise NonInvertibleChannel("channel has a zero eigenvalue on the snapshot support")
    return w


# -- shadow snapshots ----------------------------------------------------------------

def collect_snapshots(rho: np.ndarray, spec: EnsembleSpec, count: int, rng: np.random.Generator,
                      master_seed: int | None = None) -> SnapshotSet:
    """``count`` i.i.d. ``(U, b)`` pairs: ``U`` from ``spec``, ``b`` Born-sampled from ``U rho U^dagger``.

    Examples
    --------
    >>> import numpy as np
    >>> from shallow_qst.states import basis_state
    >>> spec = EnsembleSpec(EnsembleKind.BLOCK, 2, 1)
    >>> len(collect_snapshots(basis_state(2), spec, 3, np.random.default_rng(0)))
    3
    """
    if spec.kind is EnsembleKind.MUB_PRODUCT:
        raise EstimatorError("MUB data is collected with mub_collect")
    if count < 0:
        raise EstimatorError("count must be >= 0")
    n = n_qubits_of(rho)
    if n != spec.n_qubits:
        raise StateError("state size differs from ensemble size")
    prep = _PreparedState(rho)
    out = SnapshotSet(spec, master_seed=master_seed)
    for _ in range(count):
        u = sample_ensemble(spec, rng)
        b = _sample_from(prep.probabilities(stabilizer_paulis(u)), rng, None)
        out.snapshots.append(Snapshot(u, b, spec))
    return out


def snapshot_pauli_coefficients(s: Snapshot, spectrum: ChannelSpectrum):
    """``(xs, zs, c)`` with ``rho_hat = sum_j c[j] sigma(xs[j], zs[j])``."""
    _check_spectrum(s.spec, spectrum)
    xs, zs, signs = stabilizer_paulis(s.unitary)
    n = s.spec.n_qubits
    zidx = np.arange(1 << n, dtype=np.int64)
    parity = 1 - 2 * (popcount(zidx & s.outcome) & 1)
    c = signs * parity * _inverse_weights(spectrum, xs, zs) / (1 << n)
    return xs, zs, c


def snapshot_to_matrix(s: Snapshot, spectrum: ChannelSpectrum) -> np.ndarray:
    """Unbiased snapshot ``M^{-1}(U^dagger |b><b| U)`` as a dense matrix.

    Examples
    --------
    >>> spec = EnsembleSpec(EnsembleKind.BLOCK, 1, 1)
    >>> snap = Snapshot(CliffordTableau.identity(1), 0, spec)
    >>> snapshot_to_matrix(snap, ChannelSpectrum(spec)).real
    array([[ 2.,  0.],
           [ 0., -1.]])
    """
    xs, zs, c = snapshot_pauli_coefficients(s, spectrum)
    return pauli_sum_dense(s.spec.n_qubits, xs, zs, c)


def block_snapshot_matrix(s: Snapshot) -> np.ndarray:
    """Block-ensemble shortcut ``kron_i [(2^k+1) U_i^dagger |b_i><b_i| U_i - I]``."""
    if s.spec.kind is not EnsembleKind.BLOCK:
        raise EstimatorError("tensor shortcut needs a block ensemble")
    n, k = s.spec.n_qubits, s.spec.k
    out = np.ones((1, 1), dtype=complex)
    for blk in BlockPartition(n, k).blocks:
        u = to_unitary(restrict_tableau(s.unitary, blk), dense_limit=k)
        bi = (s.outcome >> (n - 1 - blk[-1])) & ((1 << k) - 1)
        v = u.conj().T[:, bi]
        local = ((1 << k) + 1) * np.outer(v, v.conj()) - np.eye(1 << k)
        out = np.kron(out, local)
    return out


def mean_estimator(snapshots: SnapshotSet, spectrum: ChannelSpectrum) -> np.ndarray:
    """Arithmetic mean of the snapshot matrices."""
    if len(snapshots) == 0:
        raise EstimatorError("empty snapshot set")
    acc = PauliAccumulator(snapshots.spec.n_qubits)
    for s in snapshots:
        acc.add(*snapshot_pauli_coefficients(s, spectrum))
    return acc.matrix()


class PauliAccumulator:
    """Running sum of Pauli-basis coefficients; densified only on request.

    Examples
    --------
    >>> acc = PauliAccumulator(1)
    >>> acc.add(np.array([0, 0]), np.array([0, 1]), np.array([0.5, 0.5]))
    >>> acc.matrix().real
    array([[1., 0.],
           [0., 0.]])
    """

    def __init__(self, n: int):
        self.n = n
        self.d = 1 << n
        self.total = np.zeros(self.d * self.d)
        self.count = 0

    def add(self, xs, zs, c, weight: int = 1) -> None:
        np.add.at(self.total, xs * self.d + zs, c)
        self.count += weight

    def matrix(self) -> np.ndarray:
        if self.count == 0:
            raise EstimatorError("nothing accumulated")
        xs, zs = np.divmod(np.arange(self.d * self.d, dtype=np.int64), self.d)
        keep = self.total != 0
        return pauli_sum_dense(self.n, xs[keep], zs[keep], self.total[keep] / self.count)


def shadow_stream(rho: np.ndarray, spec: EnsembleSpec, spectrum: ChannelSpectrum, rng: np.random.Generator):
    """Endless generator of ``(snapshot, (xs, zs, coeffs))`` pairs; the fast path used by the harness."""
    _check_spectrum(spec, spectrum)
    prep = _PreparedState(rho)
    zidx = np.arange(prep.d, dtype=np.int64)
    while True:
        u = sample_ensemble(spec, rng)
        xs, zs, signs = stab = stabilizer_paulis(u)
        b = _sample_from(prep.probabilities(stab), rng, None)
        parity = 1 - 2 * (popcount(zidx & b) & 1)
        c = signs * parity * _inverse_weights(spectrum, xs, zs) / prep.d
        yield Snapshot(u, b, spec), (xs, zs, c)


# -- Haar-inverse (biased) estimator ------------------------------------------------

def biased_haar_estimator(s: Snapshot) -> np.ndarray:
    """``(d+1) U^dagger |b><b| U - I``: the global-Haar inverse, biased for shallow ensembles."""
    n = s.spec.n_qubits
    d = 1 << n
    xs, zs, signs = stabilizer_paulis(s.unitary)
    zidx = np.arange(d, dtype=np.int64)
    parity = 1 - 2 * (popcount(zidx & s.outcome) & 1)
    proj = pauli_sum_dense(n, xs, zs, signs * parity / d)
    return (d + 1) * proj - np.eye(d)


def snapshot_pauli_value(s: Snapshot, p: PauliString, spectrum: ChannelSpectrum | None = None) -> float:
    """``Tr(P rho_hat)`` for one snapshot without densifying.

    With ``spectrum=None`` the biased Haar-inverse snapshot is used.
    """
    if p.n_qubits != s.spec.n_qubits:
        raise PauliError("Pauli length differs from snapshot size")
    d = 1 << p.n_qubits
    if p.is_identity():
        return 1.0
    xs, zs, signs = stabilizer_paulis(s.unitary)
    hit = np.nonzero((xs == p.x) & (zs == p.z))[0]
    if hit.size == 0:
        return 0.0
    z = int(hit[0])
    val = p.sign * signs[z] * (1 - 2 * (popcount(z & s.outcome) & 1))
    if spectrum is None:
        return float((d + 1) * val)
    _check_spectrum(s.spec, spectrum)
    return float(val * spectrum.inverse(p.unsigned()))


# -- serialization ----------------------------------------------------------------------

def _spec_tag(spec: EnsembleSpec) -> str:
    return f"{spec.kind.value}:{spec.n_qubits}:{spec.k}"


def _parse_tag(tag: str) -> EnsembleSpec:
    kind, n, k = tag.split(":")
    return EnsembleSpec(EnsembleKind(kind), int(n), int(k))


def save_snapshots(path, snapshots: SnapshotSet) -> None:
    """One line per snapshot: ``<kind:n:k> <tableau> <outcome bits>``."""
    n = snapshots.spec.n_qubits
    lines = [f"# snapshots seed={snapshots.master_seed}"]
    tag = _spec_tag(snapshots.spec)
    for s in snapshots:
        lines.append(f"{tag} {s.unitary.to_compact()} {s.outcome:0{n}b}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_snapshots(path) -> SnapshotSet:
    lines = Path(path).read_text().splitlines()
    seed = None
    out: SnapshotSet | None = None
    for ln in lines:
        if not ln.strip():
            continue
        if ln.startswith("#"):
            val = ln.partition("seed=")[2].strip()
            seed = None if val in ("", "None") else int(val)
            continue
        tag, blob, bits = ln.split()
        spec = _parse_tag(tag)
        if out is None:
            out = SnapshotSet(spec, master_seed=seed)
        out.append(Snapshot(CliffordTableau.from_compact(blob), int(bits, 2), spec))
    if out is None:
        raise EstimatorError("no snapshot records found")
    return out


# -- product-MUB estimator ------------------------------------------------------------------

@dataclass(frozen=True)
class MubRecord:
    basis_index: tuple[int, ...]
    outcomes: np.ndarray


@dataclass
class MubDataset:
    n_qubits: int
    k: int
    shots_per_basis: int
    records: list[MubRecord]

    @property
    def total_shots(self) -> int:
        return sum(len(r.outcomes) for r in self.records)

    def validate(self) -> None:
        nb = (1 << self.k) + 1
        seen = set()
        for r in self.records:
            if len(r.basis_index) != self.n_qubits // self.k or any(not 0 <= i < nb for i in r.basis_index):
                raise EstimatorError(f"invalid basis index {r.basis_index}")
            if len(r.outcomes) != self.shots_per_basis:
                raise EstimatorError("wrong shot count in record")
            seen.add(r.basis_index)
        if len(seen) != len(self.records) or len(seen) != nb ** (self.n_qubits // self.k):
            raise EstimatorError("dataset does not cover every product basis exactly once")


def _check_mub(n: int, k: int) -> None:
    if k not in (1, 2):
        raise EstimatorError(f"MUB size k={k} unsupported (k in {{1, 2}})")
    if n % k:
        raise EstimatorError(f"k={k} does not divide n={n}")


def mub_unitary(n: int, k: int, basis_index: tuple[int, ...]) -> CliffordTableau:
    """Product Clifford whose measurement realizes the given per-block MUB choice."""
    bases = mub_bases(k)
    blocks = BlockPartition(n, k).blocks
    return embed([(bases[i], blk) for i, blk in zip(basis_index, blocks)], n)


def mub_basis_indices(n: int, k: int):
    """All product-basis index tuples in lexicographic order."""
    return itertools.product(range((1 << k) + 1), repeat=n // k)


def mub_collect(rho: np.ndarray, n: int, k: int, shots: int, rng: np.random.Generator) -> MubDataset:
    """``shots`` outcomes in every one of the ``(2^k+1)^{n/k}`` product bases."""
    _check_mub(n, k)
    if n_qubits_of(rho) != n:
        raise StateError("state size differs from n")
    if shots < 1:
        raise EstimatorError("shots per basis must be >= 1")
    prep = _PreparedState(rho)
    records = []
    for idx in mub_basis_indices(n, k):
        probs = prep.probabilities(stabilizer_paulis(mub_unitary(n, k, idx)))
        records.append(MubRecord(idx, np.asarray(_sample_from(probs, rng, shots), dtype=np.int64)))
    return MubDataset(n, k, shots, records)


def actionable_count(p: PauliString, k: int) -> int:
    """Number of product MUB bases whose stabilizer group contains ``+-P``."""
    n = p.n_qubits
    _check_mub(n, k)
    cnt = 0
    for idx in mub_basis_indices(n, k):
        xs, zs, _ = stabilizer_paulis(mub_unitary(n, k, idx))
        cnt += bool(np.any((xs == p.x) & (zs == p.z)))
    return cnt


def n_actionable(xs, zs, n: int, k: int) -> np.ndarray:
    """``N_P = (2^k+1)^{n/k - w_k(P)}`` for arrays of Pauli masks."""
    sup = np.asarray(xs, dtype=np.int64) | np.asarray(zs, dtype=np.int64)
    w = np.zeros_like(sup)
    for m in BlockPartition(n, k).masks:
        w += (sup & m) != 0
    return ((1 << k) + 1) ** (n // k - w)


def mub_pauli_sums(data: MubDataset) -> np.ndarray:
    """``mu_P`` for all Paulis, indexed by ``x * 2^n + z``."""
    n, k = data.n_qubits, data.k
    _check_mub(n, k)
    d = 1 << n
    walsh = walsh_signs(n)
    mu = np.zeros(d * d)
    for rec in data.records:
        xs, zs, signs = stabilizer_paulis(mub_unitary(n, k, rec.basis_index))
        counts = np.bincount(rec.outcomes, minlength=d)
        # identity (z = 0) is read out by every basis too
        np.add.at(mu, xs * d + zs, signs * (walsh @ counts))
    return mu


def mub_estimator(data: MubDataset) -> np.ndarray:
    """``sum_P mu_P P / (2^n M N_P)`` over all ``4^n`` Paulis.

    Examples
    --------
    >>> from shallow_qst.states import basis_state
    >>> data = mub_collect(basis_state(1), 1, 1, 50, np.random.default_rng(1))
    >>> est = mub_estimator(data)
    >>> round(float(est[0, 0].real), 6), round(float(np.trace(est).real), 6)
    (1.0, 1.0)
    """
    data.validate()
    n, k = data.n_qubits, data.k
    d = 1 << n
    mu = mub_pauli_sums(data)
    xs, zs = np.divmod(np.arange(d * d, dtype=np.int64), d)
    coeff = mu / (d * data.shots_per_basis * n_actionable(xs, zs, n, k))
    return pauli_sum_dense(n, xs, zs, coeff)


# -- two-layer full-rank estimator ------------------------------------------------------------

def two_layer_fullrank_estimator(rho: np.ndarray, spec: EnsembleSpec, n_unitaries: int, shots: int,
                                 rng: np.random.Generator, spectrum: ChannelSpectrum | None = None) -> np.ndarray:
    """Mean over ``n_unitaries`` brickwork unitaries of the ``shots``-averaged snapshot."""
    if not spec.is_brickwork:
        raise EstimatorError("two-layer estimator needs a brickwork ensemble")
    if n_unitaries < 1 or shots < 1:
        raise EstimatorError("N_U and N_S must be >= 1")
    if n_qubits_of(rho) != spec.n_qubits:
        raise StateError("state size differs from ensemble size")
    spectrum = ChannelSpectrum(spec) if spectrum is None else spectrum
    _check_spectrum(spec, spectrum)
    prep = _PreparedState(rho)
    acc = PauliAccumulator(spec.n_qubits)
    for _ in range(n_unitaries):
        u = sample_ensemble(spec, rng)
        xs, zs, signs = stab = stabilizer_paulis(u)
        outcomes = _sample_from(prep.probabilities(stab), rng, shots)
        counts = np.bincount(outcomes, minlength=prep.d)
        c = signs * (prep.walsh @ counts) * _inverse_weights(spectrum, xs, zs) / (prep.d * shots)
        acc.add(xs, zs, c)
    return acc.matrix()
