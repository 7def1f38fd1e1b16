"""Dense density matrices: random states, Clifford action, Born sampling, norms.

Density matrices are plain ``(d, d)`` complex numpy arrays with ``d = 2**n``.
Computational-basis index ``j`` encodes qubit 0 in its most significant bit.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import pauli as _pauli
from .clifford import CliffordTableau, conjugate_many, inverse, to_unitary
from .pauli import PauliString, pauli_coefficients, pauli_expectations, pauli_sum_dense, popcount

TOL = 1e-10


class StateError(ValueError):
    pass


def n_qubits_of(rho: np.ndarray) -> int:
    d = rho.shape[0]
    n = d.bit_length() - 1
    if rho.shape != (d, d) or (1 << n) != d:
        raise StateError(f"not a 2^n x 2^n matrix: shape {rho.shape}")
    return n


def check_density_matrix(rho: np.ndarray, tol: float = TOL) -> None:
    """Raise unless ``rho`` is Hermitian, unit-trace and PSD within ``tol``."""
    n_qubits_of(rho)
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise StateError("matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise StateError(f"trace {tr} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise StateError("matrix has a negative eigenvalue")


def _check_size(n: int, dense_limit: int | None) -> None:
    limit = _pauli.DENSE_LIMIT if dense_limit is None else dense_limit
    if n > limit:
        raise StateError(f"n={n} exceeds dense limit {limit}")


def random_rank_r_state(n: int, r: int, rng: np.random.Generator, dense_limit: int | None = None) -> np.ndarray:
    """``G G^dagger / Tr(G G^dagger)`` for a ``2^n x r`` complex Ginibre matrix ``G``."""
    _check_size(n, dense_limit)
    d = 1 << n
    if not 1 <= r <= d:
        raise StateError(f"rank {r} outside [1, {d}]")
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def basis_state(n: int, index: int = 0) -> np.ndarray:
    d = 1 << n
    rho = np.zeros((d, d), dtype=complex)
    rho[index, index] = 1
    return rho


def maximally_mixed(n: int) -> np.ndarray:
    d = 1 << n
    return np.eye(d, dtype=complex) / d


def apply_clifford(rho: np.ndarray, c: CliffordTableau, method: str = "pauli") -> np.ndarray:
    """``U rho U^dagger`` for the Clifford ``U`` of tableau ``c``.

    ``method="pauli"`` expands ``rho`` in the Pauli basis and conjugates each
    term through the tableau; ``method="unitary"`` builds the dense unitary.
    """
    n = n_qubits_of(rho)
    if c.n_qubits != n:
        raise StateError("tableau and state sizes differ")
    if method == "unitary":
        u = to_unitary(c, dense_limit=max(n, 8))
        return u @ rho @ u.conj().T
    if method != "pauli":
        raise ValueError(f"unknown method {method!r}")
    d = 1 << n
    xs, zs, coeff = pauli_coefficients(rho)
    keep = np.abs(coeff) > 1e-15
    xs, zs, coeff = xs[keep], zs[keep], coeff[keep]
    ax, az, ph = conjugate_many(c, xs, zs)
    return pauli_sum_dense(n, ax, az, coeff * (1j ** ph) / d)


def stabilizer_paulis(c: CliffordTableau) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ``U^dagger Z_z U`` for ``z`` in ``{0,1}^n``.

    Returns ``(xs, zs, signs)`` indexed by the integer ``z`` (same bit layout
    as outcomes), so that ``U^dagger |b><b| U = sum_z (-1)^{z.b} signs[z]
    P(xs[z], zs[z]) / 2^n``.
    """
    n = c.n_qubits
    inv = inverse(c)
    zmask = np.arange(1 << n, dtype=np.int64)
    ax, az, ph = conjugate_many(inv, np.zeros_like(zmask), zmask)
    return ax, az, 1 - ph  # ph is 0 or 2


def walsh_signs(n: int) -> np.ndarray:
    """``H[z, b] = (-1)^{popcount(z & b)}``."""
    j = np.arange(1 << n, dtype=np.int64)
    return 1 - 2 * (popcount(j[:, None] & j[None, :]) & 1)


def outcome_distribution(rho: np.ndarray, c: CliffordTableau) -> np.ndarray:
    """Born probabilities ``<b| U rho U^dagger |b>`` without building ``U``."""
    n = n_qubits_of(rho)
    xs, zs, signs = stabilizer_paulis(c)
    ev = signs * pauli_expectations(rho, xs, zs)
    return walsh_signs(n) @ ev / (1 << n)


def _sample_from(probs: np.ndarray, rng: np.random.Generator, shots: int | None):
    total = probs.sum()
    neg = -probs[probs < 0].sum()
    if abs(total - 1) > 1e-6 or neg > 1e-8:
        raise StateError(f"diagonal is not a probability distribution (sum {total}, negative mass {neg})")
    p = np.clip(probs, 0, None)
    p = p / p.sum()
    if shots is None:
        return int(rng.choice(len(p), p=p))
    return rng.choice(len(p), size=shots, p=p)


def born_sample(rho: np.ndarray, rng: np.random.Generator, shots: int | None = None):
    """Computational-basis outcome(s) drawn from ``diag(rho)``.

    Outcomes are integers whose most significant bit is qubit 0.
    """
    n_qubits_of(rho)
    return _sample_from(np.real(np.diag(rho)), rng, shots)


def outcome_bits(b: int, n: int) -> tuple[int, ...]:
    return tuple((b >> (n - 1 - q)) & 1 for q in range(n))


# -- distances ---------------------------------------------------------------------

def _diff_eigs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise StateError("size mismatch")
    diff = a - b
    if not np.allclose(diff, diff.conj().T, atol=1e-8):
        raise StateError("difference is not Hermitian")
    return np.linalg.eigvalsh((diff + diff.conj().T) / 2)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Unnormalised trace norm ``sum |eig(a - b)|`` (no factor 1/2)."""
    return float(np.abs(_diff_eigs(a, b)).sum())


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt((_diff_eigs(a, b) ** 2).sum()))


def opnorm_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(_diff_eigs(a, b)).max())


def all_distances(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """``(trace, frobenius, operator)`` distances from one eigendecomposition."""
    e = np.abs(_diff_eigs(a, b))
    return float(e.sum()), float(np.sqrt((e ** 2).sum())), float(e.max())


def pauli_expectation(rho: np.ndarray, p: PauliString) -> float:
    n = n_qubits_of(rho)
    if p.n_qubits != n:
        raise StateError("Pauli and state sizes differ")
    val = pauli_expectations(rho, [p.x], [p.z])[0]
    return float(val * p.sign)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


def project_psd(rho: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrix in Frobenius norm (eigenvalue simplex projection)."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    idx = np.arange(1, len(u) + 1)
    k = idx[u - css / idx > 0][-1]
    lam = np.clip(w - css[k - 1] / k, 0, None)
    return (v * lam) @ v.conj().T


# -- serialization -----------------------------------------------------------------

def save_state(path, rho: np.ndarray) -> None:
    """Text format: ``n`` header line, then row-major ``re im`` pairs (repr precision)."""
    n = n_qubits_of(rho)
    lines = [f"n {n}"]
    for row in rho:
        lines.append(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_state(path) -> np.ndarray:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if head[0] != "n":
        raise StateError("missing n header")
    n = int(head[1])
    d = 1 << n
    data = np.array([[float(t) for t in ln.split()] for ln in lines[1:1 + d]])
    if data.shape != (d, 2 * d):
        raise StateError("state file has wrong shape")
    return data[:, 0::2] + 1j * data[:, 1::2]
