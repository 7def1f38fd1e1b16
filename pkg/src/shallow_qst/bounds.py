"""Exact evaluation of the analytic bound objects.

Rational quantities use :class:`fractions.Fraction`; only square roots and
logarithms fall back to floats.  Every closed form has a brute-force
counterpart here so the two can be compared directly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .channel import tau_full
from .pauli import BlockPartition, PauliString, all_paulis, block_weight, restrict

Mat = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


class BoundsError(ValueError):
    pass


# -- small exact 2x2 algebra ---------------------------------------------------------

def _mat(a, b, c, d) -> Mat:
    return ((Fraction(a), Fraction(b)), (Fraction(c), Fraction(d)))


def mat_mul(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(sum(a[i][l] * b[l][j] for l in range(2)) for j in range(2)) for i in range(2))


def mat_pow(a: Mat, p: int) -> Mat:
    out = _mat(1, 0, 0, 1)
    for _ in range(p):
        out = mat_mul(out, a)
    return out


def mat_trace(a: Mat) -> Fraction:
    return a[0][0] + a[1][1]


def mat_det(a: Mat) -> Fraction:
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]


def mat_scale(s, a: Mat) -> Mat:
    s = Fraction(s)
    return tuple(tuple(s * v for v in row) for row in a)


def to_float(a: Mat) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in a])


def _check_even(k: int) -> None:
    if k < 2 or k % 2:
        raise BoundsError(f"block size k={k} must be even and >= 2")


def _check_partition(n: int, k: int) -> int:
    if k < 1 or n < 1 or n % k:
        raise BoundsError(f"k={k} does not divide n={n}")
    return n // k


# -- F/G transfer matrices -------------------------------------------------------------

@dataclass(frozen=True)
class TransferPair:
    """``F`` and ``G`` over sub-block labels (0 = equal, 1 = different)."""

    F: Mat
    G: Mat
    k: int

    @property
    def FG(self) -> Mat:
        return mat_mul(self.F, self.G)


def build_transfer(k: int) -> TransferPair:
    """Closed-form ``F`` and ``G`` for even ``k``.

    Examples
    --------
    >>> tp = build_transfer(2)
    >>> [[str(v) for v in row] for row in tp.G]
    [['16/5', '12/5'], ['12/5', '36/5']]
    """
    _check_even(k)
    z = 1 << k
    e = Fraction(1, z - 1)
    f = _mat(1, e, e, e)
    g = mat_scale(Fraction(1, z + 1), _mat(z * z, z * (z - 1), z * (z - 1), z * (z - 1) ** 2))
    return TransferPair(f, g, k)


def g_brute_force(k: int) -> Mat:
    """``G(c1, c2)`` as the literal sum of ``tau(P, Q; k)`` over ``k``-qubit pairs.

    Pairs are binned by whether ``P`` and ``Q`` agree on the left and right
    half-blocks.  Cost is ``16**k`` tau evaluations (k <= 4 is practical).
    """
    _check_even(k)
    h = k // 2
    left, right = list(range(h)), list(range(h, k))
    ps = list(all_paulis(k))
    halves = [(restrict(p, left), restrict(p, right)) for p in ps]
    acc = [[Fraction(0)] * 2 for _ in range(2)]
    for p, (pl, pr) in zip(ps, halves):
        for q, (ql, qr) in zip(ps, halves):
            acc[int(pl != ql)][int(pr != qr)] += tau_full(p, q, k)
    return tuple(tuple(r) for r in acc)


def transfer_from_tau(k: int) -> TransferPair:
    """``F`` with the brute-force ``G`` (see :func:`g_brute_force`)."""
    return TransferPair(build_transfer(k).F, g_brute_force(k), k)


def lambda_pm(k: int) -> tuple[float, float]:
    """Closed-form eigenvalues of ``F G``."""
    _check_even(k)
    z = 1 << k
    root = math.sqrt(16 * z - 7)
    return z * (2 * z + 1 + root) / (2 * (z + 1)), z * (2 * z + 1 - root) / (2 * (z + 1))


def eig_pair(a: Mat) -> tuple[float, float]:
    """Eigenvalues (descending) of an exact 2x2 matrix with real spectrum."""
    w = np.linalg.eigvals(to_float(a)).real
    return float(w.max()), float(w.min())


def config_sum(tp: TransferPair, m: int) -> Fraction:
    """``sum_c f(c1,c2) g(c2,c3) ... f(c_{2m-1},c_2m) g(c_2m,c1)`` over all ``2**(2m)`` labels."""
    if m < 1:
        raise BoundsError("m must be >= 1")
    total = Fraction(0)
    for c in itertools.product((0, 1), repeat=2 * m):
        term = Fraction(1)
        for i in range(0, 2 * m, 2):
            term *= tp.F[c[i]][c[i + 1]] * tp.G[c[i + 1]][c[(i + 2) % (2 * m)]]
        total += term
    return total


def variance_bound_pbc(n: int, k: int, tp: TransferPair | None = None) -> float:
    """``(1 + 2^-k)^{2m} Tr((FG)^m)`` with ``m = n/k``.

    Pass ``tp=transfer_from_tau(k)`` to evaluate with the brute-force ``G``.

    Examples
    --------
    >>> round(variance_bound_pbc(4, 2), 4)
    107.8125
    """
    _check_even(k)
    m = _check_partition(n, k)
    tp = build_transfer(k) if tp is None else tp
    pref = (1 + Fraction(1, 1 << k)) ** (2 * m)
    return float(pref * mat_trace(mat_pow(tp.FG, m)))


def variance_bound_pbc_exact(n: int, k: int, tp: TransferPair | None = None) -> Fraction:
    _check_even(k)
    m = _check_partition(n, k)
    tp = build_transfer(k) if tp is None else tp
    return (1 + Fraction(1, 1 << k)) ** (2 * m) * mat_trace(mat_pow(tp.FG, m))


def variance_bound_envelope(n: int) -> float:
    """``exp(2 + sqrt 5) 2^{n+1}``, valid when ``k 2^{k/2} >= n``."""
    return math.exp(2 + math.sqrt(5)) * 2 ** (n + 1)


# -- open boundaries ---------------------------------------------------------------------

class ObcVariant(str, Enum):
    U2SPLIT = "u2split"
    U1SPLIT = "u1split"


@dataclass(frozen=True)
class ObcPair:
    F_tilde: Mat
    G_tilde: Mat
    variant: ObcVariant
    k: int

    def boundary_matrix(self) -> Mat:
        """``X = F G~`` (split in the second layer) or ``F~ G`` (split in the first)."""
        tp = build_transfer(self.k)
        if self.variant is ObcVariant.U2SPLIT:
            return mat_mul(tp.F, self.G_tilde)
        return mat_mul(self.F_tilde, tp.G)


def build_obc(k: int, variant: ObcVariant | str) -> ObcPair:
    _check_even(k)
    variant = ObcVariant(variant)
    z = 1 << k
    h = 1 << (k // 2)
    e = Fraction(1, h - 1)
    ft = _mat(1, e, e, e * e)
    gt = _mat(z, z * (h - 1), z * (h - 1), z * (h - 1) ** 2)
    return ObcPair(ft, gt, variant, k)


def trace_FGt_closed(k: int) -> Fraction:
    """Stated closed form ``Tr(F G~) = 2^{k+1}``."""
    return Fraction(2 ** (k + 1))


def trace_FtG_closed(k: int) -> Fraction:
    """Stated closed form ``Tr(F~ G) = 2^k (2^k + 4 * 2^{k/2} + 3) / (2^k + 1)``."""
    _check_even(k)
    z, h = 1 << k, 1 << (k // 2)
    return Fraction(z * (z + 4 * h + 3), z + 1)


def trace_FtG_matrix_form(k: int) -> Fraction:
    """``Tr(F~ G)`` simplified directly from the matrices: ``2^k (2^{k+1} + 4 * 2^{k/2} + 3) / (2^k + 1)``."""
    _check_even(k)
    z, h = 1 << k, 1 << (k // 2)
    return Fraction(z * (2 * z + 4 * h + 3), z + 1)


def obc_alphas(x: Mat, k: int) -> tuple[float, float]:
    """``alpha_pm = (Tr(FGX) - lambda_mp Tr X) / (lambda_pm - lambda_mp)``."""
    lp, lm = lambda_pm(k)
    tfgx = float(mat_trace(mat_mul(build_transfer(k).FG, x)))
    tx = float(mat_trace(x))
    return (tfgx - lm * tx) / (lp - lm), (tfgx - lp * tx) / (lm - lp)


def h_closed(x: Mat, k: int, m: int) -> float:
    """``h(X) = alpha_+ lambda_+^{m-1} + alpha_- lambda_-^{m-1}``."""
    ap, am = obc_alphas(x, k)
    lp, lm = lambda_pm(k)
    return ap * lp ** (m - 1) + am * lm ** (m - 1)


def h_direct(x: Mat, k: int, m: int) -> Fraction:
    """``Tr((FG)^{m-1} X)`` by exact matrix products."""
    if m < 1:
        raise BoundsError("m must be >= 1")
    return mat_trace(mat_mul(mat_pow(build_transfer(k).FG, m - 1), x))


def variance_bound_obc(n: int, k: int, variant: ObcVariant | str) -> float:
    """``(1 + 2^-k)^{2m} h(X)`` for the chosen open-boundary layout."""
    _check_even(k)
    m = _check_partition(n, k)
    x = build_obc(k, variant).boundary_matrix()
    return (1 + 2.0 ** -k) ** (2 * m) * h_closed(x, k, m)


# -- K contraction (two-layer channel eigenvalues) ----------------------------------------------

@dataclass(frozen=True)
class KPair:
    K0: Mat
    K1: Mat
    k: int


def build_K(k: int) -> KPair:
    if k < 1:
        raise BoundsError("k must be >= 1")
    z = 1 << k
    k0 = mat_scale(Fraction(1, z + 1), _mat(z + 1, 1, 0, 0))
    k1 = mat_scale(Fraction(1, (z + 1) ** 2), _mat(1, 1, 2 * z, z))
    return KPair(k0, k1, k)


def m_from_K(pattern, k: int) -> Fraction:
    """``Tr(K_{w_1} ... K_{w_m})`` for a touched-block pattern ``w``."""
    kp = build_K(k)
    acc = _mat(1, 0, 0, 1)
    for w in pattern:
        acc = mat_mul(acc, kp.K1 if w else kp.K0)
    return mat_trace(acc)


def mu_pm(k: int) -> tuple[float, float]:
    """Closed-form eigenvalues of ``K_1``."""
    if k < 1:
        raise BoundsError("k must be >= 1")
    z = 1 << k
    root = math.sqrt(z * z + 6 * z + 1)
    return (z + 1 + root) / (2 * (z + 1) ** 2), (z + 1 - root) / (2 * (z + 1) ** 2)


def min_mp_exact(n: int, k: int) -> Fraction:
    m = _check_partition(n, k)
    return mat_trace(mat_pow(build_K(k).K1, m))


def min_mp(n: int, k: int) -> float:
    """``mu_+^{n/k} + mu_-^{n/k}``, the smallest two-layer ``m_P``.

    Examples
    --------
    >>> min_mp(4, 2)
    0.0528
    """
    m = _check_partition(n, k)
    mp, mm = mu_pm(k)
    return float(round(mp ** m + mm ** m, 15))


def max_inverse_envelope(n: int, k: int) -> float:
    """``1 / (mu_+^{m} (1 - |mu_- / mu_+|^{m}))``, an upper bound on ``max_P 1/m_P``."""
    m = _check_partition(n, k)
    mp, mm = mu_pm(k)
    return 1.0 / (mp ** m * (1 - abs(mm / mp) ** m))


def all_ones_is_minimal(m: int, k: int) -> bool:
    """Check that the all-ones pattern uniquely minimises the K contraction over ``{0,1}^m``."""
    ones = m_from_K((1,) * m, k)
    return all(m_from_K(w, k) > ones for w in itertools.product((0, 1), repeat=m) if any(v == 0 for v in w))


# -- MUB combinatorics --------------------------------------------------------------------------

def n_p(p: PauliString, k: int) -> int:
    """Number of actionable product bases ``(2^k+1)^{n/k - w_k(P)}``."""
    m = _check_partition(p.n_qubits, k)
    return ((1 << k) + 1) ** (m - block_weight(p, BlockPartition(p.n_qubits, k)))


def sum_inv_NP(n: int, k: int) -> Fraction:
    """``sum_P 1/N_P = 2^n (4^k + 2^k - 1)^{n/k} / (2^k + 1)^{n/k}``.

    Examples
    --------
    >>> sum_inv_NP(2, 1)
    Fraction(100, 9)
    """
    m = _check_partition(n, k)
    z = 1 << k
    return Fraction(2 ** n * (z * z + z - 1) ** m, (z + 1) ** m)


def sum_inv_NP_sq(n: int, k: int) -> Fraction:
    """Per-basis ``sum_{P in basis} 1/N_P^2 = 2^n (4^k + 2^k - 1)^{n/k} / (2^k + 1)^{2n/k}``."""
    m = _check_partition(n, k)
    z = 1 << k
    return Fraction(2 ** n * (z * z + z - 1) ** m, (z + 1) ** (2 * m))


def sum_inv_NP_brute(n: int, k: int) -> Fraction:
    """Direct sum over all ``4^n`` Paulis."""
    _check_partition(n, k)
    return sum((Fraction(1, n_p(p, k)) for p in all_paulis(n)), Fraction(0))


def sum_inv_NP_sq_brute(n: int, k: int, basis_index: tuple[int, ...] | None = None) -> Fraction:
    """Sum of ``1/N_P^2`` over the Paulis diagonal in one product MUB basis."""
    from .estimators import mub_unitary
    from .states import stabilizer_paulis

    m = _check_partition(n, k)
    idx = (0,) * m if basis_index is None else tuple(basis_index)
    xs, zs, _ = stabilizer_paulis(mub_unitary(n, k, idx))
    return sum((Fraction(1, n_p(PauliString(n, int(x), int(z)), k) ** 2) for x, z in zip(xs, zs)), Fraction(0))


def A_nk(n: int, k: int) -> Fraction:
    m = _check_partition(n, k)
    z = 1 << k
    return Fraction(z * z + z - 1, z + 1) ** m


# -- sample complexity -------------------------------------------------------------------------------

class Theorem(str, Enum):
    THM1 = "thm1"
    THM2 = "thm2"
    APPF = "appf"


@dataclass(frozen=True)
class SampleComplexity:
    theorem: Theorem
    n: int
    k: int
    r: int
    eps: float
    delta: float
    T: float
    components: dict
    flags: dict

    @property
    def T_int(self) -> int:
        return math.ceil(self.T - 1e-9)

    def row(self) -> dict:
        out = {"theorem": self.theorem.value, "n": self.n, "k": self.k, "r": self.r,
               "eps": self.eps, "delta": self.delta, "T": self.T, "T_int": self.T_int}
        out.update(self.components)
        out.update(self.flags)
        return out


def assumption_flags(n: int, k: int) -> dict:
    return {"thm1_assumption_k2^(k/2)>=n": k * 2 ** (k / 2) >= n,
            "thm2_assumption_k2^k>=n": k * 2 ** k >= n}


def _check_eps_delta(eps: float, delta: float) -> None:
    if not eps > 0:
        raise BoundsError("eps must be > 0")
    if not 0 < delta < 1:
        raise BoundsError("delta must lie in (0, 1)")


def sample_complexity(theorem: Theorem | str, n: int, k: int, r: int | None, eps: float, delta: float,
                      n_shots: int | None = None) -> SampleComplexity:
    """Explicit sample count from the stated formulas.

    ``eps`` is the trace-distance target.  ``thm1`` solves
    ``d exp(-T e^2 / (s2 + R e / 3)) = delta`` with ``e = eps / (2r)``,
    ``s2 = exp(2 + sqrt 5) 2^{n+1}`` and ``R = (2^k+1)^{n/k}``.  ``thm2`` and
    ``appf`` force ``r = 2^n`` and use ``eps_F = eps / sqrt(2^n)``.

    Examples
    --------
    >>> sc = sample_complexity("thm2", 2, 1, None, 0.1, 0.05)
    >>> str(sc.components["A"]), round(sc.T / sc.components["M"], 12)
    ('25/9', 9.0)
    """
    theorem = Theorem(theorem)
    _check_eps_delta(eps, delta)
    m = _check_partition(n, k)
    d = 1 << n
    flags = assumption_flags(n, k)
    if theorem is Theorem.THM1:
        if r is None:
            raise BoundsError("thm1 needs a rank r")
        if not 1 <= r <= d:
            raise BoundsError(f"rank {r} outside [1, {d}]")
        _check_even(k)
        sigma2 = variance_bound_envelope(n)
        big_r = float(((1 << k) + 1) ** m)
        e_op = eps / (2 * r)
        t = (sigma2 + big_r * e_op / 3) * math.log(d / delta) / e_op ** 2
        lp, lm = lambda_pm(k)
        comps = {"sigma2": sigma2, "R": big_r, "eps_op": e_op, "lambda_plus": lp, "lambda_minus": lm,
                 "variance_bound": variance_bound_pbc(n, k)}
        return SampleComplexity(theorem, n, k, r, eps, delta, t, comps, flags)
    if r not in (None, d):
        raise BoundsError(f"{theorem.value} is a full-rank statement (r = {d})")
    e_f = eps / math.sqrt(d)
    if theorem is Theorem.THM2:
        a = A_nk(n, k)
        big_m = (1 + math.sqrt(2 * math.log(1 / delta))) ** 2 * float(a) / e_f ** 2
        bases = ((1 << k) + 1) ** m
        comps = {"A": a, "M": big_m, "bases": bases, "eps_F": e_f}
        return SampleComplexity(theorem, n, k, d, eps, delta, big_m * bases, comps, flags)
    _check_even(k)
    n_s = d if n_shots is None else n_shots
    big_l = 1.0 / float(min_mp_exact(n, k))
    t = big_l / e_f ** 2 * (math.sqrt(d + n_s) + math.sqrt(big_l) * math.log(2 / delta)) ** 2
    mp, mm = mu_pm(k)
    comps = {"L": big_l, "N_S": n_s, "N_U": t / n_s, "eps_F": e_f, "mu_plus": mp, "mu_minus": mm}
    return SampleComplexity(theorem, n, k, d, eps, delta, t, comps, flags)
