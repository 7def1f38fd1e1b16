import numpy as np
import pytest

from shallow_qst.clifford import CliffordTableau, random_clifford, to_unitary
from shallow_qst.pauli import PauliString, all_paulis, to_dense
from shallow_qst.states import (
    StateError,
    all_distances,
    apply_clifford,
    basis_state,
    born_sample,
    check_density_matrix,
    frobenius_distance,
    load_state,
    maximally_mixed,
    opnorm_distance,
    outcome_bits,
    outcome_distribution,
    pauli_expectation,
    project_psd,
    purity,
    random_rank_r_state,
    save_state,
    trace_distance,
)

# chi-square critical values at p = 0.001
CHI2_P001 = {3: 16.266, 7: 24.322}

HADAMARD = CliffordTableau.from_images([PauliString.from_label("Z")], [PauliString.from_label("X")])


def chi2(counts, probs):
    expected = probs * counts.sum()
    mask = expected > 0
    return float(((counts[mask] - expected[mask]) ** 2 / expected[mask]).sum())


class TestRandomStates:
    @pytest.mark.parametrize("n,r", [(1, 1), (2, 3), (3, 8), (4, 2)])
    def test_rank_and_validity(self, n, r):
        rho = random_rank_r_state(n, r, np.random.default_rng(n * 10 + r))
        check_density_matrix(rho)
        assert (np.linalg.eigvalsh(rho) > 1e-8).sum() == r

    def test_pure_and_full(self):
        rng = np.random.default_rng(0)
        assert purity(random_rank_r_state(3, 1, rng)) == pytest.approx(1, abs=1e-10)
        pur = purity(random_rank_r_state(2, 4, rng))
        assert 0.25 < pur <= 1

    def test_rank_out_of_range(self):
        with pytest.raises(StateError):
            random_rank_r_state(2, 5, np.random.default_rng(0))
        with pytest.raises(StateError):
            random_rank_r_state(2, 0, np.random.default_rng(0))

    def test_dense_limit(self):
        with pytest.raises(StateError):
            random_rank_r_state(5, 1, np.random.default_rng(0), dense_limit=4)

    def test_mean_is_maximally_mixed(self):
        rng = np.random.default_rng(1)
        draws = np.array([random_rank_r_state(2, 4, rng) for _ in range(1000)])
        mean = draws.mean(axis=0)
        err = draws.std(axis=0) / np.sqrt(len(draws))
        assert np.all(np.abs(mean - maximally_mixed(2)) <= 5 * err + 1e-12)


class TestApplyClifford:
    def test_identity(self):
        rho = random_rank_r_state(2, 2, np.random.default_rng(2))
        assert np.allclose(apply_clifford(rho, CliffordTableau.identity(2)), rho)

    def test_hadamard_plus(self):
        out = apply_clifford(basis_state(1), HADAMARD)
        assert np.allclose(out, np.full((2, 2), 0.5), atol=1e-12)

    @pytest.mark.parametrize("method", ["pauli", "unitary"])
    def test_purity_and_contract(self, method):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 4))
            rho = random_rank_r_state(n, int(rng.integers(1, 1 << n)), rng)
            c = random_clifford(n, rng)
            out = apply_clifford(rho, c, method=method)
            assert purity(out) == pytest.approx(purity(rho), abs=1e-10)
        u = to_unitary(c)
        for p in all_paulis(n):
            lhs = np.trace(to_dense(p) @ out)
            rhs = np.trace(u.conj().T @ to_dense(p) @ u @ rho)
            assert abs(lhs - rhs) < 1e-10

    def test_size_mismatch(self):
        with pytest.raises(StateError):
            apply_clifford(basis_state(2), HADAMARD)

    def test_outcome_distribution_matches_dense(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            rho = random_rank_r_state(3, 2, rng)
            c = random_clifford(3, rng)
            u = to_unitary(c)
            assert np.allclose(outcome_distribution(rho, c), np.diag(u @ rho @ u.conj().T).real, atol=1e-12)


class TestBornSampling:
    def test_basis_state(self):
        out = born_sample(basis_state(3), np.random.default_rng(0), shots=100)
        assert np.all(out == 0)

    def test_maximally_mixed_uniform(self):
        counts = np.bincount(born_sample(maximally_mixed(3), np.random.default_rng(5), shots=100_000), minlength=8)
        assert chi2(counts, np.full(8, 1 / 8)) < CHI2_P001[7]

    def test_plus_state(self):
        draws = 20_000
        out = born_sample(np.full((2, 2), 0.5), np.random.default_rng(6), shots=draws)
        sigma = np.sqrt(0.25 / draws)
        assert abs((out == 0).mean() - 0.5) <= 5 * sigma

    def test_rotated_statistics(self):
        rng = np.random.default_rng(7)
        rho = random_rank_r_state(2, 2, rng)
        c = random_clifford(2, rng)
        rotated = apply_clifford(rho, c)
        counts = np.bincount(born_sample(rotated, rng, shots=100_000), minlength=4)
        assert chi2(counts, np.diag(rotated).real) < CHI2_P001[3]

    def test_bad_diagonal(self):
        with pytest.raises(StateError):
            born_sample(np.diag([0.7, 0.7]).astype(complex), np.random.default_rng(0))

    def test_outcome_bits_msb_is_qubit0(self):
        assert outcome_bits(0b100, 3) == (1, 0, 0)


class TestDistances:
    def test_equal(self):
        rho = random_rank_r_state(2, 2, np.random.default_rng(8))
        assert all_distances(rho, rho) == pytest.approx((0, 0, 0), abs=1e-12)

    def test_orthogonal_basis_states(self):
        a, b = basis_state(1, 0), basis_state(1, 1)
        assert trace_distance(a, b) == pytest.approx(2)
        assert frobenius_distance(a, b) == pytest.approx(np.sqrt(2))
        assert opnorm_distance(a, b) == pytest.approx(1)

    def test_ordering_chain(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            r = int(rng.integers(1, 5))
            a, b = random_rank_r_state(3, r, rng), random_rank_r_state(3, r, rng)
            tr, fr, op = all_distances(a, b)
            assert op <= fr + 1e-12 <= tr + 2e-12
            assert tr <= 2 * r * op + 1e-12

    def test_match_singular_values(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            a, b = random_rank_r_state(2, 2, rng), random_rank_r_state(2, 3, rng)
            sv = np.linalg.svd(a - b, compute_uv=False)
            assert all_distances(a, b) == pytest.approx((sv.sum(), np.sqrt((sv ** 2).sum()), sv.max()), abs=1e-10)

    def test_non_hermitian(self):
        with pytest.raises(StateError):
            trace_distance(np.array([[0, 1], [0, 0]], complex), np.zeros((2, 2)))


class TestMisc:
    def test_pauli_expectation(self):
        assert pauli_expectation(maximally_mixed(2), PauliString.from_label("XZ")) == pytest.approx(0)
        assert pauli_expectation(basis_state(1), PauliString.from_label("Z")) == 1
        assert pauli_expectation(basis_state(1), PauliString.from_label("-Z")) == -1
        rho = random_rank_r_state(3, 2, np.random.default_rng(11))
        for p in all_paulis(3):
            assert abs(pauli_expectation(rho, p)) <= 1 + 1e-12

    def test_project_psd(self):
        m = np.diag([0.8, 0.5, -0.3]).astype(complex)
        m = np.pad(m, ((0, 1), (0, 1)))
        out = project_psd(m)
        check_density_matrix(out)
        assert np.allclose(np.diag(out).real, [0.65, 0.35, 0, 0])

    def test_save_load_roundtrip(self, tmp_path):
        rho = random_rank_r_state(2, 3, np.random.default_rng(12))
        save_state(tmp_path / "rho.txt", rho)
        assert np.array_equal(load_state(tmp_path / "rho.txt"), rho)

    def test_check_density_matrix(self):
        with pytest.raises(StateError):
            check_density_matrix(np.eye(2, dtype=complex))
        with pytest.raises(StateError):
            check_density_matrix(np.eye(3, dtype=complex) / 3)
