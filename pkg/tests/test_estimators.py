import itertools

import numpy as np
import pytest

from shallow_qst.channel import ChannelSpectrum, NonInvertibleChannel
from shallow_qst.clifford import (
    CliffordTableau,
    EnsembleKind,
    EnsembleSpec,
    compose,
    embed,
    enumerate_cl1,
    sample_ensemble,
    sample_layers,
    to_unitary,
)
from shallow_qst.estimators import (
    EstimatorError,
    MubDataset,
    MubRecord,
    PauliAccumulator,
    Snapshot,
    SnapshotSet,
    actionable_count,
    biased_haar_estimator,
    block_snapshot_matrix,
    collect_snapshots,
    load_snapshots,
    mean_estimator,
    mub_collect,
    mub_estimator,
    mub_unitary,
    save_snapshots,
    shadow_stream,
    snapshot_pauli_value,
    snapshot_to_matrix,
    two_layer_fullrank_estimator,
)
from shallow_qst.pauli import PauliString, all_paulis, pauli_coefficients, pauli_sum_dense, to_dense
from shallow_qst.states import basis_state, maximally_mixed, outcome_distribution, random_rank_r_state

PBC = EnsembleKind.BRICKWORK_PBC
ALL_KINDS = [(EnsembleKind.BLOCK, 4, 2), (PBC, 4, 2), (EnsembleKind.BRICKWORK_OBC_U2SPLIT, 4, 2),
             (EnsembleKind.BRICKWORK_OBC_U1SPLIT, 6, 2), (PBC, 6, 2), (EnsembleKind.BLOCK, 3, 1)]


def inverse_dense(y, spectrum):
    """Oracle: expand ``y`` in the Pauli basis and divide each term by ``m_P``."""
    n = spectrum.spec.n_qubits
    xs, zs, c = pauli_coefficients(y)
    w = spectrum.inverse_coefficients(xs, zs)
    return pauli_sum_dense(n, xs, zs, c * w / (1 << n))


def projector_pullback(u, b):
    v = u.conj().T[:, b]
    return np.outer(v, v.conj())


def exhaustive_mean(rho, n):
    spec = EnsembleSpec(EnsembleKind.BLOCK, n, 1)
    spectrum = ChannelSpectrum(spec)
    group = enumerate_cl1()
    d = 1 << n
    acc = np.zeros((d, d), complex)
    count = 0
    for combo in itertools.product(group, repeat=n):
        u = embed([(c, [q]) for q, c in enumerate(combo)], n)
        probs = outcome_distribution(rho, u)
        for b in range(d):
            acc += probs[b] * snapshot_to_matrix(Snapshot(u, b, spec), spectrum)
        count += 1
    return acc / count


class TestSnapshotMatrix:
    def test_single_qubit_example(self):
        spec = EnsembleSpec(EnsembleKind.BLOCK, 1, 1)
        out = snapshot_to_matrix(Snapshot(CliffordTableau.identity(1), 0, spec), ChannelSpectrum(spec))
        assert np.allclose(out, np.diag([2, -1]))

    @pytest.mark.parametrize("kind,n,k", ALL_KINDS)
    def test_trace_and_hermitian(self, kind, n, k):
        spec = EnsembleSpec(kind, n, k)
        spectrum = ChannelSpectrum(spec)
        rng = np.random.default_rng(n + k)
        rho = random_rank_r_state(n, 2, rng)
        for s in collect_snapshots(rho, spec, 20, rng):
            m = snapshot_to_matrix(s, spectrum)
            assert abs(np.trace(m) - 1) < 1e-12
            assert np.allclose(m, m.conj().T, atol=1e-12)

    @pytest.mark.parametrize("kind,n,k", ALL_KINDS)
    def test_matches_dense_oracle(self, kind, n, k):
        spec = EnsembleSpec(kind, n, k)
        spectrum = ChannelSpectrum(spec)
        rng = np.random.default_rng(7)
        for _ in range(5):
            u = sample_ensemble(spec, rng)
            b = int(rng.integers(1 << n))
            want = inverse_dense(projector_pullback(to_unitary(u), b), spectrum)
            assert np.allclose(snapshot_to_matrix(Snapshot(u, b, spec), spectrum), want, atol=1e-10)

    def test_block_shortcut(self):
        rng = np.random.default_rng(8)
        for n, k in [(2, 1), (4, 2), (3, 3)]:
            spec = EnsembleSpec(EnsembleKind.BLOCK, n, k)
            spectrum = ChannelSpectrum(spec)
            for s in collect_snapshots(random_rank_r_state(n, 1, rng), spec, 10, rng):
                assert np.allclose(block_snapshot_matrix(s), snapshot_to_matrix(s, spectrum), atol=1e-10)

    def test_outer_layer_identity(self):
        # brickwork snapshot == U1^+ M^{-1}(U2^+ |b><b| U2) U1
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        rng = np.random.default_rng(9)
        for _ in range(50):
            u1, u2 = sample_layers(spec, rng)
            b = int(rng.integers(16))
            d1 = to_unitary(u1)
            long_way = d1.conj().T @ inverse_dense(projector_pullback(to_unitary(u2), b), spectrum) @ d1
            snap = Snapshot(compose(u2, u1), b, spec)
            assert np.allclose(snapshot_to_matrix(snap, spectrum), long_way, atol=1e-10)

    def test_opnorm_bound(self):
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        rng = np.random.default_rng(10)
        for s in collect_snapshots(random_rank_r_state(4, 1, rng), spec, 300, rng):
            assert np.abs(np.linalg.eigvalsh(snapshot_to_matrix(s, spectrum))).max() <= 25 + 1e-9

    def test_spectrum_mismatch(self):
        spec = EnsembleSpec(PBC, 4, 2)
        s = Snapshot(CliffordTableau.identity(4), 0, spec)
        with pytest.raises(EstimatorError):
            snapshot_to_matrix(s, ChannelSpectrum(EnsembleSpec(EnsembleKind.BLOCK, 4, 2)))

    def test_non_invertible(self):
        spec = EnsembleSpec(EnsembleKind.BLOCK, 1, 1)

        class Broken(ChannelSpectrum):
            def inverse_coefficients(self, xs, zs):
                return np.full(len(xs), np.inf)

        with pytest.raises(NonInvertibleChannel):
            snapshot_to_matrix(Snapshot(CliffordTableau.identity(1), 0, spec), Broken(spec))


class TestUnbiasedness:
    @pytest.mark.parametrize("n,ranks", [(1, (1, 2, 1, 2, 2)), (2, (1, 2, 4, 1, 3))])
    def test_exhaustive(self, n, ranks):
        rng = np.random.default_rng(20 + n)
        for r in ranks:
            rho = random_rank_r_state(n, r, rng)
            assert np.allclose(exhaustive_mean(rho, n), rho, atol=1e-12, rtol=0)

    def test_statistical_brickwork(self):
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        rng = np.random.default_rng(21)
        rho = random_rank_r_state(4, 2, rng)
        samples = 20_000
        s1 = np.zeros(256)
        s2 = np.zeros(256)
        stream = shadow_stream(rho, spec, spectrum, rng)
        for _ in range(samples):
            _, (xs, zs, c) = next(stream)
            s1[xs * 16 + zs] += c
            s2[xs * 16 + zs] += c * c
        mean = s1 / samples
        sigma = np.sqrt(np.maximum(s2 / samples - mean ** 2, 0) / samples)
        target = pauli_coefficients(rho)[2] / 16
        assert np.all(np.abs(mean - target) <= 5 * sigma + 1e-12)

    def test_second_moment_maximally_mixed(self):
        # E[rho_hat^2] = (1/d^2) sum_P 1/m_P * I at rho = I/d; per snapshot Tr(rho_hat^2)/d = sum c^2
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        stream = shadow_stream(maximally_mixed(4), spec, spectrum, np.random.default_rng(22))
        vals = np.array([float((next(stream)[1][2] ** 2).sum()) for _ in range(5000)])
        exact = float(sum(1 / spectrum.m(p) for p in all_paulis(4)) / 256)
        assert abs(vals.mean() - exact) <= 5 * vals.std(ddof=1) / np.sqrt(len(vals))


class TestSnapshotSets:
    def test_empty_and_single(self):
        spec = EnsembleSpec(EnsembleKind.BLOCK, 2, 1)
        rho = basis_state(2)
        assert len(collect_snapshots(rho, spec, 0, np.random.default_rng(0))) == 0
        with pytest.raises(EstimatorError):
            mean_estimator(SnapshotSet(spec), ChannelSpectrum(spec))
        one = collect_snapshots(rho, spec, 1, np.random.default_rng(0))
        spectrum = ChannelSpectrum(spec)
        assert np.allclose(mean_estimator(one, spectrum), snapshot_to_matrix(one.snapshots[0], spectrum))

    def test_identity_tableau_on_zero_state(self):
        probs = outcome_distribution(basis_state(3), CliffordTableau.identity(3))
        assert probs[0] == pytest.approx(1)

    def test_snapshot_validation(self):
        spec = EnsembleSpec(EnsembleKind.BLOCK, 2, 1)
        with pytest.raises(EstimatorError):
            Snapshot(CliffordTableau.identity(3), 0, spec)
        with pytest.raises(EstimatorError):
            Snapshot(CliffordTableau.identity(2), 4, spec)
        other = EnsembleSpec(EnsembleKind.BLOCK, 2, 2)
        with pytest.raises(EstimatorError):
            SnapshotSet(spec).append(Snapshot(CliffordTableau.identity(2), 0, other))

    def test_rejects_mub_spec(self):
        with pytest.raises(EstimatorError):
            collect_snapshots(basis_state(2), EnsembleSpec(EnsembleKind.MUB_PRODUCT, 2, 1), 1, np.random.default_rng(0))

    def test_serialization_roundtrip(self, tmp_path):
        spec = EnsembleSpec(PBC, 4, 2)
        snaps = collect_snapshots(random_rank_r_state(4, 1, np.random.default_rng(1)), spec, 25,
                                  np.random.default_rng(2), master_seed=42)
        save_snapshots(tmp_path / "s.txt", snaps)
        back = load_snapshots(tmp_path / "s.txt")
        assert back.master_seed == 42 and back.spec == spec
        assert back.snapshots == snaps.snapshots

    def test_accumulator_matches_mean(self):
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        snaps = collect_snapshots(maximally_mixed(4), spec, 30, np.random.default_rng(3))
        direct = sum(snapshot_to_matrix(s, spectrum) for s in snaps) / len(snaps)
        assert np.allclose(mean_estimator(snaps, spectrum), direct, atol=1e-12)
        with pytest.raises(EstimatorError):
            PauliAccumulator(2).matrix()


class TestMub:
    def test_shot_count(self):
        data = mub_collect(basis_state(2), 2, 1, 10, np.random.default_rng(0))
        assert len(data.records) == 9
        assert data.total_shots == 90
        data.validate()

    def test_actionable(self):
        assert actionable_count(PauliString.from_label("ZI"), 1) == 3
        assert actionable_count(PauliString.from_label("XY"), 1) == 1
        assert actionable_count(PauliString.from_label("II"), 1) == 9
        assert actionable_count(PauliString.from_label("ZIII"), 2) == 5

    def test_exhaustive_unbiased_n1(self):
        rng = np.random.default_rng(4)
        for r in (1, 2):
            rho = random_rank_r_state(1, r, rng)
            acc = np.zeros((2, 2), complex)
            # all 2^3 outcome combinations with one shot per basis, Born-weighted
            probs = [outcome_distribution(rho, mub_unitary(1, 1, (i,))) for i in range(3)]
            for outs in itertools.product(range(2), repeat=3):
                w = np.prod([probs[i][o] for i, o in enumerate(outs)])
                recs = [MubRecord((i,), np.array([o])) for i, o in enumerate(outs)]
                acc += w * mub_estimator(MubDataset(1, 1, 1, recs))
            assert np.allclose(acc, rho, atol=1e-10)

    def test_trace_one(self):
        rng = np.random.default_rng(5)
        data = mub_collect(random_rank_r_state(4, 3, rng), 4, 2, 5, rng)
        assert np.trace(mub_estimator(data)).real == pytest.approx(1)

    def test_bad_inputs(self):
        with pytest.raises(EstimatorError):
            mub_collect(basis_state(3), 3, 3, 1, np.random.default_rng(0))
        with pytest.raises(EstimatorError):
            mub_collect(basis_state(3), 3, 2, 1, np.random.default_rng(0))
        data = mub_collect(basis_state(2), 2, 1, 2, np.random.default_rng(0))
        data.records.pop()
        with pytest.raises(EstimatorError):
            data.validate()


class TestTwoLayer:
    def test_reduces_to_snapshot(self):
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        rho = random_rank_r_state(4, 2, np.random.default_rng(6))
        est = two_layer_fullrank_estimator(rho, spec, 1, 1, np.random.default_rng(7), spectrum)
        snap = collect_snapshots(rho, spec, 1, np.random.default_rng(7)).snapshots[0]
        assert np.allclose(est, snapshot_to_matrix(snap, spectrum), atol=1e-12)
        assert np.trace(est).real == pytest.approx(1)

    def test_monte_carlo_unbiased(self):
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        rng = np.random.default_rng(8)
        rho = random_rank_r_state(4, 4, rng)
        reps = 1000
        coeffs = np.array([pauli_coefficients(two_layer_fullrank_estimator(rho, spec, 1, 10, rng, spectrum))[2]
                           for _ in range(reps)])
        mean = coeffs.mean(axis=0)
        sigma = coeffs.std(axis=0) / np.sqrt(reps)
        target = pauli_coefficients(rho)[2]
        assert np.all(np.abs(mean - target) <= 5 * sigma + 1e-10)

    def test_rejects(self):
        with pytest.raises(EstimatorError):
            two_layer_fullrank_estimator(basis_state(4), EnsembleSpec(EnsembleKind.BLOCK, 4, 2), 1, 1,
                                         np.random.default_rng(0))
        with pytest.raises(EstimatorError):
            two_layer_fullrank_estimator(basis_state(4), EnsembleSpec(PBC, 4, 2), 0, 1, np.random.default_rng(0))


class TestBiased:
    def test_examples(self):
        spec = EnsembleSpec(EnsembleKind.BLOCK, 1, 1)
        s = Snapshot(CliffordTableau.identity(1), 0, spec)
        assert np.allclose(biased_haar_estimator(s), np.diag([2, -1]))
        spec4 = EnsembleSpec(PBC, 4, 2)
        for s in collect_snapshots(random_rank_r_state(4, 1, np.random.default_rng(1)), spec4, 10,
                                   np.random.default_rng(2)):
            assert np.trace(biased_haar_estimator(s)).real == pytest.approx(1)

    def test_per_sample_ratio(self):
        spec = EnsembleSpec(PBC, 4, 2)
        spectrum = ChannelSpectrum(spec)
        z1 = PauliString.single(4, 0, "Z")
        for s in collect_snapshots(basis_state(4), spec, 50, np.random.default_rng(3)):
            biased = snapshot_pauli_value(s, z1)
            unbiased = snapshot_pauli_value(s, z1, spectrum)
            assert biased == pytest.approx(unbiased * 17 * 13 / 125)
            assert biased == pytest.approx(np.trace(biased_haar_estimator(s) @ to_dense(z1)).real)
            assert unbiased == pytest.approx(np.trace(snapshot_to_matrix(s, spectrum) @ to_dense(z1)).real)

    def test_bias_law_exhaustive_block(self):
        # Block n=2, k=1: E Tr(P rho_biased) = (d+1) m_P Tr(rho P), exact over all 576 unitaries
        spec = EnsembleSpec(EnsembleKind.BLOCK, 2, 1)
        rho = random_rank_r_state(2, 2, np.random.default_rng(4))
        group = enumerate_cl1()
        acc = np.zeros((4, 4), complex)
        for a, b in itertools.product(group, repeat=2):
            u = embed([(a, [0]), (b, [1])], 2)
            probs = outcome_distribution(rho, u)
            for o in range(4):
                acc += probs[o] * biased_haar_estimator(Snapshot(u, o, spec))
        acc /= 576
        spectrum = ChannelSpectrum(spec)
        for p in all_paulis(2):
            if p.is_identity():
                continue
            want = 5 * float(spectrum.m(p)) * np.trace(rho @ to_dense(p)).real
            assert np.trace(acc @ to_dense(p)).real == pytest.approx(want, abs=1e-12)
