"""Seeded experiments, bias demonstration and verification suites.

Every trial owns a pair of RNG streams spawned from the master seed (state
draw, measurement data), so results do not depend on thread count or
completion order.  Both streams are shared across ranks at equal seed,
which couples runs that differ only in the state.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds as B
from .channel import ChannelSpectrum, m_brickwork, m_from_pattern, monte_carlo_m, _m_two_layer_enumerate
from .clifford import EnsembleKind, EnsembleSpec, embed, enumerate_cl1
from .estimators import (
    PauliAccumulator,
    Snapshot,
    mub_estimator,
    MubDataset,
    MubRecord,
    mub_collect,
    shadow_stream,
    snapshot_to_matrix,
    two_layer_fullrank_estimator,
)
from .pauli import DENSE_LIMIT, PauliString
from .states import all_distances, basis_state, outcome_distribution, pauli_expectation, random_rank_r_state

CSV_VERSION = "shallow-qst-results/1"


class ConfigError(ValueError):
    pass


ESTIMATORS = ("shadow", "mub", "two_layer")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.  ``schedule`` holds T (shadow), M (mub) or N_U (two_layer)."""

    n: int = 4
    k: int = 2
    rank: int = 1
    ensemble: str = "brickwork_pbc"
    estimator: str = "shadow"
    schedule: tuple[int, ...] = (256, 512, 1024)
    trials: int = 1
    seed: int = 0
    shots: int = 1  # N_S for the two-layer estimator
    out: str | None = None
    dense_limit: int = DENSE_LIMIT
    threads: int = 1

    def validate(self) -> None:
        if self.n < 1 or self.k < 1 or self.n % self.k:
            raise ConfigError(f"k={self.k} must divide n={self.n}")
        if self.n > self.dense_limit:
            raise ConfigError(f"n={self.n} exceeds dense limit {self.dense_limit}")
        if not 1 <= self.rank <= (1 << self.n):
            raise ConfigError(f"rank {self.rank} outside [1, {1 << self.n}]")
        try:
            kind = EnsembleKind(self.ensemble)
        except ValueError:
            raise ConfigError(f"unknown ensemble {self.ensemble!r}") from None
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "mub" and kind is not EnsembleKind.MUB_PRODUCT:
            raise ConfigError("mub estimator pairs with the mub_product ensemble")
        if self.estimator != "mub" and kind is EnsembleKind.MUB_PRODUCT:
            raise ConfigError("mub_product ensemble needs the mub estimator")
        if self.estimator == "two_layer" and kind not in (EnsembleKind.BRICKWORK_PBC,
                                                           EnsembleKind.BRICKWORK_OBC_U2SPLIT,
                                                           EnsembleKind.BRICKWORK_OBC_U1SPLIT):
            raise ConfigError("two_layer estimator needs a brickwork ensemble")
        if self.estimator == "mub" and self.k not in (1, 2):
            raise ConfigError("MUB designs are available for k in {1, 2}")
        if kind.value.startswith("brickwork") and (self.k % 2 or self.k < 2):
            raise ConfigError("brickwork ensembles need even k >= 2")
        if not self.schedule:
            raise ConfigError("empty schedule")
        if any(t < 1 for t in self.schedule):
            raise ConfigError("schedule entries must be >= 1 (T=0 has no estimator)")
        if list(self.schedule) != sorted(set(self.schedule)):
            raise ConfigError("schedule must be strictly increasing")
        if self.trials < 1 or self.shots < 1 or self.threads < 1:
            raise ConfigError("trials, shots and threads must be >= 1")

    @property
    def spec(self) -> EnsembleSpec:
        return EnsembleSpec(EnsembleKind(self.ensemble), self.n, self.k)

    def samples_at(self, step: int) -> int:
        """Total measurement shots consumed at schedule value ``step``."""
        if self.estimator == "mub":
            return step * ((1 << self.k) + 1) ** (self.n // self.k)
        if self.estimator == "two_layer":
            return step * self.shots
        return step


_INT_KEYS = {"n", "k", "rank", "trials", "seed", "shots", "dense_limit", "threads"}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; schedule is comma separated."""
    known = {f.name for f in fields(ExperimentConfig)}
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip().replace("-", "_"), val.strip()
        if not sep or key not in known:
            raise ConfigError(f"line {lineno}: cannot parse {raw!r}")
        out[key] = _coerce(key, val)
    return out


def _coerce(key: str, val):
    if key == "schedule":
        if isinstance(val, str):
            val = [v for v in val.replace(",", " ").split() if v]
        try:
            return tuple(int(v) for v in val)
        except ValueError:
            raise ConfigError(f"bad schedule {val!r}") from None
    if key in _INT_KEYS:
        try:
            return int(val)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {val!r}") from None
    return val


def load_config(path=None, **overrides) -> ExperimentConfig:
    """File values first, then non-``None`` overrides (flags win)."""
    values = parse_config_text(Path(path).read_text()) if path else {}
    values.update({k: _coerce(k, v) for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


@dataclass(frozen=True)
class ResultRow:
    n: int
    k: int
    rank: int
    ensemble: str
    estimator: str
    trial: int
    step: int
    samples: int
    trace_dist: float
    frob_dist: float
    op_dist: float
    run_seed: int
    wall_time: float = field(default=0.0, compare=False)


def _trial_streams(seed: int, trials: int):
    out = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        state_ss, data_ss = child.spawn(2)
        out.append((int(child.generate_state(1, np.uint64)[0] >> np.uint64(1)),
                    np.random.default_rng(state_ss), np.random.default_rng(data_ss)))
    return out


def _run_trial(cfg: ExperimentConfig, trial: int, run_seed: int, state_rng, data_rng,
               spectrum: ChannelSpectrum | None) -> list[ResultRow]:
    t0 = time.perf_counter()
    rho = random_rank_r_state(cfg.n, cfg.rank, state_rng, dense_limit=cfg.dense_limit)
    estimates: list[tuple[int, np.ndarray]] = []
    if cfg.estimator == "shadow":
        stream = shadow_stream(rho, cfg.spec, spectrum, data_rng)
        acc = PauliAccumulator(cfg.n)
        for step in cfg.schedule:
            while acc.count < step:
                _, coeffs = next(stream)
                acc.add(*coeffs)
            estimates.append((step, acc.matrix()))
    elif cfg.estimator == "mub":
        full = mub_collect(rho, cfg.n, cfg.k, cfg.schedule[-1], data_rng)
        for step in cfg.schedule:
            part = MubDataset(cfg.n, cfg.k, step, [MubRecord(r.basis_index, r.outcomes[:step]) for r in full.records])
            estimates.append((step, mub_estimator(part)))
    else:
        running = np.zeros((1 << cfg.n, 1 << cfg.n), dtype=complex)
        done = 0
        for step in cfg.schedule:
            chunk = two_layer_fullrank_estimator(rho, cfg.spec, step - done, cfg.shots, data_rng, spectrum)
            running += chunk * (step - done)
            done = step
            estimates.append((step, running / step))
    wall = time.perf_counter() - t0
    rows = []
    for step, est in estimates:
        tr, fr, op = all_distances(est, rho)
        rows.append(ResultRow(cfg.n, cfg.k, cfg.rank, cfg.ensemble, cfg.estimator, trial, step,
                              cfg.samples_at(step), tr, fr, op, run_seed, wall))
    return rows


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """All trials of ``cfg``, ordered by (trial, schedule index)."""
    cfg.validate()
    spectrum = None if cfg.estimator == "mub" else ChannelSpectrum(cfg.spec)
    if spectrum is not None:
        spectrum.inverse_table()  # fill the cache before threads share it
    streams = _trial_streams(cfg.seed, cfg.trials)
    jobs = [(cfg, i, s, a, b, spectrum) for i, (s, a, b) in enumerate(streams)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(lambda j: _run_trial(*j), jobs))
    else:
        parts = [_run_trial(*j) for j in jobs]
    return [row for part in parts for row in part]


def rows_to_csv(rows: list[ResultRow], timing: bool = False) -> str:
    names = [f.name for f in fields(ResultRow) if timing or f.name != "wall_time"]
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        d = asdict(r)
        w.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in names])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def mean_by_step(rows: list[ResultRow], metric: str = "trace_dist") -> tuple[np.ndarray, np.ndarray]:
    steps = sorted({r.samples for r in rows})
    means = [np.mean([getattr(r, metric) for r in rows if r.samples == s]) for s in steps]
    return np.array(steps, dtype=float), np.array(means)


def loglog_slope(rows: list[ResultRow], metric: str = "trace_dist") -> float:
    t, m = mean_by_step(rows, metric)
    return float(np.polyfit(np.log(t), np.log(m), 1)[0])


def samples_to_reach(rows: list[ResultRow], target: float, metric: str = "trace_dist") -> float:
    """Samples at which the fitted power law of the mean distance crosses ``target``."""
    t, m = mean_by_step(rows, metric)
    slope, icpt = np.polyfit(np.log(t), np.log(m), 1)
    return float(np.exp((math.log(target) - icpt) / slope))


# -- bias demonstration ---------------------------------------------------------------

@dataclass(frozen=True)
class BiasReport:
    n: int
    k: int
    pauli: str
    samples: int
    true_value: float
    m_p: Fraction
    predicted_factor: float
    unbiased_mean: float
    unbiased_stderr: float
    biased_mean: float
    biased_stderr: float

    @property
    def unbiased_factor(self) -> tuple[float, float]:
        return self.unbiased_mean / self.true_value, self.unbiased_stderr / abs(self.true_value)

    @property
    def biased_factor(self) -> tuple[float, float]:
        return self.biased_mean / self.true_value, self.biased_stderr / abs(self.true_value)

    def lines(self) -> list[str]:
        out = [f"pauli={self.pauli} n={self.n} k={self.k} samples={self.samples}",
               f"m_P={self.m_p} predicted_factor=(d+1)m_P={self.predicted_factor:.6f}",
               f"true={self.true_value:.6f}",
               f"unbiased={self.unbiased_mean:.6f} +- {self.unbiased_stderr:.6f}",
               f"biased={self.biased_mean:.6f} +- {self.biased_stderr:.6f}"]
        if abs(self.true_value) > 1e-12:
            uf, ue = self.unbiased_factor
            bf, be = self.biased_factor
            out.append(f"unbiased_factor={uf:.6f} +- {ue:.6f}")
            out.append(f"biased_factor={bf:.6f} +- {be:.6f}")
        return out


def run_bias_demo(n: int = 4, k: int = 2, samples: int = 100_000, seed: int = 0,
                  rho: np.ndarray | None = None, pauli: str | None = None) -> BiasReport:
    """Compare unbiased and Haar-inverse estimates of ``Tr(P rho)`` under the brickwork ensemble.

    Defaults to ``P = Z`` on qubit 0 and ``rho = |0...0><0...0|``.
    """
    spec = EnsembleSpec(EnsembleKind.BRICKWORK_PBC, n, k)
    spectrum = ChannelSpectrum(spec)
    p = PauliString.single(n, 0, "Z") if pauli is None else PauliString.from_label(pauli)
    rho = basis_state(n) if rho is None else rho
    rng = np.random.default_rng(seed)
    stream = shadow_stream(rho, spec, spectrum, rng)
    m_p = spectrum.m(p.unsigned())
    inv = float(1 / m_p)
    d = 1 << n
    unb = np.zeros(samples)
    for i in range(samples):
        _, (xs, zs, c) = next(stream)
        hit = np.flatnonzero((xs == p.x) & (zs == p.z))
        if hit.size:
            # c = sign * parity / (d m_P); Tr(P rho_hat) = d c
            unb[i] = p.sign * d * c[hit[0]]
    bia = unb * (d + 1) / inv
    se = math.sqrt(samples)
    return BiasReport(n, k, str(p), samples, pauli_expectation(rho, p), m_p, float((d + 1) * m_p),
                      float(unb.mean()), float(unb.std(ddof=1) / se),
                      float(bia.mean()), float(bia.std(ddof=1) / se))


# -- verification suites -----------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: str
    expected: str


def _fmt(v) -> str:
    if isinstance(v, (tuple, list)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def _chk(name, measured, expected, ok=None) -> Check:
    if ok is None:
        ok = measured == expected
    return Check(name, bool(ok), _fmt(measured), _fmt(expected))


def _close(a, b, tol):
    return abs(float(a) - float(b)) <= tol


def verify_transfer() -> list[Check]:
    out = []
    tp = B.build_transfer(2)
    gb = B.g_brute_force(2)
    for (i, j), lab in zip([(0, 0), (0, 1), (1, 0), (1, 1)], ["bb", "bx", "xb", "xx"]):
        out.append(_chk(f"G[{lab}] tau-sum vs closed form (k=2)", gb[i][j], tp.G[i][j]))
    out.append(_chk("G symmetric", tp.G[0][1], tp.G[1][0]))
    out.append(_chk("F = [[1,1/3],[1/3,1/3]] (k=2)", tp.F, B._mat(1, Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))))
    for k in (2, 4, 6):
        lp, lm = B.lambda_pm(k)
        ep, em = B.eig_pair(B.build_transfer(k).FG)
        out.append(_chk(f"lambda_pm closed form vs eigensolve (k={k})", (lp, lm), (ep, em),
                        _close(lp, ep, 1e-12 * lp) and _close(lm, em, 1e-12 * lp)))
        out.append(_chk(f"lambda_+ <= 2^k + sqrt(5 2^k) (k={k})", lp, (1 << k) + math.sqrt(5 * (1 << k)),
                        lp <= (1 << k) + math.sqrt(5 * (1 << k))))
    lp, lm = B.lambda_pm(2)
    out.append(_chk("lambda_+ + lambda_- = Tr(FG) = 36/5", lp + lm, 7.2, _close(lp + lm, 7.2, 1e-12)))
    out.append(_chk("lambda_+ lambda_- = det F det G = 3.84", lp * lm, 3.84, _close(lp * lm, 3.84, 1e-12)))
    for m in (1, 2, 3, 4):
        out.append(_chk(f"configuration sum = Tr((FG)^m) (m={m})", B.config_sum(tp, m),
                        B.mat_trace(B.mat_pow(tp.FG, m))))
    vb = B.variance_bound_pbc(4, 2)
    out.append(_chk("variance bound n=4 k=2", round(vb, 6), 107.8125, _close(vb, 107.8125, 1e-9)))
    for n in range(2, 33, 2):
        for k in range(2, n + 1, 2):
            if n % k == 0 and k * 2 ** (k / 2) >= n:
                v, env = B.variance_bound_pbc(n, k), B.variance_bound_envelope(n)
                if v > env:
                    out.append(_chk(f"variance bound <= exp(2+sqrt5) 2^(n+1) (n={n},k={k})", v, env, False))
    out.append(_chk("variance bound <= envelope on grid n<=32", "checked", "checked"))
    return out


def verify_channel(mc_samples: int = 20_000, seed: int = 0) -> list[Check]:
    out = []
    spec = EnsembleSpec(EnsembleKind.BRICKWORK_PBC, 4, 2)
    z1 = PauliString.single(4, 0, "Z")
    m = m_brickwork(z1, spec)
    out.append(_chk("m_P(Z1) brickwork PBC n=4 k=2", m, Fraction(13, 125)))
    out.append(_chk("m_P(Z1) = (3 2^k + 1)/(2^k + 1)^3 (k=2)", m, Fraction(3 * 4 + 1, 5 ** 3)))
    est = monte_carlo_m(spec, z1, mc_samples, np.random.default_rng(seed))
    out.append(_chk(f"Monte Carlo m_P(Z1) within 5 sigma ({mc_samples} samples)",
                    f"{est.value:.5f}+-{est.stderr:.5f}", f"{13 / 125:.5f}", est.within(13 / 125)))
    # PBC transfer vs brute enumeration
    for n, k in ((4, 2), (6, 2), (8, 4)):
        sp = EnsembleSpec(EnsembleKind.BRICKWORK_PBC, n, k)
        first, second = sp.layers
        bad = [w for w in _patterns(n // k) if m_from_pattern(sp, w) != _m_two_layer_enumerate(w, first, second)]
        out.append(_chk(f"transfer m_P = enumeration, all patterns (n={n},k={k})", len(bad), 0))
        bad = [w for w in _patterns(n // k) if m_from_pattern(sp, w) != B.m_from_K(w, k)]
        out.append(_chk(f"m_P = Tr(K...K), all patterns (n={n},k={k})", len(bad), 0))
    out.append(_chk("min m_P (n=4,k=2) = 33/625",
                    min(m_from_pattern(spec, w) for w in _patterns(2)), Fraction(33, 625)))
    # exhaustive unbiasedness, block n=2 k=1
    bspec = EnsembleSpec(EnsembleKind.BLOCK, 2, 1)
    bsp = ChannelSpectrum(bspec)
    rng = np.random.default_rng(seed)
    worst = max(_exhaustive_block_error(random_rank_r_state(2, r, rng), bspec, bsp) for r in (1, 2, 4))
    out.append(_chk("exhaustive unbiasedness block n=2 k=1 (max entry error)", f"{worst:.2e}", "<1e-10", worst < 1e-10))
    return out


def _patterns(m: int):
    return list(itertools.product((0, 1), repeat=m))


def _exhaustive_block_error(rho, spec, spectrum) -> float:
    cl1 = enumerate_cl1()
    acc = np.zeros_like(rho)
    for a in cl1:
        for b in cl1:
            u = embed([(a, [0]), (b, [1])], 2)
            pr = outcome_distribution(rho, u)
            for o in range(4):
                if pr[o] > 0:
                    acc += pr[o] * snapshot_to_matrix(Snapshot(u, o, spec), spectrum)
    return float(np.abs(acc / len(cl1) ** 2 - rho).max())


def verify_bounds() -> list[Check]:
    out = []
    out.append(_chk("sum 1/N_P brute force (n=2,k=1)", B.sum_inv_NP_brute(2, 1), Fraction(100, 9)))
    out.append(_chk("sum 1/N_P closed form (n=2,k=1)", B.sum_inv_NP(2, 1), Fraction(100, 9)))
    out.append(_chk("per-basis sum 1/N_P^2 brute force (n=2,k=1)", B.sum_inv_NP_sq_brute(2, 1), Fraction(100, 81)))
    out.append(_chk("per-basis sum 1/N_P^2 closed form (n=2,k=1)", B.sum_inv_NP_sq(2, 1), Fraction(100, 81)))
    out.append(_chk("sum 1/N_P at n=k=1", B.sum_inv_NP_brute(1, 1), Fraction(10, 3)))
    for n, k in ((2, 2), (4, 2), (3, 1), (4, 1)):
        out.append(_chk(f"sum 1/N_P brute = closed (n={n},k={k})", B.sum_inv_NP_brute(n, k), B.sum_inv_NP(n, k)))
    x_u2 = B.build_obc(2, "u2split").boundary_matrix()
    x_u1 = B.build_obc(2, "u1split").boundary_matrix()
    out.append(_chk("Tr(F G~) = 2^(k+1) (k=2)", B.mat_trace(x_u2), B.trace_FGt_closed(2)))
    out.append(_chk("Tr(F~ G) matrices vs stated closed form (k=2)", B.mat_trace(x_u1), B.trace_FtG_closed(2)))
    for x, lab in ((x_u2, "FG~"), (x_u1, "F~G")):
        for m in range(1, 9):
            hc, hd = B.h_closed(x, 2, m), float(B.h_direct(x, 2, m))
            if not _close(hc, hd, 1e-10 * max(1.0, hd)):
                out.append(_chk(f"h({lab}) closed vs direct (m={m})", hc, hd, False))
        out.append(_chk(f"h({lab}) closed = direct, m=1..8", "checked", "checked"))
    for k in range(1, 11):
        mp, mm = B.mu_pm(k)
        ep, em = B.eig_pair(B.build_K(k).K1)
        out.append(_chk(f"mu_pm closed vs eigensolve (k={k})", (mp, mm), (ep, em),
                        _close(mp, ep, 1e-12) and _close(mm, em, 1e-12)))
        z = 1 << k
        out.append(_chk(f"1/mu_+ <= 2^k + 3/(2^k+1) (k={k})", 1 / mp, z + 3 / (z + 1), 1 / mp <= z + 3 / (z + 1)))
    out.append(_chk("min_mp(4,2) = Tr(K1^2) = 33/625", B.min_mp_exact(4, 2), Fraction(33, 625)))
    out.append(_chk("min_mp(4,2) float", B.min_mp(4, 2), 0.0528, _close(B.min_mp(4, 2), 0.0528, 1e-12)))
    for k in (1, 2, 3):
        for m in (1, 2, 3, 4):
            out.append(_chk(f"all-ones pattern minimises K contraction (m={m},k={k})",
                            B.all_ones_is_minimal(m, k), True))
    sc = B.sample_complexity("thm2", 2, 1, None, 0.1, 0.05)
    m_ref = (1 + math.sqrt(2 * math.log(20))) ** 2 * (25 / 9) / (0.01 / 4)
    out.append(_chk("thm2 M (n=2,k=1,eps=0.1,delta=0.05)", sc.components["M"], m_ref,
                    _close(sc.components["M"], m_ref, 1e-9 * m_ref)))
    out.append(_chk("thm2 T = 9 M", sc.T, 9 * m_ref, _close(sc.T, 9 * m_ref, 1e-9 * m_ref)))
    worst = 0.0
    for n in range(1, 13):
        for k in range(1, n + 1):
            if n % k:
                continue
            s = B.sample_complexity("thm2", n, k, None, 0.1, 0.05)
            lhs = s.T * 0.01 / 8 ** n
            rhs = (1 + math.sqrt(2 * math.log(20))) ** 2 * (1 + 2 ** -k) ** (n / k)
            worst = max(worst, lhs / rhs)
    out.append(_chk("thm2 T eps^2 / 8^n <= (1+sqrt(2 ln 1/delta))^2 (1+2^-k)^(n/k), n<=12", worst, "<=1", worst <= 1))
    a = [float(B.A_nk(n, 1)) * 3 ** n for n in range(1, 9)]
    out.append(_chk("A(n,1) 3^n = 5^n", a, [5.0 ** n for n in range(1, 9)],
                    all(_close(x, 5.0 ** n, 1e-9 * 5.0 ** n) for x, n in zip(a, range(1, 9)))))
    for n, k in ((4, 2), (8, 2), (8, 4), (12, 4)):
        env = B.max_inverse_envelope(n, k)
        top = 1 / float(B.min_mp_exact(n, k))
        out.append(_chk(f"max 1/m_P <= envelope (n={n},k={k})", top, env, top <= env + 1e-9))
    return out


SUITES = {"transfer": verify_transfer, "channel": verify_channel, "bounds": verify_bounds}


def run_verify(suite: str = "all") -> list[Check]:
    if suite == "all":
        return [c for name in SUITES for c in SUITES[name]()]
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {sorted(SUITES) + ['all']}")
    return SUITES[suite]()


def checks_to_csv(checks: list[Check]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "status", "measured", "expected"])
    for c in checks:
        w.writerow([c.name, "PASS" if c.passed else "FAIL", c.measured, c.expected])
    return buf.getvalue()
