"""Command-line entry point: ``shallow-qst <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds as B
from . import pauli as _pauli
from .channel import ChannelSpectrum, monte_carlo_m, monte_carlo_tau, tau_block, tau_full
from .clifford import EnsembleKind, EnsembleSpec
from .harness import checks_to_csv, load_config, rows_to_csv, run_bias_demo, run_experiment, run_verify
from .pauli import BlockPartition, PauliString

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--threads", type=int, default=None, help="worker threads")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--dense-limit", type=int, default=None, help="largest n for dense matrices")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_row(row: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(row))
    w.writerow([str(v) if isinstance(v, Fraction) else v for v in row.values()])
    return buf.getvalue()


def cmd_simulate(a) -> int:
    cfg = load_config(a.config, n=a.n, k=a.k, rank=a.rank, ensemble=a.ensemble, estimator=a.estimator,
                      schedule=a.schedule, trials=a.trials, seed=a.seed, shots=a.shots, out=a.out,
                      dense_limit=a.dense_limit, threads=a.threads)
    _emit(rows_to_csv(run_experiment(cfg), timing=a.timing), cfg.out)
    return EXIT_OK


def cmd_bounds(a) -> int:
    sc = B.sample_complexity(a.theorem, a.n, a.k, a.r, a.eps, a.delta, n_shots=a.shots)
    _emit(_csv_row(sc.row()), a.out)
    return EXIT_OK


def _ensemble(kind: str, n: int, k: int) -> EnsembleSpec:
    try:
        return EnsembleSpec(EnsembleKind(kind), n, k)
    except ValueError as e:
        raise _pauli.PauliError(str(e)) from None


def cmd_mp(a) -> int:
    p = PauliString.from_label(a.pauli)
    spec = _ensemble(a.ensemble, p.n_qubits, a.k)
    m = ChannelSpectrum(spec).m(p.unsigned())
    row = {"pauli": a.pauli, "ensemble": a.ensemble, "n": p.n_qubits, "k": a.k, "m_P": m, "m_P_float": float(m)}
    if a.mc:
        est = monte_carlo_m(spec, p, a.mc, np.random.default_rng(a.seed or 0))
        row.update(mc=est.value, mc_stderr=est.stderr, mc_within_5sigma=est.within(float(m)))
    _emit(_csv_row(row), a.out)
    return EXIT_OK


def cmd_tau(a) -> int:
    p, q = PauliString.from_label(a.p), PauliString.from_label(a.q)
    n = p.n_qubits
    if a.k is None or a.k == n:
        val = tau_full(p, q, n)
        spec = None
    else:
        val = tau_block(p, q, BlockPartition(n, a.k))
        spec = EnsembleSpec(EnsembleKind.BLOCK, n, a.k)
    row = {"P": a.p, "Q": a.q, "n": n, "k": a.k or n, "tau": val, "tau_float": float(val)}
    if a.mc:
        spec = spec or EnsembleSpec(EnsembleKind.BLOCK, n, n)
        est = monte_carlo_tau(spec, p, q, a.mc, np.random.default_rng(a.seed or 0))
        row.update(mc=est.value, mc_stderr=est.stderr, mc_within_5sigma=est.within(float(val)))
    _emit(_csv_row(row), a.out)
    return EXIT_OK


def cmd_bias_demo(a) -> int:
    rep = run_bias_demo(a.n, a.k, a.samples, a.seed or 0, pauli=a.pauli)
    _emit("\n".join(rep.lines()) + "\n", a.out)
    return EXIT_OK


def cmd_verify(a) -> int:
    checks = run_verify(a.suite)
    _emit(checks_to_csv(checks), a.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="shallow-qst", description="Shallow-Clifford shadow tomography toolkit.")
    sub = top.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="seeded tomography runs, CSV out")
    s.add_argument("--config", help="flat key = value file; flags override it")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--rank", type=int)
    s.add_argument("--ensemble", choices=[e.value for e in EnsembleKind])
    s.add_argument("--estimator", choices=["shadow", "mub", "two_layer"])
    s.add_argument("--schedule", help="comma separated T (or M, or N_U) values")
    s.add_argument("--trials", type=int)
    s.add_argument("--shots", type=int, help="N_S per unitary (two_layer)")
    s.add_argument("--timing", action="store_true", help="add a wall_time column (breaks byte reproducibility)")
    _common(s)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bounds", help="sample-complexity calculator")
    b.add_argument("--theorem", choices=[t.value for t in B.Theorem], required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--r", type=int)
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--shots", type=int, help="N_S for appf (default 2^n)")
    _common(b)
    b.set_defaults(func=cmd_bounds)

    m = sub.add_parser("mp", help="exact shadow-channel eigenvalue m_P")
    m.add_argument("--pauli", required=True, help="label such as ZIII")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--ensemble", default="brickwork_pbc", choices=[e.value for e in EnsembleKind])
    m.add_argument("--mc", type=int, default=0, help="also run this many Monte Carlo samples")
    _common(m)
    m.set_defaults(func=cmd_mp)

    t = sub.add_parser("tau", help="Pauli correlation tau(P, Q)")
    t.add_argument("--p", required=True)
    t.add_argument("--q", required=True)
    t.add_argument("--k", type=int, help="block size (default: full Clifford group)")
    t.add_argument("--mc", type=int, default=0)
    _common(t)
    t.set_defaults(func=cmd_tau)

    d = sub.add_parser("bias-demo", help="unbiased vs Haar-inverse Pauli estimates")
    d.add_argument("--n", type=int, default=4)
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--samples", type=int, default=100_000)
    d.add_argument("--pauli", default=None, help="default: Z on qubit 0")
    _common(d)
    d.set_defaults(func=cmd_bias_demo)

    v = sub.add_parser("verify", help="oracle suites; exit 2 on any failure")
    v.add_argument("suite", nargs="?", default="all", choices=["transfer", "channel", "bounds", "all"])
    _common(v)
    v.set_defaults(func=cmd_verify)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.dense_limit is not None:
        _pauli.DENSE_LIMIT = args.dense_limit
    try:
        return args.func(args)
    except (ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
