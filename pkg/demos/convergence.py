"""Reconstruction error against sample count, written as CSV.

Run: python3 demos/convergence.py [out.csv]

Simulates brickwork shadow tomography of random pure and full-rank states
on 4 qubits and fits the log-log slope of the mean trace distance.
"""
import sys

from shallow_qst.harness import ExperimentConfig, loglog_slope, mean_by_step, rows_to_csv, run_experiment

schedule = (128, 256, 512, 1024, 2048)
rows = []
for rank in (1, 16):
    cfg = ExperimentConfig(n=4, k=2, rank=rank, schedule=schedule, trials=5, seed=11)
    part = run_experiment(cfg)
    rows += part
    t, mean = mean_by_step(part)
    print(f"rank {rank:2d}: " + "  ".join(f"T={int(a)}: {b:.3f}" for a, b in zip(t, mean))
          + f"   slope {loglog_slope(part):+.3f}")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(rows_to_csv(rows))
    print(f"wrote {len(rows)} rows to {sys.argv[1]}")
