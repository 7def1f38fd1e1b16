"""Why the inverse channel matters.

Run: python3 demos/bias.py

Estimates <Z on qubit 0> for |0000> from brickwork snapshots twice: once
with the exact inverse channel and once with the global-Haar inverse
(d+1) U^+|b><b|U - I.  The second is off by the factor (d+1) m_P.
"""
from shallow_qst.harness import run_bias_demo

report = run_bias_demo(n=4, k=2, samples=20_000, seed=3)
print("\n".join(report.lines()))
