"""Shadow-channel eigenvalues for shallow brickwork circuits.

Run: python3 demos/channel_eigenvalues.py

Prints exact m_P for a few Paulis on n=4, k=2 (periodic brickwork), checks
one of them by Monte Carlo, and shows that the all-ones support pattern is
the hardest one to invert.
"""
import itertools

import numpy as np

from shallow_qst import bounds
from shallow_qst.channel import ChannelSpectrum, m_from_pattern, monte_carlo_m
from shallow_qst.clifford import EnsembleKind, EnsembleSpec
from shallow_qst.pauli import PauliString

spec = EnsembleSpec(EnsembleKind.BRICKWORK_PBC, 4, 2)
spectrum = ChannelSpectrum(spec)

print("exact eigenvalues, n=4 k=2 periodic brickwork")
for label in ("IIII", "ZIII", "ZZII", "IZZI", "ZIZI", "XYZX"):
    m = spectrum.m(PauliString.from_label(label))
    print(f"  {label}: m_P = {m} ({float(m):.5f}), 1/m_P = {float(1 / m):.3f}")

est = monte_carlo_m(spec, PauliString.from_label("ZIII"), 20_000, np.random.default_rng(0))
print(f"\nMonte Carlo m_P(ZIII) over {est.samples} circuits: {est.value:.4f} +- {est.stderr:.4f}")

# m_P only depends on which first-layer blocks P touches
print("\nby first-layer support pattern, n=8 k=2")
spec8 = EnsembleSpec(EnsembleKind.BRICKWORK_PBC, 8, 2)
for pat in itertools.product((0, 1), repeat=4):
    print(f"  {pat}: {m_from_pattern(spec8, pat)}  (K contraction: {bounds.m_from_K(pat, 2)})")
print(f"minimum = {bounds.min_mp_exact(8, 2)} at the all-ones pattern")
