"""Variance bounds and sample-count formulas.

Run: python3 demos/bounds_tour.py
"""
from shallow_qst import bounds as B

tp = B.build_transfer(2)
print("F =", [[str(v) for v in row] for row in tp.F])
print("G (closed form) =", [[str(v) for v in row] for row in tp.G])
print("G (tau sum)     =", [[str(v) for v in row] for row in B.g_brute_force(2)])
print("lambda_pm(2) =", B.lambda_pm(2))

for n in (4, 8, 12, 16):
    print(f"n={n:2d}: second-moment bound {B.variance_bound_pbc(n, 2):12.2f}"
          f"  (tau-sum G: {B.variance_bound_pbc(n, 2, B.transfer_from_tau(2)):12.2f})"
          f"  envelope {B.variance_bound_envelope(n):12.1f}")

print("\nsample counts at eps=0.1, delta=0.05")
for theorem, r in (("thm1", 1), ("thm2", None), ("appf", None)):
    for n in (4, 8):
        sc = B.sample_complexity(theorem, n, 2, r, 0.1, 0.05)
        print(f"  {theorem} n={n}: T = {sc.T_int:.3e}")
