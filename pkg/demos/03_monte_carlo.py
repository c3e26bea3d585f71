"""Sample mapped laws and stochastic integrals, then compare against quadrature.

Run: python3 demos/03_monte_carlo.py [n]
"""

import sys

import numpy as np

from idlaws import (Atoms, CMRep, GeneratingTriplet, MixingMeasure, ecf_compare, h_from_Q, make_kernel,
                    sample_integral, simulate_mapped_law, symmetric_cp_triplet)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
cp1 = GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0]))

print(f"n = {n}; CLT-scale noise 3/sqrt(n) = {3 / np.sqrt(n):.4f}\n")
for name, alpha, method in (("E_alpha", 1.0, "direct"), ("E_alpha", 1.0, "reversed"),
                            ("E_alpha", 2.0, "direct"), ("Phi", None, "direct")):
    k = make_kernel(name, alpha)
    x = simulate_mapped_law(k, cp1, n=n, seed=42, method=method)
    rep = ecf_compare(x, cp1, kernel=k)
    print(f"{k.label:>12} ({method:8}) ECF gap {rep.max_abs_gap:.4f}")

k1, k2 = make_kernel("E_alpha", 1.0), make_kernel("E_alpha", 2.0)
x = simulate_mapped_law(k1, cp1, n=n, seed=42)
print(f"\nE_1 samples against the E_2 model: gap {ecf_compare(x, cp1, kernel=k2).max_abs_gap:.4f} (should be large)")

Q = MixingMeasure.delta(1.0)
s = sample_integral(h_from_Q(Q, 1.0), "Y_alpha", 1.0, n=n, seed=42)
rep = ecf_compare(s.values, symmetric_cp_triplet(CMRep(1.0, Q)))
print(f"\nintegral of h_Q against Y: horizon {s.horizon}, ECF gap {rep.max_abs_gap:.4f}")
print("\n  z      ECF               model")
for row in list(rep.rows())[::3]:
    z, er, ei, mr, mi, _ = row
    print(f"  {z:+.1f}  {er:+.4f}{ei:+.4f}i  {mr:+.4f}{mi:+.4f}i")
