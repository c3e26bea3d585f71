"""Mixing measures and the monotone integrands that represent them.

A mixing measure Q determines a nonincreasing step integrand h_Q; integrating
h_Q against the compound Poisson driver reproduces the completely monotone
Levy density built from Q.  This demo walks the round trip, checks the tail
identity, and shows where one-sided representation breaks down.

Run: python3 demos/02_integrands.py
"""

import numpy as np

from idlaws import (DomainError, MixingMeasure, Q_from_h, dom_classify, h_from_Q, interleave,
                    levy_tail_of_integral, represent_one_sided, tail_identity_check, validate_Q)

Q = MixingMeasure([(1.0, 1.0), (2.0, 1.0)])
h = h_from_Q(Q, 1.0)
print("Q = delta_1 + delta_2 gives the steps", h.to_dict()["steps"])
print("tail identity error:", tail_identity_check(Q, h, 1.0))
back = Q_from_h(h, 1.0)
print("recovered Q:", back.to_dict()["atoms"])

print("\nDomain levels for the symmetric (Y) and one-sided (Z) drivers:")
for integ in ("Y_alpha", "Z_alpha"):
    print(f"  {integ}: {dom_classify(h, integ, 1.0).level}")

print("\nLevy tails of the integral, r = 0.5, 1, 2:")
print("  ", [round(levy_tail_of_integral(h, 1.0, r), 6) for r in (0.5, 1.0, 2.0)])

print("\nAlternating h with itself gives a symmetric integral:")
sym = interleave(h, h)
print("  + side", round(levy_tail_of_integral(sym, 1.0, 1.0, "+"), 6),
      "  - side", round(levy_tail_of_integral(sym, 1.0, 1.0, "-"), 6))
t = np.array([0.6, 0.9, 1.2, 1.8, 2.5, 3.5])
print("  values at", t.tolist(), "->", sym(t).tolist())

print("\nA mixing measure with infinite variation: delta_1 + t^1.5 dt on (1, inf)")
W = MixingMeasure([(1.0, 1.0)], expr="t^1.5", lo=1.0)
print("  Levy condition:", validate_Q(W, 1.0, "levy").ok,
      "  bounded variation:", validate_Q(W, 1.0, "bv").ok)
try:
    represent_one_sided(W, 1.0)
except DomainError as exc:
    print("  refused:", exc)
    print("  the candidate is only", exc.verdict.level, "for Z;",
          dom_classify(exc.h, "Y_alpha", 1.0).level, "for Y")
