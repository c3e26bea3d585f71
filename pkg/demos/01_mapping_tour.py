"""Push a few laws through the kernel mappings and look at what comes out.

Run: python3 demos/01_mapping_tour.py
"""

import numpy as np

from idlaws import (Atoms, Density, GeneratingTriplet, compose_check, eval_cumulant, gamma_fn,
                    is_member, is_member_E_alpha, make_kernel, transform_triplet)

gauss = GeneratingTriplet.gaussian_law([[1.0]])
cp1 = GeneratingTriplet.compound_poisson(Atoms([1.0], [1.0]))
cp_exp = GeneratingTriplet.compound_poisson(Density("exp(-r)"))

print("Gaussian parts scale by the squared integral of the kernel:")
for alpha in (0.5, 1.0, 2.0, 3.0):
    out = transform_triplet(make_kernel("E_alpha", alpha), gauss)
    print(f"  alpha={alpha:<4} A~ = {out.gaussian[0, 0]:.6f}   Gamma(1+2/alpha) = {gamma_fn(1 + 2 / alpha):.6f}")

print("\nA single jump of size 1 becomes a Levy density with tail exp(-r^alpha):")
r = np.array([0.5, 1.0, 2.0])
for alpha in (1.0, 2.0):
    img = transform_triplet(make_kernel("E_alpha", alpha), cp1)
    radial = img.levy.directions[0].radial
    print(f"  alpha={alpha}: tail{r.tolist()} = {np.round(radial.tail(r), 6).tolist()}, drift {img.gamma[0]:+.6f}")
    print(f"    in E_{alpha:g}? {is_member_E_alpha(img.levy, alpha).passed}")

print("\nThe same image, three ways (Phi after E_alpha, E_alpha after Phi, N_alpha):")
z = np.linspace(-3, 3, 13)
for alpha in (1.0, 2.0):
    res = compose_check(alpha, cp_exp, z)
    print(f"  alpha={alpha}: largest disagreement {res['max_discrepancy']:.2e}")

print("\nClass memberships of the Phi image of CP(e^-r dr), whose Levy density is e^-r / r:")
sd = transform_triplet(make_kernel("Phi"), cp_exp)
for tag in ("L", "B", "T"):
    print(f"  class {tag}: {is_member(tag, sd.levy).passed}")
print(f"  cumulant at z=1: {complex(eval_cumulant(sd, 1.0)):.6f}")
