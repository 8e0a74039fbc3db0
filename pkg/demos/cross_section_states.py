# Ground states of the cross-section problem on (-1/2, 1/2).
#
# The 1D problem anchors everything else: its first eigenvalue mu1 is the
# reference level every cylinder eigenvalue is compared against, and its
# eigenfunction W seeds the solvers and the gap diagnostics.

import numpy as np

import cylspectra as cs

identity = cs.make_coefficients(cs.CoefficientFamily(cs.FamilyKind.IDENTITY))

print("plain cross-section problem (a22 = 1), nx2 = 64")
print(f"{'p':>4} {'mu1':>12} {'poincare':>10}   reference")
for p in (2.0, 2.5, 3.0, 4.0):
    cross = cs.cross_section_ground_state(64, identity, p)
    if p == 2:
        ref = f"pi^2 = {np.pi**2:.6f}"
    else:
        pi_p = 2 * np.pi / (p * np.sin(np.pi / p))
        ref = f"(p-1) pi_p^p = {(p - 1) * pi_p**p:.6f}"
    print(f"{p:4.1f} {cross.mu1:12.6f} {cross.poincare_cp:10.6f}   {ref}")

# a nonconstant diffusion coefficient across the section raises mu1
bumped = cs.CoefficientField(
    lambda x2: np.ones_like(np.asarray(x2, dtype=float)),
    lambda x2: np.zeros_like(np.asarray(x2, dtype=float)),
    lambda x2: 1.0 + 0.5 * np.cos(np.pi * np.asarray(x2, dtype=float)) ** 2,
    label="bumped")
cross_b = cs.cross_section_ground_state(64, bumped, 2)
print(f"\nbumped a22:   mu1 = {cross_b.mu1:.6f} (plain: {np.pi**2:.6f})")

# the p = 2 eigenfunction is the cosine, printed at a few stations
cross2 = cs.cross_section_ground_state(64, identity, 2)
print("\nW(x2) against sqrt(2) cos(pi x2):")
for i in range(0, 65, 16):
    x2 = cross2.x2_nodes[i]
    print(f"  x2 = {x2:+.3f}: W = {cross2.w_nodes[i]:+.6f}  "
          f"cos ref = {np.sqrt(2) * np.cos(np.pi * x2):+.6f}")
