"""The number-resolving detector's single-photon measurement operator.

The nanowire is modeled as a splitter tree over 2^k ports with a threshold
detector per port.  Its "exactly one photon" outcome is diagonal in photon
number; imperfect splitting and loss leak higher Fock states into it.  The
fitted effective depth of the real device is 2.55 at 71% efficiency.
"""

import numpy as np

from heraldkit import eta_pnr, normalize_pi_one, pi_one_coefficients

DETECTOR_ETA = 0.71
DETECTOR_DEPTH = 2.55

# %% coefficients of the single-photon outcome
element = pi_one_coefficients(DETECTOR_ETA, DETECTOR_DEPTH, n_max=12)
shown = normalize_pi_one(element)
print("normalized single-photon element (display convention):")
for n in range(1, 7):
    print(f"  |{n}><{n}|  {shown.coeffs[n]:.4f}")

print(f"\nraw c_1 (equals the detector efficiency): {element.coeffs[1]:.3f}")
print(f"single-photon discrimination efficiency:  {eta_pnr(element):.3f}")

# %% how depth and efficiency move the discrimination power
# (the unnormalized series can push the value below zero for shallow,
# lossy trees; the quantity is only meaningful near the ideal corner)
print("\ndiscrimination efficiency grid:")
depths = (1.0, 2.0, 2.55, 4.0, 8.0)
etas = (0.5, 0.71, 0.9)
header = "  depth " + "".join(f"  eta={e:4}" for e in etas)
print(header)
for depth in depths:
    row = [eta_pnr(pi_one_coefficients(eta, depth, n_max=20)) for eta in etas]
    print(f"  {depth:5}" + "".join(f"   {v:.4f}" for v in row))

# %% a tree six levels deep nearly saturates at this efficiency
best = eta_pnr(pi_one_coefficients(DETECTOR_ETA, 20.0, n_max=30))
print(f"\ndepth-20 tree at eta={DETECTOR_ETA}: {best:.4f} (loss-limited ceiling)")
