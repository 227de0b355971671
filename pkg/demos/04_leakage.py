"""
How much does one kick leak out of the subspace?
================================================

Compares the exact population pushed above l=N by one kick applied to
chi_N with the closed-form small-area estimate (A pi)^2 / (2 (N+2)^3).
"""

import numpy as np

from rotorkick.leakage import leakage_exact, leakage_estimate, max_area_for_budget

print(f"{'A':>5} {'N':>3} {'exact':>10} {'estimate':>10} {'ratio':>7}")
for N in (3, 4, 6, 8):
    for A in (0.25, 0.5, 1.0):
        e, g = leakage_exact(A, N), leakage_estimate(A, N)
        print(f"{A:5.2f} {N:3d} {e:10.5f} {g:10.5f} {g / e:7.2f}")

areas = np.array([1e-3, 1e-2, 1e-1])
slope = np.polyfit(np.log(areas), np.log([leakage_exact(a, 4) for a in areas]), 1)[0]
print(f"\nsmall-area log-log slope: {slope:.3f}")
print(f"largest A with estimated leakage 0.02 at N=4: {max_area_for_budget(0.02, 4):.3f}")
