"""
Optimally oriented states of a truncated rotor
==============================================

Inside the lowest N+1 levels at fixed m, the best achievable <cos theta> is
the top eigenvalue of the truncated cosine operator.  This script tabulates
that efficiency, the sine-profile approximation, and how long the state
stays above <cos theta> = 0.5 during free rotation.
"""

import numpy as np

from rotorkick.propagation import overlap_probability
from rotorkick.targets import efficiency_duration_table, optimal_state_approx, optimal_state_exact

print(f"{'N':>3} {'efficiency':>11} {'cos(pi/(N+2))':>14} {'duration/T_rot':>15}")
for row in efficiency_duration_table(1, 10):
    print(f"{row.N:>3} {row.efficiency:>11.5f} {row.efficiency_estimate:>14.5f} {row.duration_fraction:>15.4f}")

# the sine profile is already a very good approximation of the exact eigenvector
chi = optimal_state_exact(0, 4)
approx = optimal_state_approx(0, 4)
print("\namplitudes of chi_4:", np.round(chi.state.amplitudes.real, 4))
print("overlap with sine profile:", round(overlap_probability(approx.state, chi), 5))
