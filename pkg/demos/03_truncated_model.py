"""
The maxima strategy inside a closed subspace
============================================

If the dynamics never left the N+1 lowest levels, a kick would not change
<C_N> at the instant it is applied, and the next maximum could only be
higher.  The sequence therefore increases monotonically to a fixed point,
the top eigenvector chi_N.
"""

import numpy as np

from rotorkick.basis import BasisSpec
from rotorkick.propagation import RotorState, free_evolve, overlap_probability
from rotorkick.scheduler import TrainConfig, find_next_maximum, run_kick_train, slope_jump
from rotorkick.targets import optimal_state_exact

sub = BasisSpec(0, 4)
chi = optimal_state_exact(0, 4)
cfg = TrainConfig(1.0, max_kicks=2000, convergence_tol=1e-12, overflow_tol=None)
res = run_kick_train(RotorState.ground(sub), cfg, chi)

seq = res.maxima_sequence
for k in (1, 2, 5, 15, 50, 200, len(seq)):
    print(f"after {k:4d} kicks: C = {seq[k - 1]:.6f}")
print(f"top eigenvalue:       {chi.efficiency:.6f}")
print(f"monotone: {bool(np.all(np.diff(seq) >= -1e-12))}")
print(f"overlap with chi_4: {overlap_probability(res.final_state, chi):.6f}")

# away from the fixed point a kick turns a zero slope into a finite one
early = run_kick_train(RotorState.ground(sub), TrainConfig(1.0, max_kicks=3, overflow_tol=None)).final_state
at_max = free_evolve(early, find_next_maximum(early)[0])
print("slope before/after kick, early in the train:", slope_jump(at_max, 1.0, 4))
print("slope before/after kick, at chi_4:", slope_jump(chi.state, 1.0, 4))
