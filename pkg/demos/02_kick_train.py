"""
A train of kicks timed at the orientation maxima
================================================

Starting from the ground state, each kick with area A=1 fires when
<cos theta> peaks.  Between kicks the expectation climbs from about 0.5
towards the efficiency of the best N=4 state.
"""

from rotorkick.propagation import overlap_probability
from rotorkick.scheduler import TrainConfig, run_adaptive_train

result = run_adaptive_train(TrainConfig(area_per_kick=1.0, max_kicks=15), N=4)

print(" kick   time/T_rot   <cos> at kick")
for i, (t, c) in enumerate(zip(result.kick_times, result.maxima_sequence), 1):
    print(f"{i:5d} {t:12.5f} {c:15.5f}")

print(f"\npeak after the train:      {result.post_train_peak:.4f}")
print(f"time above 0.5 per period: {result.post_train_duration:.4f} T_rot")
print(f"overlap with chi_4:        {overlap_probability(result.final_state, result.target):.4f}")
print(f"basis used: l <= {result.final_state.spec.l_max}")

# trajectory columns are ready for plotting elsewhere
traj = result.trajectory
print(f"{len(traj.clock)} samples, populations of l=0..4 plus leaked weight")
