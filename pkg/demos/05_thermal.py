"""
A thermal sample driven by one field
====================================

At finite temperature every initial |l0, m> evolves under the same kicks,
so the kicks are timed at maxima of the Boltzmann-weighted average.  Here
LiCl at 5 K, A=2, compared with the best each m sector could do on its own.
"""

from rotorkick.scheduler import TrainConfig
from rotorkick.thermal import build_ensemble, run_thermal_train, thermal_optimal_bound
from rotorkick.units import get_molecule, kelvin_to_ratio

licl = get_molecule("LiCl")
ratio = kelvin_to_ratio(licl, 5.0)
ensemble = build_ensemble(ratio)
print(f"B/kT = {ratio:.4f}, levels up to l={ensemble.l_cut}, {len(ensemble.members)} members")

for kicks in (1, 5, 10, 15):
    traj = run_thermal_train(ensemble, TrainConfig(2.0, max_kicks=kicks), N=7)
    print(f"{kicks:3d} kicks: peak {traj.post_train_peak:.4f}, above 0.5 for {traj.post_train_duration:.4f} T_rot")

print(f"bound with each sector in its N=7 optimum: {thermal_optimal_bound(7, ensemble):.4f}")
