"""
When is a pulse a kick?
=======================

A sin^2 pulse of area A and length epsilon (in units of hbar/B) is
integrated by split-step propagation and compared with the instantaneous
kick exp(iA cos theta).  The difference shrinks linearly with epsilon.
The last lines convert a physical LiCl pulse to reduced units.
"""

import numpy as np

from rotorkick.propagation import sudden_deviation
from rotorkick.units import PhysicalPulse, get_molecule, physical_to_reduced

eps = np.array([0.04, 0.02, 0.01, 0.005])
dev = np.array([sudden_deviation(1.0, e, 4000, 24) for e in eps])
for e, d in zip(eps, dev):
    print(f"epsilon {e:6.3f}: max amplitude error {d:.2e}")
print(f"fitted exponent: {np.polyfit(np.log(eps), np.log(dev), 1)[0]:.3f}")

licl = get_molecule("LiCl")
A, epsilon = physical_to_reduced(licl, PhysicalPulse.from_units("0.3 ps", "1.5e5 V/cm"))
print(f"\nLiCl, 0.3 ps at 1.5e5 V/cm: A = {A:.3f}, epsilon = {epsilon:.4f}")
print(f"rotational period: {licl.rotational_period * 1e12:.2f} ps")
