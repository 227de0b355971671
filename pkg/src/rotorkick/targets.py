"""Optimally oriented states of the truncated subspaces and their figures of merit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .basis import BasisSpec, CosineOperator
from .propagation import OrientationSignal, RotorState, cosine_operator, orientation_signal

__all__ = [
    "DURATION_THRESHOLD",
    "TargetState",
    "EfficiencyDurationRow",
    "optimal_state_exact",
    "optimal_state_approx",
    "top_eigenpair",
    "orientation_duration",
    "signal_window",
    "efficiency_duration_table",
]

DURATION_THRESHOLD = 0.5


@dataclass(frozen=True)
class TargetState:
    state: RotorState
    efficiency: float
    N: int
    m: int


@dataclass(frozen=True)
class EfficiencyDurationRow:
    N: int
    efficiency: float
    duration_fraction: float
    efficiency_estimate: float


def top_eigenpair(op: CosineOperator) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of ``op`` and its eigenvector with positive entries."""
    w, v = op.eigh()
    vec = v[:, -1]
    # Perron-Frobenius: fix the sign so every amplitude is positive
    vec = vec * np.sign(vec.sum())
    return float(w[-1]), vec


def optimal_state_exact(m: int, N: int) -> TargetState:
    """Top eigenvector of cos(theta) restricted to l = |m| .. |m|+N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    spec = BasisSpec(m, abs(m) + N)
    eff, vec = top_eigenpair(cosine_operator(spec))
    return TargetState(RotorState(spec, vec), eff, N, m)


def optimal_state_approx(m: int, N: int) -> TargetState:
    """Sine-profile approximation obtained with all couplings set to 1/2.

    The efficiency reported is cos(pi/(N+2)), the eigenvalue of that
    approximate operator.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    spec = BasisSpec(m, abs(m) + N)
    k = np.arange(N + 1)
    amps = np.sin(np.pi * (k + 1) / (N + 2))
    amps /= np.linalg.norm(amps)
    return TargetState(RotorState(spec, amps), float(np.cos(np.pi / (N + 2))), N, m)


def orientation_duration(
    state: RotorState,
    threshold: float = DURATION_THRESHOLD,
    grid_points: int = 4096,
    xtol: float = 1e-7,
) -> float:
    """Length (in T_rot) of the super-threshold window around the orientation peak.

    The window is the contiguous interval containing the global maximum of
    <cos(theta)>(x) over one period on which the signal stays at or above
    ``threshold``.  Crossings are located on the grid and refined by
    bisection.  Returns 0 if the peak stays below threshold.
    """
    return signal_window(orientation_signal(state), threshold, grid_points, xtol)


def signal_window(
    signal: OrientationSignal,
    threshold: float = DURATION_THRESHOLD,
    grid_points: int = 4096,
    xtol: float = 1e-7,
) -> float:
    """Super-threshold window length around the global maximum of a periodic signal."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    x = np.arange(grid_points) / grid_points
    y = signal(x)
    i = int(np.argmax(y))
    if y[i] < threshold:
        return 0.0
    above = y >= threshold
    if above.all():
        return 1.0
    f = lambda t: float(signal(t)) - threshold
    dx = 1.0 / grid_points
    # walk (periodically) to the first sub-threshold sample on each side
    j = 1
    while above[(i + j) % grid_points]:
        j += 1
    right = optimize.bisect(f, (i + j - 1) * dx, (i + j) * dx, xtol=xtol)
    j = 1
    while above[(i - j) % grid_points]:
        j += 1
    left = optimize.bisect(f, (i - j) * dx, (i - j + 1) * dx, xtol=xtol)
    return float(right - left)


def efficiency_duration_table(
    N_min: int, N_max: int, m: int = 0, threshold: float = DURATION_THRESHOLD
) -> list[EfficiencyDurationRow]:
    if not 1 <= N_min <= N_max <= 20:
        raise ValueError("need 1 <= N_min <= N_max <= 20")
    rows = []
    for N in range(N_min, N_max + 1):
        target = optimal_state_exact(m, N)
        rows.append(
            EfficiencyDurationRow(
                N,
                target.efficiency,
                orientation_duration(target.state, threshold),
                float(np.cos(np.pi / (N + 2))),
            )
        )
    return rows
