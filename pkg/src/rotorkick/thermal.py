"""Thermal ensembles: Boltzmann mixtures over (l0, m) driven by one shared field.

Every |l0, m> member of the initial density matrix evolves as a pure state,
which is exact because the initial density matrix is diagonal in |l, m> and
the dynamics is unitary.  Members with opposite m behave identically, so
propagation is folded onto |m| sectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec
from .propagation import (
    OrientationSignal,
    amplitude_signal,
    expectation_cos,
    free_phases,
    make_kick_propagator,
)
from .scheduler import BasisOverflowError, TrainConfig, maximize_signal
from .targets import optimal_state_exact, signal_window

__all__ = [
    "ThermalEnsemble",
    "ThermalTrajectory",
    "build_ensemble",
    "thermal_expectation",
    "run_thermal_train",
    "thermal_optimal_bound",
]

L_CAP = 64


@dataclass(frozen=True)
class ThermalEnsemble:
    """Members (l0, m, weight); ``temperature_ratio`` is B/(k_B T)."""

    members: tuple[tuple[int, int, float], ...]
    temperature_ratio: float
    l_cut: int
    m_cut: int
    residual: float

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.members])

    def sectors(self) -> dict[int, list[tuple[int, float]]]:
        """Members folded onto |m|: {|m|: [(l0, summed weight), ...]}."""
        out: dict[int, dict[int, float]] = {}
        for l0, m, w in self.members:
            sec = out.setdefault(abs(m), {})
            sec[l0] = sec.get(l0, 0.0) + w
        return {am: sorted(sec.items()) for am, sec in sorted(out.items())}


def _boltzmann(ratio: float, l: np.ndarray) -> np.ndarray:
    e = (l * (l + 1)).astype(float)
    with np.errstate(invalid="ignore", over="ignore"):
        f = np.exp(-ratio * e)
    return np.where(e == 0, 1.0, f)


def build_ensemble(temperature_ratio: float, weight_floor: float = 1e-6, l_cap: int = L_CAP) -> ThermalEnsemble:
    """Boltzmann ensemble truncated once the discarded weight drops below ``weight_floor``."""
    if not temperature_ratio > 0:
        raise ValueError("temperature_ratio must be positive")
    l_all = np.arange(0, 20 * l_cap)
    level = (2 * l_all + 1) * _boltzmann(temperature_ratio, l_all)
    z_total = level.sum()
    tail = z_total - np.cumsum(level)
    fine = np.flatnonzero(tail / z_total < weight_floor)
    l_cut = int(fine[0])
    if l_cut > l_cap:
        raise ValueError(
            f"temperature too high: Boltzmann sum needs l_cut={l_cut} > cap {l_cap}"
        )
    z = level[: l_cut + 1].sum()
    members = []
    for l0 in range(l_cut + 1):
        w = float(_boltzmann(temperature_ratio, np.array([l0]))[0] / z)
        members.extend((l0, m, w) for m in range(-l0, l0 + 1))
    return ThermalEnsemble(tuple(members), float(temperature_ratio), l_cut, l_cut,
                           float(tail[l_cut] / z_total))


def thermal_expectation(states, weights) -> float:
    """Weighted sum of member orientations."""
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights):
        raise ValueError("one weight per state is required")
    return float(sum(w * expectation_cos(s) for s, w in zip(states, weights)))


@dataclass
class ThermalTrajectory:
    clock: np.ndarray
    value: np.ndarray
    kick_times: np.ndarray
    maxima_sequence: np.ndarray
    post_train_peak: float
    post_train_duration: float
    sector_values: dict[int, np.ndarray] = field(default_factory=dict)
    final_sectors: dict[int, tuple[BasisSpec, np.ndarray, np.ndarray]] = field(
        default_factory=dict, repr=False
    )


class _Sector:
    def __init__(self, am: int, members: list[tuple[int, float]], extra: int, area: float):
        l_top = max(l0 for l0, _ in members)
        self.spec = BasisSpec(am, l_top + extra)
        self.weights = np.array([w for _, w in members])
        self.amps = np.zeros((self.spec.dimension, len(members)), dtype=complex)
        for j, (l0, _) in enumerate(members):
            self.amps[l0 - am, j] = 1.0
        self.kick = make_kick_propagator(self.spec, area).matrix

    def signal(self) -> OrientationSignal:
        return amplitude_signal(self.spec, self.amps, self.weights)


def run_thermal_train(
    ensemble: ThermalEnsemble,
    config: TrainConfig,
    N: int = 7,
    l_extra: int | None = None,
    diagnostics: bool = False,
) -> ThermalTrajectory:
    """Maxima strategy on the ensemble average with kick times shared by all members.

    Each |m| sector is propagated in l = |m| .. max(l0) + ``l_extra``
    (default 4N+8).
    """
    extra = 4 * N + 8 if l_extra is None else l_extra
    sectors = [_Sector(am, mem, extra, config.area_per_kick) for am, mem in ensemble.sectors().items()]
    spp = config.samples_per_period
    clock = 0.0
    kicks, maxima = [], []
    t_parts, v_parts = [], []
    s_parts: dict[int, list] = {s.spec.m: [] for s in sectors}

    def total():
        sig = OrientationSignal(np.zeros(1))
        for s in sectors:
            sig = sig + s.signal()
        return sig

    def record(duration, endpoint=False):
        offs = np.arange(int(np.ceil(duration * spp - 1e-9))) / spp
        if endpoint:
            offs = np.append(offs, duration)
        t_parts.append(clock + offs)
        v_parts.append(total()(offs))
        if diagnostics:
            for s in sectors:
                s_parts[s.spec.m].append(s.signal()(offs))

    for k in range(config.max_kicks):
        sig = total()
        if k == 0 and sig.is_constant():
            dx, value = 0.0, float(sig(0.0))
        else:
            dx, value = maximize_signal(sig, config.horizon, config.grid_points, config.mode)
        if maxima and abs(value - maxima[-1]) < config.convergence_tol:
            break
        record(dx)
        for s in sectors:
            s.amps = s.kick @ (free_phases(s.spec, dx)[:, None] * s.amps)
            edge = float(np.max(np.abs(s.amps[-1]) ** 2))
            if config.overflow_tol is not None and edge > config.overflow_tol:
                raise BasisOverflowError(
                    f"kick {k + 1}, sector |m|={s.spec.m}: top-level population {edge:.2e}"
                )
        clock += dx
        kicks.append(clock)
        maxima.append(value)
    record(1.0, endpoint=True)
    sig = total()
    grid = np.arange(config.grid_points) / config.grid_points
    return ThermalTrajectory(
        np.concatenate(t_parts),
        np.concatenate(v_parts),
        np.asarray(kicks),
        np.asarray(maxima),
        float(sig(grid).max()),
        signal_window(sig),
        {m: np.concatenate(p) for m, p in s_parts.items()} if diagnostics else {},
        {s.spec.m: (s.spec, s.amps.copy(), s.weights) for s in sectors},
    )


def thermal_optimal_bound(N: int, ensemble: ThermalEnsemble) -> float:
    """Best ensemble orientation with each m sector placed in its optimal state.

    A sector keeps the Boltzmann weight of its levels |m| .. |m|+N; weight
    above that subspace contributes nothing.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    bound = 0.0
    for am, members in ensemble.sectors().items():
        w = sum(wt for l0, wt in members if l0 <= am + N)
        bound += w * optimal_state_exact(am, N).efficiency
    return float(bound)
