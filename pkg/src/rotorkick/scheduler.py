"""Kick trains timed at the maxima of the orientation signal.

The strategy: let the state rotate freely until <cos(theta)> peaks, apply a
kick there, repeat.  A kick generated by C leaves <C> unchanged and only
tilts its slope, so inside a truncated subspace the peak values C_i form a
non-decreasing sequence whose fixed points are eigenvectors of C.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .basis import BasisSpec
from .propagation import (
    OrientationSignal,
    RotorState,
    apply_kick,
    cosine_operator,
    expectation_cos,
    free_evolve,
    free_phases,
    make_kick_propagator,
    orientation_signal,
)
from .targets import TargetState, signal_window

__all__ = [
    "TrainConfig",
    "Trajectory",
    "PulseTrainResult",
    "BasisOverflowError",
    "NotAtMaximumError",
    "CommutatorError",
    "default_l_max",
    "maximize_signal",
    "find_next_maximum",
    "run_kick_train",
    "run_explicit_train",
    "run_adaptive_train",
    "slope_jump",
    "schedule_generic",
]


class BasisOverflowError(RuntimeError):
    """Population reached the top of the propagation basis."""


class NotAtMaximumError(ValueError):
    pass


class CommutatorError(ValueError):
    pass


def default_l_max(m: int, N: int) -> int:
    return abs(m) + 4 * N + 8


@dataclass(frozen=True)
class TrainConfig:
    area_per_kick: float
    max_kicks: int = 15
    epsilon: float = 0.01
    convergence_tol: float = 1e-4
    horizon: float = 1.0
    grid_points: int = 4096
    mode: str = "global"
    samples_per_period: int = 1024
    overflow_tol: float | None = 1e-6

    def __post_init__(self):
        if not self.area_per_kick > 0:
            raise ValueError("area_per_kick must be positive")
        if self.max_kicks < 1:
            raise ValueError("max_kicks must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.grid_points < 1024:
            raise ValueError("grid_points must be >= 1024")
        if self.mode not in ("global", "first-local"):
            raise ValueError(f"unknown maximum search mode {self.mode!r}")


@dataclass
class Trajectory:
    """Sampled time series.  ``populations`` holds levels |m|..|m|+N."""

    clock: np.ndarray
    cos: np.ndarray
    overlap: np.ndarray
    populations: np.ndarray
    leaked: np.ndarray

    @classmethod
    def concatenate(cls, parts: Sequence["Trajectory"]) -> "Trajectory":
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in
                     ("clock", "cos", "overlap", "populations", "leaked")))


@dataclass
class PulseTrainResult:
    kick_times: np.ndarray
    maxima_sequence: np.ndarray
    trajectory: Trajectory
    converged: bool
    final_state: RotorState
    post_train_peak: float
    post_train_duration: float
    edge_population: float = 0.0
    target: TargetState | None = field(default=None, repr=False)

    @property
    def peak_orientation(self) -> float:
        return float(self.trajectory.cos.max())


def maximize_signal(
    signal: OrientationSignal,
    horizon: float = 1.0,
    grid_points: int = 4096,
    mode: str = "global",
) -> tuple[float, float]:
    """Offset in (0, horizon] of the maximum of a free-evolution signal.

    Grid scan, then the root of the analytic derivative is polished with
    Brent's method.  The signal has period 1, so for ``horizon >= 1`` a peak
    sitting exactly at the current instant is reported one period later.
    A constant signal returns ``horizon``.
    """
    if signal.is_constant():
        return horizon, float(signal(horizon))
    dx = horizon / grid_points
    x = dx * np.arange(grid_points + 1)
    d = signal.derivative
    i = None
    if mode == "first-local":
        slope = d(x)
        turns = np.flatnonzero((slope[:-1] > 0) & (slope[1:] <= 0))
        if turns.size:
            i = int(turns[0])
            lo, hi = x[i], x[i + 1]
    if i is None:
        i = int(np.argmax(signal(x)))
        lo, hi = x[i] - dx, x[i] + dx
        if horizon < 1.0:
            lo, hi = max(lo, 0.0), min(hi, horizon)
    if d(lo) > 0 > d(hi):
        xs = optimize.brentq(d, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    else:
        res = optimize.minimize_scalar(lambda t: -signal(t), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        xs = float(res.x)
    if horizon >= 1.0:
        xs = float(np.mod(xs, 1.0))
        if xs < 1e-12 or xs > 1.0 - 1e-12:
            xs = 1.0
    else:
        xs = min(max(xs, dx), horizon)
    return float(xs), float(signal(xs))


def find_next_maximum(
    state: RotorState, horizon: float = 1.0, grid_points: int = 4096, mode: str = "global"
) -> tuple[float, float]:
    """Time offset and value of the next orientation maximum under free rotation."""
    if grid_points < 1024:
        raise ValueError("grid_points must be >= 1024")
    return maximize_signal(orientation_signal(state), horizon, grid_points, mode)


def _sample(state: RotorState, duration: float, spp: int, target, n_levels: int,
            endpoint: bool = False) -> Trajectory:
    count = int(np.ceil(duration * spp - 1e-9))
    offsets = np.arange(count) / spp
    if endpoint:
        offsets = np.append(offsets, duration)
    amps = free_phases(state.spec, offsets) * state.amplitudes
    cos = orientation_signal(state)(offsets)
    pops = np.abs(amps) ** 2
    if target is not None:
        t = target.state.amplitudes
        overlap = np.abs(amps[:, : len(t)] @ np.conj(t)) ** 2
    else:
        overlap = np.full(len(offsets), np.nan)
    return Trajectory(
        state.clock + offsets,
        cos,
        overlap,
        pops[:, :n_levels],
        pops[:, n_levels:].sum(axis=1),
    )


def _levels(spec: BasisSpec, target) -> int:
    return min(spec.dimension, target.N + 1 if target is not None else 5)


def _check_edge(state: RotorState, tol, kick_index: int) -> float:
    edge = float(abs(state.amplitudes[-1]) ** 2)
    if tol is not None and edge > tol:
        raise BasisOverflowError(
            f"kick {kick_index}: population {edge:.2e} on l={state.spec.l_max} exceeds "
            f"{tol:.0e}; enlarge l_max"
        )
    return edge


def _finish(state, kicks, maxima, parts, converged, edge, spp, target, n_levels, cfg_grid=4096):
    parts.append(_sample(state, 1.0, spp, target, n_levels, endpoint=True))
    signal = orientation_signal(state)
    peak = float(signal(np.arange(cfg_grid) / cfg_grid).max())
    return PulseTrainResult(
        np.asarray(kicks, dtype=float),
        np.asarray(maxima, dtype=float),
        Trajectory.concatenate(parts),
        converged,
        state,
        peak,
        signal_window(signal),
        edge,
        target,
    )


def run_kick_train(
    initial: RotorState, config: TrainConfig, target: TargetState | None = None
) -> PulseTrainResult:
    """Apply up to ``max_kicks`` kicks, each at the next orientation maximum.

    On an isotropic initial state (flat signal) the first kick fires at once.
    The train stops early when successive maxima differ by less than
    ``convergence_tol``.  The trajectory covers the train plus one period
    after the last kick.
    """
    if target is not None and target.m != initial.spec.m:
        raise ValueError("target and initial state have different m")
    prop = make_kick_propagator(initial.spec, config.area_per_kick)
    spp = config.samples_per_period
    n_levels = _levels(initial.spec, target)
    state = initial
    kicks, maxima, parts = [], [], []
    converged = False
    edge = 0.0
    for k in range(config.max_kicks):
        if k == 0 and orientation_signal(state).is_constant():
            dx, value = 0.0, expectation_cos(state)
        else:
            dx, value = find_next_maximum(state, config.horizon, config.grid_points, config.mode)
        if maxima and abs(value - maxima[-1]) < config.convergence_tol:
            converged = True
            break
        parts.append(_sample(state, dx, spp, target, n_levels))
        state = free_evolve(state, dx)
        kicks.append(state.clock)
        maxima.append(value)
        state = apply_kick(state, prop)
        edge = max(edge, _check_edge(state, config.overflow_tol, k + 1))
    result = _finish(state, kicks, maxima, parts, converged, edge, spp, target, n_levels,
                     config.grid_points)
    if not converged and len(maxima) >= 1:
        result.converged = abs(result.post_train_peak - maxima[-1]) < config.convergence_tol
    return result


def run_explicit_train(
    initial: RotorState,
    kick_times: Sequence[float],
    A: float,
    target: TargetState | None = None,
    samples_per_period: int = 1024,
    overflow_tol: float | None = 1e-6,
) -> PulseTrainResult:
    """Replay a given schedule of absolute kick times (units of T_rot)."""
    times = np.asarray(kick_times, dtype=float)
    if times.size and (np.any(np.diff(times) <= 0) or times[0] < initial.clock):
        raise ValueError("kick times must be strictly increasing and not before the initial clock")
    prop = make_kick_propagator(initial.spec, A)
    n_levels = _levels(initial.spec, target)
    state = initial
    maxima, parts = [], []
    edge = 0.0
    for k, t in enumerate(times):
        dx = t - state.clock
        parts.append(_sample(state, dx, samples_per_period, target, n_levels))
        state = free_evolve(state, dx)
        maxima.append(expectation_cos(state))
        state = apply_kick(state, prop)
        edge = max(edge, _check_edge(state, overflow_tol, k + 1))
    return _finish(state, list(times), maxima, parts, False, edge, samples_per_period, target,
                   n_levels)


def run_adaptive_train(
    config: TrainConfig,
    N: int = 4,
    m: int = 0,
    l0: int | None = None,
    l_max: int | None = None,
    edge_tol: float = 1e-8,
    l_cap: int = 256,
) -> PulseTrainResult:
    """Maxima strategy from |l0, m> in a basis grown until the top level stays empty.

    Starts from ``default_l_max`` and enlarges the basis while the top-level
    population exceeds ``edge_tol`` anywhere along the train.
    """
    l0 = abs(m) if l0 is None else l0
    l_max = max(default_l_max(m, N), l0 + 4 * N + 8) if l_max is None else l_max
    target = _target(m, N)
    while True:
        spec = BasisSpec(m, l_max)
        cfg = replace(config, overflow_tol=None)
        result = run_kick_train(RotorState.basis_state(spec, l0), cfg, target)
        if result.edge_population <= edge_tol:
            return result
        if l_max >= l_cap:
            raise BasisOverflowError(f"top-level population {result.edge_population:.2e} "
                                     f"still above {edge_tol:.0e} at l_max={l_max}")
        l_max = min(2 * l_max, l_cap)


def _target(m: int, N: int) -> TargetState:
    from .targets import optimal_state_exact

    return optimal_state_exact(m, N)


def _embedded_truncation(spec: BasisSpec, N: int) -> np.ndarray:
    if N + 1 > spec.dimension:
        raise ValueError(f"N={N} needs at least {N + 1} levels")
    c = np.zeros((spec.dimension, spec.dimension))
    c[: N + 1, : N + 1] = cosine_operator(spec).truncated(N).dense()
    return c


def slope_jump(state: RotorState, A: float, N: int, tol: float = 1e-6) -> tuple[float, float]:
    """Slope of <C_N> just before and just after a truncated kick.

    C_N is cos(theta) projected on the first N+1 levels of the state's basis
    and the kick is exp(iA C_N).  Slopes are d/dx with x in units of T_rot,
    computed from the commutator i pi <[L^2, C_N]>; multiply by
    epsilon/pi for the derivative in pulse-rescaled time.
    """
    c = _embedded_truncation(state.spec, N)
    l = state.spec.l_values
    l2 = (l * (l + 1)).astype(float)
    comm = l2[:, None] * c - c * l2[None, :]

    def slope(psi):
        return float(np.real(1j * np.pi * np.vdot(psi, comm @ psi)))

    before = slope(state.amplitudes)
    if abs(before) > tol:
        raise NotAtMaximumError(f"pre-kick slope {before:.3e} is not zero; state is not at a maximum")
    w, v = np.linalg.eigh(c)
    u = (v * np.exp(1j * A * w)) @ v.conj().T
    return before, slope(u @ state.amplitudes)


def schedule_generic(
    free_step: Callable[[np.ndarray, float], np.ndarray],
    kick_unitary: np.ndarray,
    observable: np.ndarray,
    initial: np.ndarray,
    config: TrainConfig,
    commute_tol: float = 1e-8,
) -> np.ndarray:
    """Maxima strategy for an arbitrary system with periodic free dynamics.

    ``free_step(psi, dt)`` advances a state vector by ``dt`` (same time unit
    as ``config.horizon``).  The kick must commute with the observable, so a
    kick never changes <O> and only redirects its time derivative.  Returns
    the sequence of <O> values at the kick instants.
    """
    u = np.asarray(kick_unitary)
    o = np.asarray(observable)
    comm = float(np.linalg.norm(u @ o - o @ u))
    if comm > commute_tol:
        raise CommutatorError(f"kick does not commute with the observable: ||[U, O]|| = {comm:.3e}")

    def expect(psi):
        return float(np.real(np.vdot(psi, o @ psi)))

    grid = config.horizon * np.arange(1, config.grid_points + 1) / config.grid_points
    psi = np.asarray(initial, dtype=complex)
    maxima: list[float] = []
    for k in range(config.max_kicks):
        values = np.array([expect(free_step(psi, t)) for t in grid])
        if k == 0 and np.ptp(values) < 1e-14:
            dt, value = 0.0, expect(psi)
        elif np.ptp(values) < 1e-14:
            dt, value = config.horizon, values[-1]
        else:
            i = int(np.argmax(values))
            dt, value = grid[i], values[i]
            if 0 < i < len(grid) - 1:
                res = optimize.minimize_scalar(
                    lambda t: -expect(free_step(psi, t)),
                    bracket=(grid[i - 1], grid[i], grid[i + 1]),
                    method="golden",
                    tol=1e-8,
                )
                if -res.fun > value:
                    dt, value = float(res.x), float(-res.fun)
        if maxima and abs(value - maxima[-1]) < config.convergence_tol:
            break
        maxima.append(value)
        psi = u @ free_step(psi, dt)
    return np.asarray(maxima)
