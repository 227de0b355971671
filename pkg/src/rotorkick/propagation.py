"""Free rotation, sudden kicks and finite-pulse propagation of rotor states.

Time is measured in units of the rotational period T_rot = pi/B throughout,
so free evolution over a time x multiplies level l by exp(-i pi l(l+1) x).
Because l(l+1) is always even, evolution over x = 1 is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .basis import BasisSpec, CosineOperator, EigensolverError, build_cosine_operator, build_l2_diagonal

__all__ = [
    "RotorState",
    "KickPropagator",
    "PulseShape",
    "OrientationSignal",
    "EigensolverError",
    "free_evolve",
    "make_kick_propagator",
    "apply_kick",
    "propagate_pulse_shape",
    "expectation_cos",
    "overlap_probability",
    "orientation_signal",
    "free_phases",
    "cosine_operator",
    "sudden_deviation",
]

NORM_TOL = 1e-10


@dataclass(frozen=True)
class RotorState:
    """Wavefunction at fixed m, with ``clock`` in units of T_rot."""

    spec: BasisSpec
    amplitudes: np.ndarray
    clock: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.spec.dimension,):
            raise ValueError(
                f"expected {self.spec.dimension} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "clock", float(self.clock))

    @classmethod
    def basis_state(cls, spec: BasisSpec, l: int, clock: float = 0.0) -> "RotorState":
        amps = np.zeros(spec.dimension, dtype=complex)
        amps[spec.index_of(l)] = 1.0
        return cls(spec, amps, clock)

    @classmethod
    def ground(cls, spec: BasisSpec) -> "RotorState":
        return cls.basis_state(spec, abs(spec.m))

    @classmethod
    def normalized(cls, spec: BasisSpec, amplitudes, clock: float = 0.0) -> "RotorState":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(spec, amps / np.linalg.norm(amps), clock)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def embed(self, spec: BasisSpec) -> "RotorState":
        """Zero-pad into a larger basis with the same m."""
        if spec.m != self.spec.m or spec.l_max < self.spec.l_max:
            raise ValueError("can only embed into a larger basis with the same m")
        amps = np.zeros(spec.dimension, dtype=complex)
        amps[: self.spec.dimension] = self.amplitudes
        return RotorState(spec, amps, self.clock)

    def with_amplitudes(self, amplitudes, clock: float | None = None) -> "RotorState":
        return RotorState(self.spec, amplitudes, self.clock if clock is None else clock)


@lru_cache(maxsize=256)
def cosine_operator(spec: BasisSpec) -> CosineOperator:
    return build_cosine_operator(spec)


@lru_cache(maxsize=256)
def _l2(spec: BasisSpec) -> np.ndarray:
    return build_l2_diagonal(spec).values


def free_phases(spec: BasisSpec, dx) -> np.ndarray:
    """exp(-i pi l(l+1) dx) for scalar dx, or a (len(dx), dim) table."""
    arg = np.multiply.outer(np.asarray(dx, dtype=float), _l2(spec))
    # l(l+1) is even, so reducing mod 2 keeps whole periods exact
    return np.exp(-1j * np.pi * np.mod(arg, 2.0))


def free_evolve(state: RotorState, dx: float) -> RotorState:
    if dx < 0:
        raise ValueError("free evolution runs forward only (dx >= 0)")
    return state.with_amplitudes(state.amplitudes * free_phases(state.spec, dx), state.clock + dx)


@dataclass(frozen=True)
class KickPropagator:
    """Sudden kick exp(iA cos(theta)) in a fixed basis."""

    spec: BasisSpec
    area: float
    matrix: np.ndarray = field(repr=False)


@lru_cache(maxsize=128)
def _kick_matrix(spec: BasisSpec, area: float) -> np.ndarray:
    if area == 0.0:
        u = np.eye(spec.dimension, dtype=complex)
    else:
        w, v = cosine_operator(spec).eigh()
        u = (v * np.exp(1j * area * w)) @ v.T
    u.setflags(write=False)
    return u


def make_kick_propagator(spec: BasisSpec, A: float) -> KickPropagator:
    """Build exp(iA C) by diagonalizing the tridiagonal cosine matrix."""
    A = float(A)
    if not np.isfinite(A):
        raise ValueError("kick area must be finite")
    return KickPropagator(spec, A, _kick_matrix(spec, A))


def apply_kick(state: RotorState, prop: KickPropagator) -> RotorState:
    if state.spec != prop.spec:
        raise ValueError(f"state basis {state.spec} does not match propagator basis {prop.spec}")
    return state.with_amplitudes(prop.matrix @ state.amplitudes)


@dataclass(frozen=True)
class PulseShape:
    """Dimensionless field profile E(s) on s in [0, 1] and duration parameter epsilon."""

    shape: Callable[[float], float]
    epsilon: float
    area: float = field(init=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        area, _ = integrate.quad(self.shape, 0.0, 1.0, limit=200)
        if area < 0:
            raise ValueError("half-cycle pulse must have non-negative area")
        object.__setattr__(self, "area", float(area))

    @classmethod
    def sin2(cls, area: float, epsilon: float) -> "PulseShape":
        """Single sin^2 lobe normalized to the requested area."""
        return cls(lambda s: 2.0 * area * np.sin(np.pi * s) ** 2, epsilon)

    @classmethod
    def square(cls, area: float, epsilon: float) -> "PulseShape":
        return cls(lambda s: area * np.ones_like(s), epsilon)


def propagate_pulse_shape(state: RotorState, pulse: PulseShape, steps: int = 2000) -> RotorState:
    """Integrate i dpsi/ds = [eps L^2 - E(s) cos(theta)] psi over s in [0, 1].

    Uses symmetric (Strang) splitting: half free step, kick with the midpoint
    area E(s) ds, half free step.  The clock advances by the pulse length
    epsilon/pi in units of T_rot.
    """
    if steps < 100:
        raise ValueError("at least 100 steps are required")
    if abs(state.norm - 1.0) > NORM_TOL:
        raise ValueError(f"input state is not normalized (norm={state.norm:.12f})")
    spec = state.spec
    ds = 1.0 / steps
    half = np.exp(-0.5j * pulse.epsilon * _l2(spec) * ds)
    w, v = cosine_operator(spec).eigh()
    s_mid = (np.arange(steps) + 0.5) * ds
    areas = np.asarray(pulse.shape(s_mid), dtype=float) * ds
    psi = state.amplitudes.copy()
    for a in areas:
        psi = half * psi
        psi = v @ (np.exp(1j * a * w) * (v.T @ psi))
        psi = half * psi
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > 1e-6:
        raise RuntimeError(f"norm drift {drift:.2e} after pulse; increase steps")
    return state.with_amplitudes(psi, state.clock + pulse.epsilon / np.pi)


def expectation_cos(state: RotorState) -> float:
    return cosine_operator(state.spec).expectation(state.amplitudes)


def overlap_probability(state: RotorState, target) -> float:
    """|<target|state>|^2, zero-padding the target to the state's basis.

    ``target`` may be a RotorState or anything with a ``state`` attribute.
    """
    target = getattr(target, "state", target)
    if target.spec.m != state.spec.m:
        raise ValueError(f"m mismatch: state m={state.spec.m}, target m={target.spec.m}")
    d = target.spec.dimension
    if d > state.spec.dimension:
        raise ValueError("target basis is larger than the state basis")
    return float(min(abs(np.vdot(target.amplitudes, state.amplitudes[:d])) ** 2, 1.0))


class OrientationSignal:
    """<cos(theta)> as a function of free-evolution time offset x.

    Free evolution turns the orientation into a trigonometric polynomial
    ``2 Re sum_n b_n exp(-2 pi i n x)`` with integer frequencies n = l+1,
    so the signal has period 1.  Signals of different m sectors add, which is
    how ensemble averages are formed.
    """

    def __init__(self, coefficients: np.ndarray):
        self.coefficients = np.asarray(coefficients, dtype=complex)
        self.frequencies = np.arange(len(self.coefficients))

    def __add__(self, other: "OrientationSignal") -> "OrientationSignal":
        n = max(len(self.coefficients), len(other.coefficients))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coefficients)] += self.coefficients
        out[: len(other.coefficients)] += other.coefficients
        return OrientationSignal(out)

    def scaled(self, weight: float) -> "OrientationSignal":
        return OrientationSignal(weight * self.coefficients)

    def _modes(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-2j * np.pi * np.mod(np.multiply.outer(x, self.frequencies), 1.0))

    def __call__(self, x):
        return 2.0 * np.real(self._modes(x) @ self.coefficients)

    def derivative(self, x):
        return 2.0 * np.real(self._modes(x) @ (-2j * np.pi * self.frequencies * self.coefficients))

    def is_constant(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.abs(self.coefficients[1:]) <= tol))


def orientation_signal(state: RotorState, weight: float = 1.0) -> OrientationSignal:
    """Orientation signal of ``state`` (optionally weighted, for ensembles)."""
    return amplitude_signal(state.spec, state.amplitudes[:, None], np.array([weight]))


def amplitude_signal(spec: BasisSpec, amplitudes: np.ndarray, weights: np.ndarray) -> OrientationSignal:
    """Weighted orientation signal of several states stacked as columns."""
    off = cosine_operator(spec).off_diagonal
    coeff = np.zeros(spec.l_max + 1, dtype=complex)
    if spec.dimension > 1:
        pair = (np.conj(amplitudes[:-1]) * amplitudes[1:]) @ weights
        coeff[abs(spec.m) + 1 :] = off * pair
    return OrientationSignal(coeff)


def sudden_deviation(area: float, epsilon: float, steps: int, l_max: int) -> float:
    """Largest amplitude difference between a sin^2 pulse and the sudden kick from |0,0>."""
    spec = BasisSpec(0, l_max)
    psi0 = RotorState.ground(spec)
    kicked = apply_kick(psi0, make_kick_propagator(spec, area))
    pulsed = propagate_pulse_shape(psi0, PulseShape.sin2(area, epsilon), steps)
    return float(np.max(np.abs(pulsed.amplitudes - kicked.amplitudes)))
