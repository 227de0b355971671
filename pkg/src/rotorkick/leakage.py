"""Population pushed out of the control subspace by a single kick."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec
from .propagation import make_kick_propagator
from .targets import optimal_state_exact

__all__ = [
    "LeakageReport",
    "LeakageConvergenceError",
    "leakage_exact",
    "leakage_estimate",
    "leakage_worst_case",
    "leakage_report",
    "max_area_for_budget",
]


class LeakageConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LeakageReport:
    A: float
    N: int
    m: int
    eta_exact: float
    eta_estimate: float
    l_max_used: int

    @property
    def relative_error(self) -> float:
        return abs(self.eta_exact - self.eta_estimate) / self.eta_exact if self.eta_exact else float("nan")


def _leak(A: float, probe: np.ndarray, N: int, spec: BasisSpec) -> float:
    u = make_kick_propagator(spec, A).matrix
    kicked = u[:, : N + 1] @ probe
    # (U - P U P)|probe> is the part of U|probe> above the subspace
    out = kicked[N + 1 :]
    return float(np.vdot(out, out).real)


def _default_l_max(m: int, N: int) -> int:
    return abs(m) + 2 * N + 16


def leakage_exact(A: float, N: int, m: int = 0, l_max: int | None = None, tol: float = 1e-8) -> float:
    """Squared norm of (U - P U P)|chi_N> for the full kick U = exp(iA cos(theta)).

    The result is recomputed with a basis of twice the size and must agree
    to ``tol``.
    """
    l_max = _default_l_max(m, N) if l_max is None else l_max
    if l_max < abs(m) + 2 * N:
        raise ValueError(f"l_max={l_max} leaves no room above the subspace (need >= {abs(m) + 2 * N})")
    if not np.isfinite(A):
        raise ValueError("A must be finite")
    if A == 0:
        return 0.0
    probe = optimal_state_exact(m, N).state.amplitudes
    eta = _leak(A, probe, N, BasisSpec(m, l_max))
    check = _leak(A, probe, N, BasisSpec(m, 2 * l_max))
    if abs(check - eta) > tol:
        raise LeakageConvergenceError(
            f"leakage changed by {abs(check - eta):.2e} when doubling l_max={l_max}"
        )
    return eta


def leakage_worst_case(A: float, N: int, m: int = 0, l_max: int | None = None) -> float:
    """Largest leakage over the eigenbasis of the truncated cosine operator."""
    from .propagation import cosine_operator

    l_max = _default_l_max(m, N) if l_max is None else l_max
    spec = BasisSpec(m, l_max)
    _, vecs = cosine_operator(spec.truncated(N)).eigh()
    return max(_leak(A, vecs[:, j], N, spec) for j in range(N + 1))


def leakage_estimate(A: float, N: int) -> float:
    """Small-area estimate (A pi)^2 / (2 (N+2)^3)."""
    if A < 0 or N < 1:
        raise ValueError("need A >= 0 and N >= 1")
    return (A * np.pi) ** 2 / (2.0 * (N + 2) ** 3)


def max_area_for_budget(eta_budget: float, N: int) -> float:
    """Kick area whose estimated leakage equals ``eta_budget``."""
    if not 0 < eta_budget < 1:
        raise ValueError("eta_budget must lie in (0, 1)")
    return float(np.sqrt(2.0 * eta_budget * (N + 2) ** 3) / np.pi)


def leakage_report(A: float, N: int, m: int = 0, l_max: int | None = None) -> LeakageReport:
    l_max = _default_l_max(m, N) if l_max is None else l_max
    return LeakageReport(A, N, m, leakage_exact(A, N, m, l_max), leakage_estimate(A, N), l_max)
