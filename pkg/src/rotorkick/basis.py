"""Truncated |l, m> basis at fixed magnetic quantum number.

Linear polarization conserves m, so every operator here lives in the block
spanned by l = |m|, |m|+1, ..., l_max.  Index k of any vector in this module
refers to l = |m| + k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

__all__ = [
    "BasisSpec",
    "CosineOperator",
    "L2Diagonal",
    "cos_matrix_element",
    "build_cosine_operator",
    "build_l2_diagonal",
    "project_truncate",
]


@dataclass(frozen=True)
class BasisSpec:
    """Levels l = |m| .. l_max at fixed m."""

    m: int
    l_max: int

    def __post_init__(self):
        if int(self.m) != self.m or int(self.l_max) != self.l_max:
            raise ValueError("m and l_max must be integers")
        if self.l_max < abs(self.m):
            raise ValueError(f"l_max={self.l_max} is below |m|={abs(self.m)}")

    @property
    def dimension(self) -> int:
        return self.l_max - abs(self.m) + 1

    @property
    def l_values(self) -> np.ndarray:
        return np.arange(abs(self.m), self.l_max + 1)

    def index_of(self, l: int) -> int:
        if not abs(self.m) <= l <= self.l_max:
            raise ValueError(f"l={l} outside [{abs(self.m)}, {self.l_max}]")
        return l - abs(self.m)

    def truncated(self, N: int) -> "BasisSpec":
        """Subspace of the first N+1 levels."""
        return BasisSpec(self.m, abs(self.m) + N)


def cos_matrix_element(l: int, m: int) -> float:
    """Return <l, m| cos(theta) |l+1, m>.

    >>> round(cos_matrix_element(0, 0), 6)
    0.57735
    """
    if l < abs(m):
        raise ValueError(f"l={l} must be >= |m|={abs(m)}")
    return float(np.sqrt(((l + 1) ** 2 - m**2) / ((2 * l + 1) * (2 * l + 3))))


def _cos_elements(m: int, l: np.ndarray) -> np.ndarray:
    return np.sqrt(((l + 1.0) ** 2 - m**2) / ((2.0 * l + 1) * (2.0 * l + 3)))


@dataclass(frozen=True)
class CosineOperator:
    """cos(theta) projected on a truncated basis.

    The diagonal vanishes by parity, so only the off-diagonal is stored;
    ``off_diagonal[k]`` couples l = |m|+k and l = |m|+k+1.
    """

    spec: BasisSpec
    off_diagonal: np.ndarray

    def __post_init__(self):
        off = np.asarray(self.off_diagonal, dtype=float)
        if off.shape != (self.spec.dimension - 1,):
            raise ValueError("off_diagonal length must be dimension - 1")
        off.setflags(write=False)
        object.__setattr__(self, "off_diagonal", off)

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    def dense(self) -> np.ndarray:
        return np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v, dtype=np.result_type(v, float))
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out

    def expectation(self, v: np.ndarray) -> float:
        return float(2.0 * np.real(np.sum(self.off_diagonal * np.conj(v[:-1]) * v[1:])))

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
        d = self.dimension
        if d == 1:
            return np.zeros(1), np.ones((1, 1))
        try:
            w, v = sl.eigh_tridiagonal(np.zeros(d), self.off_diagonal)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigensolverError(str(exc)) from exc
        return w, v

    def truncated(self, N: int) -> "CosineOperator":
        """C restricted to the first N+1 levels (projector sandwich)."""
        if N + 1 > self.dimension:
            raise ValueError(f"N={N} exceeds basis dimension {self.dimension}")
        return CosineOperator(self.spec.truncated(N), self.off_diagonal[:N])


class EigensolverError(RuntimeError):
    """Raised when the tridiagonal eigensolver does not converge."""


@dataclass(frozen=True)
class L2Diagonal:
    spec: BasisSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def build_cosine_operator(spec: BasisSpec) -> CosineOperator:
    l = spec.l_values[:-1]
    return CosineOperator(spec, _cos_elements(spec.m, l.astype(float)))


def build_l2_diagonal(spec: BasisSpec) -> L2Diagonal:
    l = spec.l_values
    return L2Diagonal(spec, (l * (l + 1)).astype(float))


def project_truncate(state, N: int):
    """Restrict ``state`` to its first N+1 levels.

    Returns the renormalized restricted state and the squared norm that was
    removed.
    """
    from .propagation import RotorState

    if N + 1 > state.spec.dimension:
        raise ValueError(f"N+1={N + 1} exceeds state dimension {state.spec.dimension}")
    kept = state.amplitudes[: N + 1]
    norm2 = float(np.vdot(kept, kept).real)
    if norm2 < 1e-12:
        raise ValueError("state is orthogonal to the truncated subspace")
    rest = state.amplitudes[N + 1 :]
    leaked = min(float(np.vdot(rest, rest).real), 1.0)
    return (
        RotorState(state.spec.truncated(N), kept / np.sqrt(norm2), state.clock),
        leaked,
    )
