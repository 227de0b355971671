"""Independent reference computations used by the test-suite."""

from math import factorial

import numpy as np
from scipy.special import lpmv


def ylm_norm(l, m):
    m = abs(m)
    return np.sqrt((2 * l + 1) / (4 * np.pi) * factorial(l - m) / factorial(l + m))


def angular_integral(l1, l2, m, power=1, order=80):
    """<l1,m| cos^power |l2,m> by Gauss-Legendre quadrature over cos(theta)."""
    x, w = np.polynomial.legendre.leggauss(order)
    am = abs(m)
    f = lpmv(am, l1, x) * lpmv(am, l2, x) * x**power
    return 2 * np.pi * ylm_norm(l1, am) * ylm_norm(l2, am) * np.sum(w * f)


def expm_taylor(a, terms=60):
    """exp(a) by scaling and squaring of a truncated Taylor series."""
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, 1)
    s = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    b = a / 2**s
    out = np.eye(len(a), dtype=complex)
    term = np.eye(len(a), dtype=complex)
    for k in range(1, terms):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def cos_dense(m, l_max, order=120):
    """Dense cos(theta) matrix built from quadrature."""
    x, w = np.polynomial.legendre.leggauss(order)
    am = abs(m)
    ls = range(am, l_max + 1)
    p = np.array([ylm_norm(l, am) * lpmv(am, l, x) for l in ls])
    return 2 * np.pi * (p * (w * x)) @ p.T


def density_matrix_orientation(ensemble, L, A, kick_times, probe):
    """Full density-matrix propagation in all (l, m) with l <= L."""
    labels = [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]
    index = {lab: i for i, lab in enumerate(labels)}
    d = len(labels)
    cos = np.zeros((d, d))
    for (l1, m1), i in index.items():
        for (l2, m2), j in index.items():
            if m1 == m2 and abs(l1 - l2) == 1:
                cos[i, j] = angular_integral(l1, l2, m1)
    ll = np.array([l * (l + 1) for l, _ in labels], dtype=float)
    rho = np.zeros((d, d), dtype=complex)
    for l0, m, w in ensemble.members:
        rho[index[(l0, m)], index[(l0, m)]] = w
    kick = expm_taylor(1j * A * cos)

    def free(x):
        return np.diag(np.exp(-1j * np.pi * ll * x))

    clock = 0.0
    out = []
    events = sorted([(t, "kick") for t in kick_times] + [(t, "probe") for t in probe])
    for t, kind in events:
        u = free(t - clock)
        rho = u @ rho @ u.conj().T
        clock = t
        if kind == "kick":
            rho = kick @ rho @ kick.conj().T
        else:
            out.append(np.real(np.trace(rho @ cos)))
    return np.array(out)
