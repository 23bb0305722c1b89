"""Independent reference computations used by the tests.

None of these call into ``cwdmd``. They are deliberately simple and slow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def expm_taylor(M, terms: int = 30) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a truncated Taylor series."""
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M, 1)
    k = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    X = M / 2 ** k
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for n in range(1, terms + 1):
        term = term @ X / n
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def inverse_2x2(M) -> np.ndarray:
    """Closed-form inverse of a complex 2x2 matrix."""
    (a, b), (c, d) = M
    det = a * d - b * c
    return np.array([[d, -b], [-c, a]]) / det


def lti_resolvent_closed_form(A, c, s, x) -> complex:
    M = s * np.eye(2) - np.asarray(A, dtype=complex)
    return complex(np.asarray(c) @ inverse_2x2(M) @ np.asarray(x))


def fourier_by_quad(f, omega: float, half_width: float = 40.0) -> complex:
    """Unitary Fourier transform ``(2 pi)^{-1/2} int f(t) e^{-i omega t} dt`` by adaptive quadrature."""
    re = integrate.quad(lambda t: (f(t) * np.exp(-1j * omega * t)).real,
                        -half_width, half_width, limit=400, epsabs=1e-13, epsrel=1e-13)[0]
    im = integrate.quad(lambda t: (f(t) * np.exp(-1j * omega * t)).imag,
                        -half_width, half_width, limit=400, epsabs=1e-13, epsrel=1e-13)[0]
    return complex(re, im) / math.sqrt(2.0 * math.pi)


def morlet_time(omega0: float, t):
    return (np.exp(1j * omega0 * t) - math.exp(-0.5 * omega0 ** 2)) * np.exp(-0.5 * t * t)


def gaussian_time(omega0: float, t):
    return np.exp(1j * omega0 * t) * np.exp(-0.5 * t * t)


def morlet_fourier(omega0: float, w):
    return np.exp(-0.5 * (w - omega0) ** 2) - math.exp(-0.5 * omega0 ** 2) * np.exp(-0.5 * w * w)


def admissibility_by_quad(omega0: float) -> float:
    """``2 pi int |G^(w)|^2/|w| dw`` for the Morlet wavelet with scipy's adaptive quadrature."""
    f = lambda w: morlet_fourier(omega0, w) ** 2 / abs(w)
    total = 0.0
    for a, b in [(-60, -1), (-1, 0), (0, 1), (1, 60)]:
        total += integrate.quad(f, a, b, limit=500, epsabs=1e-14, epsrel=1e-12,
                                points=None)[0]
    return 2.0 * math.pi * total


def pinv_svd(psi, rcond: float) -> np.ndarray:
    """Pseudoinverse by a plain SVD with relative cutoff."""
    u, s, vt = np.linalg.svd(psi, full_matrices=False)
    keep = s > rcond * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T
