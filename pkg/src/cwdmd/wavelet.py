"""Analyzing wavelets and the continuous wavelet transform.

Conventions used throughout the package:

* The Fourier transform is unitary, ``f^(w) = (2 pi)^{-1/2} int f(t) e^{-iwt} dt``.
* The transform is ``W[h](s, tau) = int h(t) conj(|s|^{-1} G((t - tau)/s)) dt``.
* Scales are measured in samples. A sample scale ``s`` corresponds to the time
  scale ``s*dt`` and to the angular frequency ``omega0/(s*dt)``.

The FFT path evaluates ``W(s, m*dt) = sqrt(2 pi) * ifft(fft(h) * conj(G^(s*dt*w_k)))[m]``
with ``w_k`` the DFT angular frequencies. The constant ``sqrt(2 pi)`` is
:data:`CWT_FFT_NORMALIZATION`. It follows from Parseval's identity and is
checked against the direct quadrature in the test suite. The signal is treated
as periodic, so coefficients within a few scales of either edge are
contaminated by wrap-around.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyScales,
    NonFiniteState,
    NotAdmissible,
    OutOfWindow,
    SignalTooShort,
    ZeroScale,
)

CWT_FFT_NORMALIZATION = math.sqrt(2.0 * math.pi)

# Gaussian window half-width (in units of the scale) beyond which
# exp(-u^2/2) underflows to zero in double precision.
_DIRECT_HALF_WIDTH = 40.0

# Default truncation of the admissibility integral: |theta| in [lo, omega0 + pad].
ADMISSIBILITY_LOWER = 1e-8
ADMISSIBILITY_PAD = 12.0


class WaveletVariant(enum.Enum):
    MODULATED_GAUSSIAN = "modulated_gaussian"
    MORLET = "morlet"


@dataclass(frozen=True)
class WaveletKind:
    """A wavelet family member; ``kappa = exp(-omega0^2/2)`` is stored once."""

    variant: WaveletVariant
    omega0: float
    kappa: float = 0.0

    def __post_init__(self):
        variant = WaveletVariant(self.variant)
        omega0 = float(self.omega0)
        if not (np.isfinite(omega0) and omega0 >= 0.0):
            raise ValueError(f"omega0 must be finite and nonnegative, got {omega0}")
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "omega0", omega0)
        object.__setattr__(self, "kappa", math.exp(-0.5 * omega0 * omega0))

    @classmethod
    def morlet(cls, omega0: float = 6.0) -> "WaveletKind":
        return cls(WaveletVariant.MORLET, omega0)

    @classmethod
    def modulated_gaussian(cls, omega0: float = 6.0) -> "WaveletKind":
        return cls(WaveletVariant.MODULATED_GAUSSIAN, omega0)

    @property
    def admissible(self) -> bool:
        return self.variant is WaveletVariant.MORLET


def wavelet_time(kind: WaveletKind, t):
    """Mother wavelet in time. Accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    env = np.exp(-0.5 * t * t)
    osc = np.exp(1j * kind.omega0 * t)
    if kind.variant is WaveletVariant.MORLET:
        osc = osc - kind.kappa
    val = osc * env
    return complex(val) if val.ndim == 0 else val


def _fourier_real(kind: WaveletKind, omega: np.ndarray) -> np.ndarray:
    val = np.exp(-0.5 * (omega - kind.omega0) ** 2)
    if kind.variant is WaveletVariant.MORLET:
        val = val - kind.kappa * np.exp(-0.5 * omega * omega)
    return val


def wavelet_fourier(kind: WaveletKind, omega):
    """Unitary Fourier transform of the mother wavelet (real valued here)."""
    omega = np.asarray(omega, dtype=float)
    val = _fourier_real(kind, omega).astype(complex)
    return complex(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class Signal:
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float).reshape(-1)
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if samples.size < 2:
            raise SignalTooShort(f"need at least 2 samples, got {samples.size}")
        if not np.isfinite(samples).all():
            raise NonFiniteState("signal contains non-finite samples")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_samples)


@dataclass(frozen=True)
class CwtGrid:
    """Coefficients ``coefficients[j, i] ~ W[h](scales[j]*dt, i*dt)``."""

    scales: np.ndarray
    dt: float
    coefficients: np.ndarray

    def __post_init__(self):
        if self.coefficients.shape[0] != self.scales.size:
            raise ValueError("one coefficient row per scale is required")

    @property
    def shift_indices(self) -> np.ndarray:
        return np.arange(self.coefficients.shape[1])

    @property
    def n_samples(self) -> int:
        return self.coefficients.shape[1]


def cwt_direct(signal: Signal, kind: WaveletKind, sigma: float, tau):
    """Reference transform by trapezoid quadrature.

    ``sigma`` is a sample scale and ``tau`` is in time units. The signal is
    zero outside its window. Samples further than 40 scales from ``tau``
    are skipped because the Gaussian envelope underflows there.
    """
    sigma = float(sigma)
    if sigma == 0.0:
        raise ZeroScale("sigma must be nonzero")
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    dt = signal.dt
    s_time = sigma * dt
    h = signal.samples
    n = h.size
    half = int(math.ceil(_DIRECT_HALF_WIDTH * abs(sigma))) + 1
    out = np.empty(taus.size, dtype=complex)
    for q, tq in enumerate(taus):
        centre = tq / dt
        lo = max(0, int(math.floor(centre)) - half)
        hi = min(n, int(math.ceil(centre)) + half + 1)
        if lo >= hi:
            out[q] = 0.0
            continue
        idx = np.arange(lo, hi)
        u = (idx * dt - tq) / s_time
        kernel = np.conj(wavelet_time(kind, u)) / abs(s_time)
        w = np.full(idx.size, dt)
        if lo == 0:
            w[0] *= 0.5
        if hi == n:
            w[-1] *= 0.5
        out[q] = np.sum(h[lo:hi] * kernel * w)
    return complex(out[0]) if np.ndim(tau) == 0 else out


def dft_angular_frequencies(n: int, dt: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=dt)


def cwt_fft(signal: Signal, scales, kind: WaveletKind,
            normalization: float = CWT_FFT_NORMALIZATION) -> CwtGrid:
    """FFT evaluation of the transform on all shifts ``0..N`` for each scale.

    ``normalization`` exists so that the property suite can inject a fault.
    Callers should leave it at the default.
    """
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    if scales.size == 0:
        raise EmptyScales("at least one scale is required")
    if np.any(scales == 0.0):
        raise ZeroScale("scales must be nonzero")
    if signal.n_samples < 2:
        raise SignalTooShort("need at least 2 samples")
    spectrum = np.fft.fft(signal.samples)
    omega = dft_angular_frequencies(signal.n_samples, signal.dt)
    filt = np.conj(_fourier_real(kind, np.outer(scales * signal.dt, omega)))
    coeffs = normalization * np.fft.ifft(spectrum[None, :] * filt, axis=1)
    scales = scales.copy()
    scales.setflags(write=False)
    return CwtGrid(scales, signal.dt, coeffs)


def min_resolved_scale(kind: WaveletKind, tol: float = 1e-12) -> float:
    """Smallest sample scale whose filter is below ``tol`` at the Nyquist bin.

    Below this scale the sampled wavelet kernel aliases, so the direct
    quadrature and the FFT path no longer describe the same transform.
    """
    return (kind.omega0 + math.sqrt(-2.0 * math.log(tol))) / math.pi


def admissibility_constant(kind: WaveletKind, quad_points: int = 200,
                           lower: float = ADMISSIBILITY_LOWER,
                           upper: float | None = None) -> float:
    """``2 pi int |G^(theta)|^2 / |theta| d theta`` by Gauss-Legendre.

    The integral is truncated to ``|theta|`` in ``[lower, omega0 + 12]``
    (the integrand is below 1e-30 outside for the Morlet family). Each sign
    of ``theta`` gets ``quad_points`` nodes, split evenly over
    ``[lower, 1]`` in log theta and over ``[1, upper]`` in theta.
    """
    if not kind.admissible:
        raise NotAdmissible(
            "the modulated Gaussian has nonzero mean; the admissibility integral diverges"
        )
    if quad_points < 100:
        raise ValueError(f"quad_points must be at least 100, got {quad_points}")
    if upper is None:
        upper = kind.omega0 + ADMISSIBILITY_PAD
    n_log = quad_points // 4
    n_lin = quad_points - n_log
    x, w = np.polynomial.legendre.leggauss(n_log)
    a, b = math.log(lower), 0.0
    u = 0.5 * (b - a) * x + 0.5 * (b + a)
    theta_log = np.exp(u)
    w_log = 0.5 * (b - a) * w  # d theta / theta = du
    x, w = np.polynomial.legendre.leggauss(n_lin)
    theta_lin = 0.5 * (upper - 1.0) * x + 0.5 * (upper + 1.0)
    w_lin = 0.5 * (upper - 1.0) * w / theta_lin
    total = 0.0
    for sign in (1.0, -1.0):
        total += np.sum(w_log * _fourier_real(kind, sign * theta_log) ** 2)
        total += np.sum(w_lin * _fourier_real(kind, sign * theta_lin) ** 2)
    return float(2.0 * np.pi * total)


def log_scale_weights(scales) -> np.ndarray:
    """Midpoint weights of ``d sigma / |sigma|`` on a sorted scale grid.

    Each node owns the cell between the geometric midpoints of its
    neighbours; end cells are mirrored. On ``sigma_j = 2^{j/C}`` every weight
    equals ``ln(2)/C``.
    """
    logs = np.log(np.abs(np.asarray(scales, dtype=float)))
    if logs.size == 1:
        return np.ones(1)
    d = np.diff(logs)
    edges = np.concatenate([[logs[0] - 0.5 * d[0]], 0.5 * (logs[1:] + logs[:-1]),
                            [logs[-1] + 0.5 * d[-1]]])
    return np.diff(edges)


def inverse_cwt_pointwise(grid: CwtGrid, kind: WaveletKind, t: float, c_gamma: float,
                          scale_weights=None) -> float:
    """Reconstruct a real signal at time ``t`` from its Morlet coefficients.

    Quadrature of ``C^{-1} int int W(s,tau) G_{s,tau}(t) d tau ds/|s|`` over the
    positive scales of ``grid``. The negative-scale half of the integral is
    the complex conjugate of the positive half for real signals, so the
    result is twice the real part.
    """
    if not kind.admissible:
        raise NotAdmissible("inversion needs a zero-mean wavelet")
    if not c_gamma > 0:
        raise ValueError(f"c_gamma must be positive, got {c_gamma}")
    dt = grid.dt
    n = grid.n_samples
    if not (0.0 <= t <= (n - 1) * dt):
        raise OutOfWindow(f"t = {t} lies outside [0, {(n - 1) * dt}]")
    if scale_weights is None:
        scale_weights = log_scale_weights(grid.scales)
    tau = dt * np.arange(n)
    tw = np.full(n, dt)
    tw[0] *= 0.5
    tw[-1] *= 0.5
    total = 0.0 + 0.0j
    for j, s in enumerate(grid.scales):
        s_time = s * dt
        atom = wavelet_time(kind, (t - tau) / s_time) / abs(s_time)
        total += scale_weights[j] * np.sum(grid.coefficients[j] * atom * tw)
    return float(2.0 * total.real / c_gamma)
