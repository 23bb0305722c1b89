"""Morlet reconstructions of the Koopman semigroup action and resolvent on g.

Both operations take the modulated Gaussian observables ``psi_j = psi_{s_j}(x)``
on the positive scales of a dyadic grid. The negative-scale half of the scale
integral is added through ``psi_{-s} = conj(psi_s)``, which holds for real
outputs. Scale quadrature uses ``d sigma`` weights ``alpha_j = sigma_j ln(2)/C``,
so ``alpha_j/|sigma_j|`` is the log-uniform weight ``ln(2)/C`` of the measure
``d sigma/|sigma|``.

The reconstructions are exact only up to a convention-dependent global
factor. :func:`calibrate_scheme` fits that factor once at zero lag against
recorded outputs and stores it in the scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpectralPoint, SchemeMismatch, ZeroFrequency
from .observables import ScaleGrid
from .wavelet import WaveletKind, admissibility_constant, log_scale_weights

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureScheme:
    """Nodes and weights for the Morlet scale integrals.

    ``scales`` are sample scales, ``time_scales = scales*dt``. ``weights`` are
    the ``d sigma`` weights in time units. ``calibration`` is the real
    global factor fitted by :func:`calibrate_scheme` (1 when uncalibrated).
    """

    scales: np.ndarray
    dt: float
    weights: np.ndarray
    c_gamma: float
    omega0: float
    kappa: float
    calibration: float = 1.0

    @property
    def time_scales(self) -> np.ndarray:
        return self.scales * self.dt

    @property
    def size(self) -> int:
        return self.scales.size

    def subset(self, mask) -> "QuadratureScheme":
        """Scheme restricted to the nodes selected by ``mask``."""
        mask = np.asarray(mask)
        return replace(self, scales=self.scales[mask], weights=self.weights[mask])


def make_quadrature_scheme(grid: ScaleGrid, dt: float, omega0: float = 6.0,
                           quad_points: int = 400) -> QuadratureScheme:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    kind = WaveletKind.morlet(omega0)
    scales = np.asarray(grid.scales, dtype=float)
    weights = log_scale_weights(scales) * scales * dt
    return QuadratureScheme(
        scales=scales,
        dt=float(dt),
        weights=weights,
        c_gamma=admissibility_constant(kind, quad_points),
        omega0=kind.omega0,
        kappa=kind.kappa,
    )


def _check(psi_values, scheme: QuadratureScheme) -> np.ndarray:
    psi = np.asarray(psi_values, dtype=complex)
    if psi.shape[-1] != scheme.size:
        raise SchemeMismatch(f"{psi.shape[-1]} psi values for {scheme.size} quadrature nodes")
    return psi


def _prefactor(scheme: QuadratureScheme) -> np.ndarray:
    return scheme.calibration * _SQRT_2PI / scheme.c_gamma * scheme.weights / scheme.time_scales


def koopman_action_quadrature(psi_values, scheme: QuadratureScheme, delta_t):
    """Approximate ``K_{dt}[g](x) = y(dt, x)`` from ``psi_{s_j}(x)``.

    ``psi_values`` has shape ``(..., J)``; ``delta_t`` may be an array, in
    which case its axis is appended to the output shape.
    """
    psi = _check(psi_values, scheme)
    dts = np.asarray(delta_t, dtype=float)
    if np.any(dts < 0):
        raise ValueError("delta_t must be nonnegative")
    freq = scheme.omega0 / scheme.time_scales
    kernel = np.exp(1j * np.multiply.outer(freq, dts)) - scheme.kappa  # (J, ...)
    coeff = psi * _prefactor(scheme)
    out = 2.0 * np.tensordot(coeff, kernel, axes=([-1], [0])).real
    return float(out) if out.ndim == 0 else out


def resolvent_quadrature(psi_values, scheme: QuadratureScheme, s):
    """Approximate ``((s id - K)^{-1} g)(x)`` for ``Re s > 0``.

    ``s`` may be an array; its axis is appended to the output shape.
    """
    psi = _check(psi_values, scheme)
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr.real <= 0):
        raise InvalidSpectralPoint("the Laplace representation needs Re(s) > 0")
    freq = scheme.omega0 / scheme.time_scales
    sv = s_arr.reshape(-1)
    kap = scheme.kappa / sv[None, :]
    plus = 1.0 / (sv[None, :] - 1j * freq[:, None]) - kap
    minus = 1.0 / (sv[None, :] + 1j * freq[:, None]) - kap
    coeff = psi * _prefactor(scheme)
    out = coeff @ plus + coeff.conj() @ minus
    out = out.reshape(psi.shape[:-1] + s_arr.shape)
    return complex(out) if out.ndim == 0 else out


def calibrate_scheme(scheme: QuadratureScheme, psi_values, outputs_at_zero) -> QuadratureScheme:
    """Fit the real global factor so that the zero-lag reconstruction
    matches ``outputs_at_zero`` in least squares."""
    base = replace(scheme, calibration=1.0)
    rec = np.atleast_1d(koopman_action_quadrature(psi_values, base, 0.0))
    y = np.atleast_1d(np.asarray(outputs_at_zero, dtype=float))
    denom = float(np.dot(rec, rec))
    if denom == 0.0:
        raise ValueError("zero-lag reconstruction vanishes; cannot calibrate")
    return replace(scheme, calibration=float(np.dot(rec, y) / denom))


def eigenfunction_surrogate_scale(s: complex, omega0: float, dt: float) -> float:
    """Sample scale ``omega0/(|Im s| dt)`` whose observable tracks the
    resolvent at ``s`` up to a complex factor."""
    s = complex(s)
    if s.imag == 0.0:
        raise ZeroFrequency("Im(s) must be nonzero")
    if not (omega0 > 0 and dt > 0):
        raise ValueError("omega0 and dt must be positive")
    return float(omega0 / (abs(s.imag) * dt))


def nearest_scale_index(scales, sigma: float) -> int:
    """Index of the grid scale closest to ``sigma`` in log distance."""
    scales = np.asarray(scales, dtype=float)
    return int(np.argmin(np.abs(np.log(scales) - math.log(sigma))))


def laplace_truncated(values, times, s: complex) -> complex:
    """Trapezoid approximation of ``int_0^T exp(-s t) f(t) dt``."""
    values = np.asarray(values)
    times = np.asarray(times, dtype=float)
    return complex(np.trapezoid(np.exp(-complex(s) * times) * values, times))
