"""EDMD least-squares solve, spectral decomposition and eigenfunction fields.

The solve works blockwise. For every trajectory block the rows of
``[psi^T | psi_plus^T]`` are folded into the triangular factor of a running
QR decomposition. With ``R = [[R11, R12], [0, R22]]`` the least-squares
matrix is

    K = R12^T pinv(R11)^T,

and the singular values of ``R11`` are those of ``psi``. Truncating the SVD
of ``R11`` is therefore the same as the thin-SVD pseudoinverse
``psi_plus V_r S_r^{-1} U_r^T``, but memory stays at ``O(J'^2)`` plus one block.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import (
    AllSingularValuesTruncated,
    ColumnMappingMissing,
    EigenFailure,
    EmptySpectrum,
    IndexOutOfRange,
    ShapeMismatch,
    ZeroAnchor,
)

DEFAULT_TRUNCATION_TOL = 1e-10
SPURIOUS_ZERO = 1e-12

FLAG_SPURIOUS_ZERO = 1
FLAG_NYQUIST = 2


@dataclass(frozen=True)
class EdmdMatrix:
    k_hat: np.ndarray
    svd_rank: int
    truncation_tol: float
    singular_values: np.ndarray
    n_columns: int


class _ArrayPair:
    """Adapter giving a plain ``(psi, psi_plus)`` pair the block interface."""

    def __init__(self, psi, psi_plus):
        self.psi = np.asarray(psi, dtype=float)
        self.psi_plus = np.asarray(psi_plus, dtype=float)
        if self.psi.ndim != 2 or self.psi.shape != self.psi_plus.shape:
            raise ShapeMismatch(
                f"psi {self.psi.shape} and psi_plus {self.psi_plus.shape} must match"
            )

    @property
    def n_observables(self):
        return self.psi.shape[0]

    def iter_blocks(self):
        yield self.psi, self.psi_plus


def _as_blocks(matrices):
    if isinstance(matrices, tuple):
        return _ArrayPair(*matrices)
    return matrices


@dataclass(frozen=True)
class TriangularFactor:
    """R factor of the stacked snapshot pairs ``[psi^T | psi_plus^T]``."""

    r: np.ndarray
    n_observables: int
    n_columns: int


def triangular_factor(matrices) -> TriangularFactor:
    """Fold every block of ``matrices`` into one ``2J' x 2J'`` R factor."""
    src = _as_blocks(matrices)
    p = src.n_observables
    r = np.zeros((0, 2 * p))
    n_cols = 0
    for psi, psi_plus in src.iter_blocks():
        if psi.shape != psi_plus.shape or psi.shape[0] != p:
            raise ShapeMismatch("psi and psi_plus blocks must share their shape")
        stacked = np.vstack([r, np.hstack([psi.T, psi_plus.T])])
        r = scipy.linalg.qr(stacked, mode="r", check_finite=True)[0]
        r = r[: min(r.shape[0], 2 * p)]
        n_cols += psi.shape[1]
    if r.shape[0] < 2 * p:
        r = np.vstack([r, np.zeros((2 * p - r.shape[0], 2 * p))])
    return TriangularFactor(r, p, n_cols)


def solve_from_factor(factor: TriangularFactor,
                      truncation_tol: float = DEFAULT_TRUNCATION_TOL) -> EdmdMatrix:
    if not 0.0 < truncation_tol < 1.0:
        raise ValueError(f"truncation_tol must lie in (0, 1), got {truncation_tol}")
    p = factor.n_observables
    r11 = factor.r[:p, :p]
    r12 = factor.r[:p, p:]
    u, s, vt = scipy.linalg.svd(r11, full_matrices=False, lapack_driver="gesvd")
    if s.size == 0 or s[0] == 0.0:
        raise AllSingularValuesTruncated("psi is identically zero")
    keep = s > truncation_tol * s[0]
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        raise AllSingularValuesTruncated("no singular value above the truncation threshold")
    k_hat = r12.T @ ((u[:, keep] / s[keep]) @ vt[keep])
    if not np.isfinite(k_hat).all():
        raise AllSingularValuesTruncated("least-squares solution is not finite")
    if factor.n_columns < p:
        warnings.warn(
            f"degenerate data: {factor.n_columns} snapshot columns for {p} observables; "
            f"retained rank {rank}, the minimum-norm solution is returned",
            RuntimeWarning,
            stacklevel=3,
        )
    return EdmdMatrix(k_hat, rank, float(truncation_tol), s, factor.n_columns)


def solve_edmd(matrices, truncation_tol: float = DEFAULT_TRUNCATION_TOL) -> EdmdMatrix:
    """Minimum-norm solution of ``min ||psi_plus - K psi||_F``.

    ``matrices`` is an :class:`~cwdmd.observables.ObservableMatrices` or a
    ``(psi, psi_plus)`` tuple of arrays. Singular values of ``psi`` below
    ``truncation_tol`` times the largest one are discarded.
    """
    if not 0.0 < truncation_tol < 1.0:
        raise ValueError(f"truncation_tol must lie in (0, 1), got {truncation_tol}")
    return solve_from_factor(triangular_factor(matrices), truncation_tol)


def column_residuals(edmd: EdmdMatrix, matrices) -> np.ndarray:
    """Per-column norms ``||psi_plus[:, m] - K psi[:, m]||``."""
    src = _as_blocks(matrices)
    out = [np.linalg.norm(q - edmd.k_hat @ p, axis=0) for p, q in src.iter_blocks()]
    return np.concatenate(out)


@dataclass(frozen=True)
class SpectralDecomposition:
    discrete_eigenvalues: np.ndarray
    continuous_eigenvalues: np.ndarray
    left_eigenvectors: np.ndarray  # column m is w_m
    dt: float
    flags: np.ndarray
    residuals: np.ndarray

    @property
    def size(self) -> int:
        return self.discrete_eigenvalues.size

    @property
    def spurious(self) -> np.ndarray:
        return (self.flags & FLAG_SPURIOUS_ZERO) != 0


def spectral_decomposition(edmd: EdmdMatrix, dt: float) -> SpectralDecomposition:
    """Eigenvalues and unit left eigenvectors of ``K``.

    ``lambda = log(mu)/dt`` on the principal branch. Modes with
    ``|mu| < 1e-12`` are flagged as spurious zeros and modes whose ``|Im
    lambda|`` sits at the Nyquist limit ``pi/dt`` are flagged as aliased.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k = edmd.k_hat
    try:
        mu, vl = scipy.linalg.eig(k, left=True, right=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc
    if not (np.isfinite(mu).all() and np.isfinite(vl).all()):
        raise EigenFailure("eigensolver returned non-finite values")
    vl = vl / np.linalg.norm(vl, axis=0)
    flags = np.zeros(mu.size, dtype=int)
    spurious = np.abs(mu) < SPURIOUS_ZERO
    flags[spurious] |= FLAG_SPURIOUS_ZERO
    lam = np.full(mu.size, complex(-np.inf, 0.0))
    lam[~spurious] = np.log(mu[~spurious]) / dt
    nyq = np.pi / dt
    flags[np.abs(lam.imag) >= nyq * (1.0 - 1e-9)] |= FLAG_NYQUIST
    res = np.linalg.norm(vl.conj().T @ k - mu[:, None] * vl.conj().T, axis=1)
    return SpectralDecomposition(mu, lam, vl, float(dt), flags, res)


def select_eigenpair(spec: SpectralDecomposition, target: complex) -> tuple:
    """Index and distance of the non-spurious ``lambda`` closest to ``target``."""
    valid = np.flatnonzero(~spec.spurious)
    if valid.size == 0:
        raise EmptySpectrum("no non-spurious eigenvalue")
    d = np.abs(spec.continuous_eigenvalues[valid] - complex(target))
    best = int(np.argmin(d))
    return int(valid[best]), float(d[best])


@dataclass(frozen=True)
class ComplexField:
    points: np.ndarray
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        if self.points.shape[0] != self.values.shape[0]:
            raise ShapeMismatch("one value per point is required")


def eigenfunction_field(spec: SpectralDecomposition, mode: int, matrices, points,
                        columns) -> ComplexField:
    """Evaluate ``w_mode^H psi`` at the psi columns ``columns = [(k, i), ...]``.

    ``points[q]`` is the state attached to ``columns[q]``.
    """
    if not 0 <= int(mode) < spec.size:
        raise IndexOutOfRange(f"mode {mode} outside 0..{spec.size - 1}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    columns = list(columns)
    if len(columns) != points.shape[0]:
        raise ColumnMappingMissing(
            f"{points.shape[0]} points but {len(columns)} column references"
        )
    if spec.left_eigenvectors.shape[0] != matrices.n_observables:
        raise ShapeMismatch("eigenvectors and observables differ in length")
    w = spec.left_eigenvectors[:, int(mode)]
    values = np.empty(len(columns), dtype=complex)
    for q, (k, i) in enumerate(columns):
        values[q] = np.vdot(w, matrices.column(k, i))
    return ComplexField(points, values, False)


def normalize_field(field: ComplexField, anchor: int,
                    reference_argument: float = 0.0) -> ComplexField:
    """Scale by one complex number so that max modulus is 1 and the anchor
    has argument ``reference_argument``."""
    v = field.values
    if v.size == 0:
        raise ZeroAnchor("empty field")
    if not 0 <= int(anchor) < v.size:
        raise IndexOutOfRange(f"anchor {anchor} outside 0..{v.size - 1}")
    a = v[int(anchor)]
    vmax = float(np.max(np.abs(v)))
    if a == 0 or not np.isfinite(a) or vmax == 0.0:
        raise ZeroAnchor("field vanishes at the anchor")
    scale = np.exp(1j * (reference_argument - np.angle(a))) / vmax
    return replace(field, values=v * scale, normalized=True)


def complex_correlation(a, b) -> float:
    """``|<a, b>| / (||a|| ||b||)``."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def scaled_relative_l2(approx, reference) -> float:
    """Relative L2 error of ``c*approx`` against ``reference`` for the best complex ``c``."""
    a = np.asarray(approx, dtype=complex).ravel()
    b = np.asarray(reference, dtype=complex).ravel()
    c = np.vdot(a, b) / np.vdot(a, a)
    return float(np.linalg.norm(c * a - b) / np.linalg.norm(b))
