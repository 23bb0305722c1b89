"""Wavelet-based observables and the realified EDMD data matrices.

The observable ``psi_s(x)`` is the wavelet transform of the output trajectory
started at ``x``, evaluated at scale ``s`` and shift 0. Its Koopman image
``K_{i dt}[psi_s](x)`` is the same transform at shift ``i*dt``. One FFT
transform per trajectory therefore yields a whole trajectory of observable
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .dynsys import OutputEnsemble
from .errors import ColumnMappingMissing, DtNotOnGrid, LengthMismatch, OutOfWindow
from .wavelet import Signal, WaveletKind, cwt_fft

# Additive slack of the residual check, relative to max|y|. The FFT transform
# agrees with direct quadrature to about 1e-10 relative error, so 1e-4
# leaves a wide margin.
RESIDUAL_SLACK = 1e-4


@dataclass(frozen=True)
class ScaleGrid:
    c_param: int
    j_max: int
    scales: np.ndarray

    @property
    def size(self) -> int:
        return self.scales.size


def make_scale_grid(c_param: int, j_max: int) -> ScaleGrid:
    """Dyadic grid ``s_j = 2^{j/C}`` for ``j = 1..J`` in sample units."""
    if int(c_param) != c_param or c_param < 1:
        raise ValueError(f"c_param must be a positive integer, got {c_param}")
    if int(j_max) != j_max or j_max < 1:
        raise ValueError(f"j_max must be a positive integer, got {j_max}")
    scales = np.exp2(np.arange(1, j_max + 1) / c_param)
    scales.setflags(write=False)
    return ScaleGrid(int(c_param), int(j_max), scales)


@dataclass(frozen=True)
class ObservableEvaluations:
    """``per_trajectory[k][j, i] ~ K_{i dt}[psi_{s_j}](x0^(k))``."""

    scales: ScaleGrid
    kind: WaveletKind
    dt: float
    per_trajectory: tuple

    @property
    def n_trajectories(self) -> int:
        return len(self.per_trajectory)

    @property
    def n_samples(self) -> int:
        return self.per_trajectory[0].shape[1]

    def at_shift(self, i: int) -> np.ndarray:
        """Values at shift ``i`` for every trajectory, shape ``(K, J)``."""
        return np.stack([w[:, i] for w in self.per_trajectory])


def evaluate_observables(ensemble: OutputEnsemble, grid: ScaleGrid,
                         kind: WaveletKind) -> ObservableEvaluations:
    if len(ensemble) == 0:
        raise ValueError("ensemble is empty")
    blocks = []
    for tr in ensemble.trajectories:
        cw = cwt_fft(Signal(ensemble.dt, tr.outputs), grid.scales, kind)
        blocks.append(cw.coefficients)
    return ObservableEvaluations(grid, kind, ensemble.dt, tuple(blocks))


@dataclass(frozen=True)
class ObservableMatrices:
    """Realified snapshot matrices, one block per trajectory.

    Rows are ``Re w_1..Re w_J, Im w_1..Im w_J, mean``. Block ``k`` holds the
    observable vectors at shifts ``0..N``. Columns ``0..N-1`` go to ``psi``
    and columns ``1..N`` to ``psi_plus``. Blocks are realified on demand, so
    the full matrices exist in memory only when ``psi`` or ``psi_plus`` are
    requested explicitly.
    """

    evaluations: ObservableEvaluations
    means: np.ndarray

    @property
    def n_observables(self) -> int:
        return 2 * self.evaluations.scales.size + 1

    @property
    def n_trajectories(self) -> int:
        return self.evaluations.n_trajectories

    @property
    def steps(self) -> int:
        """Columns per trajectory block (N)."""
        return self.evaluations.n_samples - 1

    @property
    def n_columns(self) -> int:
        return self.n_trajectories * self.steps

    def block(self, k: int) -> np.ndarray:
        w = self.evaluations.per_trajectory[k]
        out = np.empty((self.n_observables, w.shape[1]))
        j = w.shape[0]
        out[:j] = w.real
        out[j:2 * j] = w.imag
        out[2 * j] = self.means[k]
        return out

    def iter_blocks(self) -> Iterator[tuple]:
        for k in range(self.n_trajectories):
            b = self.block(k)
            yield b[:, :-1], b[:, 1:]

    def column_index(self, k: int, i: int) -> int:
        if not (0 <= k < self.n_trajectories and 0 <= i < self.steps):
            raise ColumnMappingMissing(f"no psi column for trajectory {k}, shift {i}")
        return k * self.steps + i

    def column(self, k: int, i: int) -> np.ndarray:
        self.column_index(k, i)
        w = self.evaluations.per_trajectory[k][:, i]
        return np.concatenate([w.real, w.imag, [self.means[k]]])

    @property
    def psi(self) -> np.ndarray:
        return np.hstack([p for p, _ in self.iter_blocks()])

    @property
    def psi_plus(self) -> np.ndarray:
        return np.hstack([q for _, q in self.iter_blocks()])

    def observable_names(self) -> list:
        j = self.evaluations.scales.size
        return ([f"re_s{i}" for i in range(1, j + 1)]
                + [f"im_s{i}" for i in range(1, j + 1)] + ["mean"])


def realify_and_assemble(evals: ObservableEvaluations,
                         ensemble: OutputEnsemble) -> ObservableMatrices:
    if evals.n_trajectories != len(ensemble):
        raise LengthMismatch(
            f"{evals.n_trajectories} evaluated trajectories, ensemble has {len(ensemble)}"
        )
    if evals.n_samples != ensemble.n_samples:
        raise LengthMismatch(
            f"evaluations have {evals.n_samples} shifts, trajectories {ensemble.n_samples} samples"
        )
    if evals.n_samples < 2:
        raise LengthMismatch("need at least two samples per trajectory")
    means = np.array([tr.outputs.mean() for tr in ensemble.trajectories])
    means.setflags(write=False)
    return ObservableMatrices(evals, means)


# ---------------------------------------------------------------------------
# residual bound of the modulated Gaussian eigenfunction relation


@dataclass(frozen=True)
class ResidualEntry:
    trajectory: int
    dt: float
    residual: float
    bound: float
    holds: bool


@dataclass(frozen=True)
class ResidualReport:
    sigma: float
    omega0: float
    anchor_index: int
    slack: float
    entries: tuple
    slopes: tuple
    slope: float

    @property
    def all_hold(self) -> bool:
        return all(e.holds for e in self.entries)


def _to_samples(value: float, dt: float, what: str) -> int:
    m = value / dt
    r = round(m)
    if abs(m - r) > 1e-9 * max(1.0, abs(m)):
        raise DtNotOnGrid(f"{what} = {value} is not a multiple of the sampling step {dt}")
    return int(r)


def check_eigen_residual_bound(ensemble: OutputEnsemble, sigma: float, omega0: float,
                               dt_list, anchor_index: int = 0,
                               slack_rel: float = RESIDUAL_SLACK,
                               trajectories=None) -> ResidualReport:
    """Compare the modulated Gaussian eigen-relation residual with its bound.

    ``sigma`` and ``dt_list`` are in time units and are converted to samples.
    For every trajectory and every lag ``m`` the residual is
    ``|W(s, a+m) - exp(i w0 m/s - m^2/(2 s^2)) W(s, a)|`` and the bound is
    ``s sqrt(2 pi) (exp(m^2/(2 s^2)) - 1) max|y|``, with ``s`` and ``m`` in
    samples and ``a = anchor_index``. An anchor away from the window start
    avoids the periodic wrap of the FFT transform. The reported slope is the
    mean over trajectories of the least-squares slope of ``log r`` against
    ``log dt`` over the positive lags.
    """
    dt = ensemble.dt
    s = sigma / dt
    if not s > 0:
        raise ValueError("sigma must be positive")
    lags = [_to_samples(float(d), dt, "dt") for d in dt_list]
    if any(m < 0 for m in lags):
        raise DtNotOnGrid("lags must be nonnegative")
    n = ensemble.n_samples
    a = int(anchor_index)
    if a < 0 or a + max(lags, default=0) >= n:
        raise OutOfWindow("anchor plus largest lag exceeds the trajectory window")
    kind = WaveletKind.modulated_gaussian(omega0)
    ks = range(len(ensemble)) if trajectories is None else trajectories
    entries = []
    slopes = []
    for k in ks:
        logs_x, logs_y = [], []
        tr = ensemble.trajectories[k]
        w = cwt_fft(Signal(dt, tr.outputs), [s], kind).coefficients[0]
        ymax = float(np.max(np.abs(tr.outputs)))
        for m in lags:
            if m == 0:
                r = 0.0
            else:
                phase = np.exp(1j * omega0 * m / s - m * m / (2.0 * s * s))
                r = float(abs(w[a + m] - phase * w[a]))
            bound = s * math.sqrt(2.0 * math.pi) * math.expm1(m * m / (2.0 * s * s)) * ymax
            entries.append(ResidualEntry(k, m * dt, r, bound, r <= bound + slack_rel * ymax))
            if m > 0 and r > 0:
                logs_x.append(math.log(m * dt))
                logs_y.append(math.log(r))
        if len(set(logs_x)) >= 2:
            slopes.append(float(np.polyfit(logs_x, logs_y, 1)[0]))
    slope = float(np.mean(slopes)) if slopes else float("nan")
    return ResidualReport(float(sigma), float(omega0), a, slack_rel, tuple(entries),
                          tuple(slopes), slope)
