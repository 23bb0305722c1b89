"""Property suite behind ``cwdmd check``.

Every module invariant is exercised on a down-scaled problem so the whole
suite runs in about a minute:

* LTI ensembles use the configured ``A``, ``c``, ``dt`` and ``substeps`` with
  8 initial conditions on the horizon ``[0, 2]``.
* EDMD invariants use a coarse grid (C = 8, J = 72) on the same ensemble.
* CWT checks use synthetic signals of 2^13 + 1 samples.

The suite reports one :class:`CheckResult` per property and never raises for
a failed property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .config import ExperimentConfig, default_config
from .dynsys import (
    Circle,
    SystemSpec,
    integrate_ensemble,
    integrate_rk4,
    lti,
    sample_initial_conditions,
)
from .edmd import (
    ComplexField,
    column_residuals,
    eigenfunction_field,
    normalize_field,
    solve_edmd,
    spectral_decomposition,
)
from .observables import (
    check_eigen_residual_bound,
    evaluate_observables,
    make_scale_grid,
    realify_and_assemble,
)
from .resolvent import (
    calibrate_scheme,
    koopman_action_quadrature,
    laplace_truncated,
    make_quadrature_scheme,
    resolvent_quadrature,
)
from .wavelet import (
    CWT_FFT_NORMALIZATION,
    Signal,
    WaveletKind,
    admissibility_constant,
    cwt_direct,
    cwt_fft,
    inverse_cwt_pointwise,
    min_resolved_scale,
    wavelet_fourier,
    wavelet_time,
)

SUITE_IC_COUNT = 8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


# ---------------------------------------------------------------------------
# reusable measurements (also used by the acceptance tests)


def cwt_oracle_error(kind: WaveletKind, normalization: float = CWT_FFT_NORMALIZATION,
                     n_samples: int = 2 ** 16 + 1, dt: float = 1e-3, n_scales: int = 10,
                     max_scale: float = 512.0, n_shifts: int = 40, seed: int = 0) -> float:
    """Worst per-scale relative error of the FFT transform against direct
    quadrature at interior shifts.

    The calibration signal is a sum of 20 random cosines. The 10 scales are
    log-spaced from the smallest alias-free scale up to ``max_scale``. Errors
    are taken relative to the largest interior coefficient of each scale.
    The default window keeps the 10% edge band at least 12 of the largest
    scales wide, so the periodic wrap of the FFT path stays below 1e-10.
    """
    rng = np.random.default_rng(seed)
    t = dt * np.arange(n_samples)
    nyq = math.pi / dt
    omegas = rng.uniform(0.005 * nyq, 0.6 * nyq, 20)
    phases = rng.uniform(0.0, 2.0 * math.pi, 20)
    h = np.cos(np.outer(t, omegas) + phases).sum(axis=1)
    sig = Signal(dt, h)
    scales = np.geomspace(min_resolved_scale(kind), max_scale, n_scales)
    grid = cwt_fft(sig, scales, kind, normalization=normalization)
    lo, hi = int(0.1 * n_samples), int(0.9 * n_samples)
    idx = np.linspace(lo, hi, n_shifts).astype(int)
    worst = 0.0
    for j, s in enumerate(scales):
        direct = cwt_direct(sig, kind, s, idx * dt)
        ref = np.max(np.abs(grid.coefficients[j, lo:hi]))
        worst = max(worst, float(np.max(np.abs(direct - grid.coefficients[j, idx])) / ref))
    return worst


def pulse_reconstruction_error(width: float = 4.0, n_samples: int = 32768,
                               c_param: int = 20, j_range=(20, 260)) -> tuple:
    """Relative error of the inverse transform of a unit Gaussian pulse at its centre.

    Returns ``(error, number_of_scales)``. Scales ``2^{j/C}`` for ``j`` in
    ``j_range`` span 2 to 8192 samples around a pulse of ``width`` samples.
    """
    kind = WaveletKind.morlet(6.0)
    t = np.arange(n_samples, dtype=float)
    centre = n_samples // 2
    h = np.exp(-0.5 * ((t - centre) / width) ** 2)
    scales = np.exp2(np.arange(j_range[0], j_range[1] + 1) / c_param)
    grid = cwt_fft(Signal(1.0, h), scales, kind)
    rec = inverse_cwt_pointwise(grid, kind, float(centre), admissibility_constant(kind))
    return abs(rec - 1.0), scales.size


def lti_ensemble(cfg: ExperimentConfig, count: int = SUITE_IC_COUNT, seed: int | None = None):
    system = cfg.build_system()
    x0 = sample_initial_conditions(cfg.region(), count, cfg.seed if seed is None else seed,
                                   system.dimension)
    return integrate_ensemble(system, x0, cfg.dt, cfg.steps, cfg.substeps)


def reconstruction_study(ensemble, cfg: ExperimentConfig, max_lag_time: float = 1.0):
    """Semigroup reconstruction against recorded outputs.

    Each trajectory is entered at the interior anchor ``a`` (the first shift
    after the edge band), so the observables at the anchor are free of
    wrap-around. The global scalar is calibrated at zero lag across the
    ensemble. Returns ``(relative_l2, calibration)`` over lags in
    ``[0, max_lag_time]``.
    """
    grid = make_scale_grid(cfg.c_param, cfg.j_max)
    evals = evaluate_observables(ensemble, grid, WaveletKind.modulated_gaussian(cfg.omega0))
    a = int(math.ceil(cfg.interior_fraction * cfg.steps))
    lags = np.arange(0, int(round(max_lag_time / cfg.dt)) + 1)
    if a + lags[-1] >= ensemble.n_samples:
        raise ValueError("lag window exceeds the trajectories")
    psi = evals.at_shift(a)
    outputs = ensemble.outputs
    scheme = calibrate_scheme(make_quadrature_scheme(grid, cfg.dt, cfg.omega0), psi, outputs[:, a])
    rec = koopman_action_quadrature(psi, scheme, lags * cfg.dt)
    ref = outputs[:, a + lags]
    return float(np.linalg.norm(rec - ref) / np.linalg.norm(ref)), scheme.calibration


def laplace_study(ensemble, cfg: ExperimentConfig, s: complex = 1 + 10j, n_traj: int = 3):
    """Truncated Laplace transform of the reconstruction versus the resolvent quadrature.

    Returns a list of ``(discrepancy, bound)`` with
    ``bound = exp(-Re(s) T) max|y| / Re(s)``. The time grid is fine enough to
    resolve the highest quadrature frequency with 20 points per period.
    """
    grid = make_scale_grid(cfg.c_param, cfg.j_max)
    evals = evaluate_observables(ensemble, grid, WaveletKind.modulated_gaussian(cfg.omega0))
    a = int(math.ceil(cfg.interior_fraction * cfg.steps))
    psi = evals.at_shift(a)[:n_traj]
    scheme = calibrate_scheme(make_quadrature_scheme(grid, cfg.dt, cfg.omega0),
                              evals.at_shift(a), ensemble.outputs[:, a])
    T = cfg.horizon
    w_max = cfg.omega0 / scheme.time_scales.min()
    n_t = int(math.ceil(T * w_max * 20 / (2 * math.pi))) + 1
    times = np.linspace(0.0, T, n_t)
    out = []
    for q in range(psi.shape[0]):
        r_t = koopman_action_quadrature(psi[q], scheme, times)
        lap = laplace_truncated(r_t, times, s)
        res = resolvent_quadrature(psi[q], scheme, s)
        ymax = float(np.max(np.abs(ensemble.trajectories[q].outputs)))
        out.append((abs(lap - res), math.exp(-s.real * T) * ymax / s.real))
    return out


def residual_study(ensemble, cfg: ExperimentConfig, target_rad: float = 500.0):
    """Residual bound at the scale matched to ``target_rad`` with lags 1, 2, 4, 8 samples."""
    sigma = cfg.omega0 / target_rad
    a = int(math.ceil(cfg.interior_fraction * cfg.steps))
    return check_eigen_residual_bound(ensemble, sigma, cfg.omega0,
                                      [cfg.dt, 2 * cfg.dt, 4 * cfg.dt, 8 * cfg.dt],
                                      anchor_index=a)


def residual_triples(ensemble, cfg: ExperimentConfig, count: int = 20, seed: int = 7):
    """Random ``(trajectory, scale, lag)`` triples checked against the bound.

    Scales are drawn from the experiment grid, lags from 1 to 16 samples.
    Returns a list of ``ResidualEntry`` objects.
    """
    rng = np.random.default_rng(seed)
    grid = make_scale_grid(cfg.c_param, cfg.j_max)
    a = int(math.ceil(cfg.interior_fraction * cfg.steps))
    entries = []
    for _ in range(count):
        k = int(rng.integers(len(ensemble)))
        s = float(grid.scales[int(rng.integers(grid.size))])
        m = int(rng.integers(1, 17))
        rep = check_eigen_residual_bound(ensemble, s * cfg.dt, cfg.omega0, [m * cfg.dt],
                                         anchor_index=a, trajectories=[k])
        entries.extend(rep.entries)
    return entries


def kappa_relative_change(psi, scheme, s_values) -> np.ndarray:
    """Relative change (ensemble norm) of the resolvent quadrature when kappa is dropped."""
    full = resolvent_quadrature(psi, scheme, s_values)
    nok = resolvent_quadrature(psi, replace(scheme, kappa=0.0), s_values)
    return np.linalg.norm(full - nok, axis=0) / np.linalg.norm(full, axis=0)


# ---------------------------------------------------------------------------
# the suite


def _rotation() -> SystemSpec:
    return lti([[0.0, 1.0], [-1.0, 0.0]], [1.0, 0.0])


def _checks_dynsys(cfg, ens):
    out = []
    A = np.asarray(cfg.params["A"], dtype=float)
    x0 = ens.initial_conditions[0]
    tr = ens.trajectories[0]
    ref = np.array([scipy.linalg.expm(A * t) @ x0 for t in tr.times[::50]])
    err = np.linalg.norm(tr.states[::50] - ref, axis=1) / np.linalg.norm(ref, axis=1)
    out.append(CheckResult("dynsys.rk4_vs_expm", float(err.max()) <= 1e-6,
                           f"max relative error {err.max():.2e} (limit 1e-6)"))
    rot = _rotation()
    errs = []
    for dt in (0.1, 0.05):
        steps = int(round(2.0 / dt))
        end = integrate_rk4(rot, [1.0, 0.0], dt, steps).states[-1]
        errs.append(np.linalg.norm(end - np.array([math.cos(2.0), -math.sin(2.0)])))
    ratio = errs[0] / errs[1]
    out.append(CheckResult("dynsys.rk4_order", 14.0 <= ratio <= 18.0,
                           f"error ratio {ratio:.3f} (range [14, 18])"))
    sys_ = cfg.build_system()
    same = all(tr.outputs[i] == sys_.output_map(tr.states[i]) for i in range(0, tr.n_samples, 97))
    out.append(CheckResult("dynsys.output_consistency", bool(same), "outputs equal output_map(states)"))
    a = sample_initial_conditions(cfg.region(), 5, 123, sys_.dimension)
    b = sample_initial_conditions(cfg.region(), 5, 123, sys_.dimension)
    out.append(CheckResult("dynsys.seeded_sampling", bool(np.array_equal(a, b)),
                           "same seed gives identical samples"))
    return out


def _checks_wavelet(normalization):
    out = []
    k = WaveletKind.morlet(6.0)
    err = cwt_oracle_error(k, normalization, n_samples=2 ** 13 + 1, max_scale=128.0)
    out.append(CheckResult("wavelet.cwt_oracle_equivalence", err <= 1e-6,
                           f"worst relative error {err:.2e} (limit 1e-6)"))
    rng = np.random.default_rng(1)
    n = 4097
    h = np.convolve(rng.standard_normal(n + 64), np.hanning(33), mode="same")[:n]
    sig = Signal(1.0, h)
    scales = [6.0, 12.0, 24.0]
    m = 5
    g0 = cwt_fft(sig, scales, k).coefficients
    g1 = cwt_fft(Signal(1.0, np.roll(h, -m)), scales, k).coefficients
    inner = slice(int(0.1 * n), int(0.9 * n) - m)
    cov = float(np.max(np.abs(g1[:, inner] - g0[:, inner.start + m: inner.stop + m]))
                / np.max(np.abs(g0[:, inner])))
    out.append(CheckResult("wavelet.translation_covariance", cov <= 1e-6,
                           f"relative error {cov:.2e} (limit 1e-6)"))
    wp = cwt_fft(sig, [12.0], k).coefficients[0]
    wm = cwt_fft(sig, [-12.0], k).coefficients[0]
    r_real = np.linalg.matrix_rank(np.vstack([wp.real, wp.imag]))
    r_cplx = np.linalg.matrix_rank(np.vstack([wp, wm]))
    conj_ok = np.allclose(wm, np.conj(wp), rtol=0, atol=1e-12 * np.abs(wp).max())
    out.append(CheckResult("wavelet.conjugate_symmetry", bool(r_real == r_cplx and conj_ok),
                           f"ranks {r_real} / {r_cplx}, W(-s) = conj W(s): {conj_ok}"))
    om = np.random.default_rng(2).uniform(-10.0, 20.0, 20)
    t = np.linspace(-40.0, 40.0, 16001)
    quad = np.array([np.trapezoid(wavelet_time(k, t) * np.exp(-1j * w * t), t) for w in om])
    quad /= math.sqrt(2.0 * math.pi)
    ferr = float(np.max(np.abs(quad - wavelet_fourier(k, om))))
    out.append(CheckResult("wavelet.fourier_vs_quadrature", ferr <= 1e-8,
                           f"max abs error {ferr:.2e} (limit 1e-8)"))
    perr, nsc = pulse_reconstruction_error()
    out.append(CheckResult("wavelet.inverse_pulse", perr <= 1e-2,
                           f"relative error {perr:.2e} with {nsc} scales (limit 1e-2)"))
    return out


def _small_pipeline(cfg, ens):
    grid = make_scale_grid(8, 72)
    evals = evaluate_observables(ens, grid, WaveletKind.morlet(cfg.omega0))
    mats = realify_and_assemble(evals, ens)
    edmd = solve_edmd(mats, cfg.truncation_tol)
    return mats, edmd, spectral_decomposition(edmd, cfg.dt)


def _checks_observables(cfg, ens, mats):
    out = []
    ok = True
    for p, q in mats.iter_blocks():
        ok &= bool(np.array_equal(q[:, :-1], p[:, 1:]))
    out.append(CheckResult("observables.block_shift", ok, "psi_plus[:, m] == psi[:, m+1] per block"))
    w = mats.evaluations.per_trajectory[0][10]
    r1 = np.linalg.matrix_rank(np.vstack([w.real, w.imag]))
    r2 = np.linalg.matrix_rank(np.vstack([w, w.conj()]))
    out.append(CheckResult("observables.row_space_equivalence", r1 == r2, f"ranks {r1} / {r2}"))
    const = replace(ens, trajectories=tuple(
        replace(tr, outputs=np.full(tr.n_samples, 7.0)) for tr in ens.trajectories[:2]),
        initial_conditions=ens.initial_conditions[:2])
    cm = realify_and_assemble(evaluate_observables(const, make_scale_grid(8, 16),
                                                   WaveletKind.morlet(cfg.omega0)), const)
    psi = cm.psi
    wave_max = float(np.abs(psi[:-1]).max())
    ce = solve_edmd(cm, cfg.truncation_tol)
    out.append(CheckResult("observables.constant_output", wave_max <= 1e-8 and ce.svd_rank == 1,
                           f"max wavelet row {wave_max:.1e}, rank {ce.svd_rank}"))
    rep = residual_study(ens, cfg)
    out.append(CheckResult("observables.residual_bound", rep.all_hold,
                           f"{sum(e.holds for e in rep.entries)}/{len(rep.entries)} within bound"))
    out.append(CheckResult("observables.residual_slope", abs(rep.slope - 2.0) <= 0.2,
                           f"log-log slope {rep.slope:.3f} (target 2 +- 0.2)"))
    return out


def _checks_edmd(cfg, ens, mats, edmd, spec):
    out = []
    rng = np.random.default_rng(3)
    M = rng.standard_normal((6, 6))
    M = M / np.linalg.norm(M, 2) * 0.9 + 0.1 * np.eye(6)
    psi = rng.standard_normal((6, 40))
    rec = solve_edmd((psi, M @ psi), 1e-12).k_hat
    e = float(np.linalg.norm(rec - M) / np.linalg.norm(M))
    out.append(CheckResult("edmd.synthetic_exactness", e <= 1e-8, f"relative error {e:.2e}"))
    p = rng.standard_normal((3, 12))
    psi = np.vstack([p, p[:2]])
    psi_plus = rng.standard_normal((5, 12))
    k = solve_edmd((psi, psi_plus), 1e-10).k_hat
    e2 = float(np.abs(k - psi_plus @ np.linalg.pinv(psi, rcond=1e-10)).max())
    out.append(CheckResult("edmd.pseudoinverse_oracle", e2 <= 1e-10, f"max deviation {e2:.2e}"))
    knorm = np.linalg.norm(edmd.k_hat, 2)
    worst = float(spec.residuals.max() / knorm)
    out.append(CheckResult("edmd.eigen_residual", worst <= 1e-8, f"max residual/||K|| {worst:.2e}"))
    base = float(np.sqrt(np.sum(column_residuals(edmd, mats) ** 2)))
    worse = True
    for _ in range(20):
        d = rng.standard_normal(edmd.k_hat.shape)
        d *= 1e-3 * np.linalg.norm(edmd.k_hat) / np.linalg.norm(d)
        pert = replace(edmd, k_hat=edmd.k_hat + d)
        worse &= float(np.sqrt(np.sum(column_residuals(pert, mats) ** 2))) >= base
    out.append(CheckResult("edmd.ls_optimality", bool(worse), "20 random perturbations never improve"))
    idx = int(np.argmax(np.abs(spec.discrete_eigenvalues)))
    cols = [(0, i) for i in range(100, 120)]
    f = eigenfunction_field(spec, idx, mats, np.zeros((len(cols), 2)), cols)
    nf = eigenfunction_field(spec, idx, mats, np.zeros((len(cols), 2)), [(0, i + 1) for i in range(100, 120)])
    res = column_residuals(edmd, mats)[100:120]
    mu = spec.discrete_eigenvalues[idx]
    prop = bool(np.all(np.abs(nf.values - mu * f.values) <= res * (1 + 1e-9) + 1e-12))
    out.append(CheckResult("edmd.one_step_propagation", prop, "|f(next) - mu f| <= LS residual"))
    v = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    fld = ComplexField(np.zeros((30, 1)), v)
    a = normalize_field(fld, 3, 0.4).values
    b = normalize_field(replace(fld, values=v * (2.5 - 1.3j)), 3, 0.4).values
    e3 = float(np.abs(a - b).max())
    out.append(CheckResult("edmd.normalize_scale_invariance", e3 <= 1e-12, f"max deviation {e3:.1e}"))
    return out


def _checks_resolvent(cfg, ens):
    out = []
    rel, calib = reconstruction_study(ens, cfg)
    out.append(CheckResult("resolvent.semigroup_reconstruction", rel <= 0.05,
                           f"relative L2 {rel:.3f} over lags [0, 1] (limit 0.05), "
                           f"calibration {calib:.4f}"))
    lap = laplace_study(ens, cfg)
    ok = all(d <= b for d, b in lap)
    worst = max(d / b for d, b in lap)
    out.append(CheckResult("resolvent.laplace_consistency", ok,
                           f"worst discrepancy/bound {worst:.2e}"))
    grid = make_scale_grid(cfg.c_param, cfg.j_max)
    evals = evaluate_observables(ens, grid, WaveletKind.modulated_gaussian(cfg.omega0))
    a = int(math.ceil(cfg.interior_fraction * cfg.steps))
    psi = evals.at_shift(a)
    scheme = calibrate_scheme(make_quadrature_scheme(grid, cfg.dt, cfg.omega0), psi,
                              ens.outputs[:, a])
    omegas = np.geomspace(cfg.sweep_omega_min, cfg.sweep_omega_max, cfg.sweep_points)
    mag = np.sqrt(np.mean(np.abs(resolvent_quadrature(psi, scheme, 1.0 + 1j * omegas)) ** 2, axis=0))
    peak = float(omegas[int(np.argmax(mag))])
    A = np.asarray(cfg.params["A"], dtype=float)
    natural = float(np.max(np.abs(np.linalg.eigvals(A).imag)))
    out.append(CheckResult("resolvent.frequency_selectivity", abs(peak - natural) <= 0.02 * natural,
                           f"peak at {peak:.2f} rad/s, natural frequency {natural:.2f}"))
    big = 1.0 + 1j * np.geomspace(1e6, 1e9, 7)
    prod = np.abs(resolvent_quadrature(psi[0], scheme, big)) * np.abs(big)
    decay = float(prod.max() / prod[-1])
    out.append(CheckResult("resolvent.large_s_decay", decay <= 1.05,
                           f"max |s R(s)| / tail value {decay:.4f}"))
    s_vals = np.concatenate([np.geomspace(0.1, 1e4, 13), 1.0 + 1j * np.geomspace(0.1, 1e4, 13)])
    change = kappa_relative_change(psi, scheme, s_vals)
    out.append(CheckResult("resolvent.kappa_negligible", float(change.max()) <= 1e-6,
                           f"max relative change {change.max():.2e} over |s| >= 0.1 (limit 1e-6)"))
    return out


def run_property_suite(cfg: ExperimentConfig | None = None,
                       cwt_normalization: float = CWT_FFT_NORMALIZATION) -> list:
    """Run every property check; ``cwt_normalization`` is the fault-injection hook."""
    cfg = cfg or default_config("lti")
    if cfg.system != "lti":
        cfg = default_config("lti").replace(seed=cfg.seed)
    lti_cfg = cfg.replace(horizon=2.0)
    ens = lti_ensemble(lti_cfg)
    results = []
    results += _checks_dynsys(lti_cfg, ens)
    results += _checks_wavelet(cwt_normalization)
    mats, edmd, spec = _small_pipeline(lti_cfg, ens)
    results += _checks_observables(lti_cfg, ens, mats)
    results += _checks_edmd(lti_cfg, ens, mats, edmd, spec)
    results += _checks_resolvent(lti_cfg, ens)
    return results
