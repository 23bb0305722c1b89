"""End-to-end runners for the LTI and Lorenz experiments."""

from __future__ import annotations

import time
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, rad_to_hz
from .dynsys import analytic_lti_resolvent, integrate_ensemble, sample_initial_conditions
from .edmd import (
    complex_correlation,
    eigenfunction_field,
    normalize_field,
    scaled_relative_l2,
    select_eigenpair,
    solve_edmd,
    spectral_decomposition,
)
from .observables import evaluate_observables, make_scale_grid, realify_and_assemble
from .resolvent import make_quadrature_scheme, resolvent_quadrature
from .wavelet import WaveletKind


@dataclass
class ExperimentReport:
    system: str
    config_hash: str
    n_observables: int
    retained_rank: int
    top_modes: list = field(default_factory=list)
    selections: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "config_hash": self.config_hash,
            "n_observables": self.n_observables,
            "retained_rank": self.retained_rank,
            "top_modes": self.top_modes,
            "selections": self.selections,
            "metrics": self.metrics,
            "files": [str(f) for f in self.files],
            "timings": self.timings,
            "warnings": self.warnings,
        }


@dataclass
class PipelineResult:
    """Intermediate objects of one run, kept for tests and diagnostics."""

    config: ExperimentConfig
    system: object
    ensemble: object
    evaluations: object
    matrices: object
    edmd: object
    spectrum: object


class _Timer:
    def __init__(self):
        self.timings = {}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        yield
        self.timings[name] = time.perf_counter() - t0


def run_pipeline(cfg: ExperimentConfig, timer: _Timer | None = None,
                 caught: list | None = None) -> PipelineResult:
    """Simulate, build observables, solve EDMD and decompose."""
    timer = timer or _Timer()
    system = cfg.build_system()
    with timer.stage("simulate"):
        x0 = sample_initial_conditions(cfg.region(), cfg.ic_count, cfg.seed, system.dimension)
        ensemble = integrate_ensemble(system, x0, cfg.dt, cfg.steps, cfg.substeps)
    with timer.stage("observables"):
        grid = make_scale_grid(cfg.c_param, cfg.j_max)
        evals = evaluate_observables(ensemble, grid, WaveletKind.morlet(cfg.omega0))
        matrices = realify_and_assemble(evals, ensemble)
    with timer.stage("solve"):
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            edmd = solve_edmd(matrices, cfg.truncation_tol)
        for w in rec:
            if caught is not None:
                caught.append(str(w.message))
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    with timer.stage("spectrum"):
        spectrum = spectral_decomposition(edmd, cfg.dt)
    return PipelineResult(cfg, system, ensemble, evals, matrices, edmd, spectrum)


def _top_modes(spec, count=10) -> list:
    order = np.argsort(-np.abs(spec.discrete_eigenvalues), kind="stable")
    out = []
    for m in order:
        if spec.spurious[m]:
            continue
        mu, lam = spec.discrete_eigenvalues[m], spec.continuous_eigenvalues[m]
        out.append({"index": int(m), "mu": [mu.real, mu.imag], "lambda": [lam.real, lam.imag]})
        if len(out) == count:
            break
    return out


def _tag(freq_hz: float) -> str:
    return f"{freq_hz:.6g}hz".replace(".", "p")


def interior_columns(cfg: ExperimentConfig, n_trajectories: int) -> list:
    """``(k, i)`` pairs that skip the first and last ``interior_fraction`` of shifts."""
    n = cfg.steps
    lo = int(np.ceil(cfg.interior_fraction * n))
    hi = int(np.floor((1.0 - cfg.interior_fraction) * n))
    shifts = np.arange(lo, min(hi, n - 1) + 1, cfg.interior_stride)
    return [(k, int(i)) for k in range(n_trajectories) for i in shifts]


def analytic_bode(cfg: ExperimentConfig, x0: np.ndarray):
    """RMS over initial conditions of ``|c^T (i w I - A)^{-1} x|`` on a log grid."""
    A = np.asarray(cfg.params["A"], dtype=float)
    c = np.asarray(cfg.params["c"], dtype=float)
    omegas = np.geomspace(cfg.sweep_omega_min, cfg.sweep_omega_max, cfg.sweep_points)
    mags = np.array([np.sqrt(np.mean(np.abs(analytic_lti_resolvent(A, c, 1j * w, x0)) ** 2))
                     for w in omegas])
    return 1j * omegas, mags


def quadrature_sweep(cfg: ExperimentConfig, ensemble, anchor_index: int = 0):
    """RMS over trajectories of ``|resolvent_quadrature|`` along ``Re s = sweep_real_part``."""
    grid = make_scale_grid(cfg.c_param, cfg.j_max)
    evals = evaluate_observables(ensemble, grid, WaveletKind.modulated_gaussian(cfg.omega0))
    scheme = make_quadrature_scheme(grid, cfg.dt, cfg.omega0)
    psi = evals.at_shift(anchor_index)
    omegas = np.geomspace(cfg.sweep_omega_min, cfg.sweep_omega_max, cfg.sweep_points)
    s = cfg.sweep_real_part + 1j * omegas
    vals = resolvent_quadrature(psi, scheme, s)
    return s, np.sqrt(np.mean(np.abs(vals) ** 2, axis=0))


def _normalized_pair(approx, reference, anchor):
    ref_n = normalize_field(reference, anchor, float(np.angle(reference.values[anchor])))
    app_n = normalize_field(approx, anchor, float(np.angle(reference.values[anchor])))
    return app_n, ref_n


def run_lti_experiment(cfg: ExperimentConfig, out_dir=None, write: bool = True):
    """Reference LTI run. Returns ``(report, pipeline_result)``."""
    timer = _Timer()
    caught: list = []
    res = run_pipeline(cfg, timer, caught)
    A = np.asarray(cfg.params["A"], dtype=float)
    c = np.asarray(cfg.params["c"], dtype=float)
    ens, spec, mats = res.ensemble, res.spectrum, res.matrices
    x0 = ens.initial_conditions
    report = ExperimentReport(cfg.system, cfg.config_hash(), mats.n_observables,
                              res.edmd.svd_rank, _top_modes(spec), warnings=caught)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    files = []
    with timer.stage("fields"):
        field_outputs = []
        for f_hz, omega in zip(cfg.target_frequencies, cfg.target_omegas):
            target = 1j * omega
            idx, dist = select_eigenpair(spec, target)
            lam = spec.continuous_eigenvalues[idx]
            approx = eigenfunction_field(spec, idx, mats, x0, [(k, 0) for k in range(len(ens))])
            reference = type(approx)(x0, analytic_lti_resolvent(A, c, target, x0))
            anchor = int(np.argmax(np.abs(reference.values)))
            app_n, ref_n = _normalized_pair(approx, reference, anchor)
            cols = interior_columns(cfg, len(ens))
            pts = np.array([ens.trajectories[k].states[i] for k, i in cols])
            inner = eigenfunction_field(spec, idx, mats, pts, cols)
            inner_ref = analytic_lti_resolvent(A, c, target, pts)
            sel = {
                "target_hz": f_hz,
                "target": [0.0, float(omega)],
                "index": idx,
                "lambda": [lam.real, lam.imag],
                "distance": dist,
                "anchor": anchor,
                "ic_correlation": complex_correlation(approx.values, reference.values),
                "ic_relative_l2": scaled_relative_l2(approx.values, reference.values),
                "interior_correlation": complex_correlation(inner.values, inner_ref),
                "interior_relative_l2": scaled_relative_l2(inner.values, inner_ref),
                "interior_points": len(cols),
            }
            report.selections.append(sel)
            field_outputs.append((f_hz, app_n, ref_n))
    with timer.stage("bode"):
        s_vals, mags = analytic_bode(cfg, x0)
        peak = float(s_vals[int(np.argmax(mags))].imag)
        report.metrics["analytic_bode_peak_rad"] = peak
        report.metrics["analytic_bode_peak_hz"] = float(rad_to_hz(peak))
    lam_all = spec.continuous_eigenvalues[~spec.spurious]
    report.metrics["n_nonspurious"] = int(lam_all.size)
    if write:
        with timer.stage("write"):
            files.append(io.write_spectrum_csv(out / "spectrum.csv", spec))
            files.append(io.write_sweep_csv(out / "bode_analytic.csv", s_vals, mags))
            for f_hz, app_n, ref_n in field_outputs:
                tag = _tag(f_hz)
                files.append(io.write_field_csv(out / f"field_analytic_{tag}.csv", ref_n))
                files.append(io.write_field_csv(out / f"field_approx_{tag}.csv", app_n))
    report.timings = dict(timer.timings)
    if write:
        report.files = [str(f) for f in files]
        rp = io.write_json(out / "report.json", report.to_dict())
        io.write_manifest(out, cfg, files + [rp], "lti")
    return report, res


def run_lorenz_experiment(cfg: ExperimentConfig, out_dir=None, write: bool = True):
    """Reference Lorenz run. Returns ``(report, pipeline_result)``."""
    timer = _Timer()
    caught: list = []
    res = run_pipeline(cfg, timer, caught)
    ens, spec, mats = res.ensemble, res.spectrum, res.matrices
    x0 = ens.initial_conditions
    report = ExperimentReport(cfg.system, cfg.config_hash(), mats.n_observables,
                              res.edmd.svd_rank, _top_modes(spec), warnings=caught)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    fields_out = []
    with timer.stage("fields"):
        for f_hz, omega in zip(cfg.target_frequencies, cfg.target_omegas):
            idx, dist = select_eigenpair(spec, 1j * omega)
            lam = spec.continuous_eigenvalues[idx]
            fld = eigenfunction_field(spec, idx, mats, x0, [(k, 0) for k in range(len(ens))])
            fld = normalize_field(fld, 0, 0.0)
            report.selections.append({
                "target_hz": f_hz,
                "target": [0.0, float(omega)],
                "index": idx,
                "lambda": [lam.real, lam.imag],
                "distance": dist,
                "anchor": 0,
            })
            fields_out.append((f_hz, fld))
    lam_all = spec.continuous_eigenvalues[~spec.spurious]
    report.metrics["n_nonspurious"] = int(lam_all.size)
    files = []
    if write:
        with timer.stage("write"):
            files.append(io.write_spectrum_csv(out / "spectrum.csv", spec))
            for f_hz, fld in fields_out:
                files.append(io.write_field_csv(out / f"field_{_tag(f_hz)}.csv", fld))
    report.timings = dict(timer.timings)
    if write:
        report.files = [str(f) for f in files]
        rp = io.write_json(out / "report.json", report.to_dict())
        io.write_manifest(out, cfg, files + [rp], "lorenz")
    return report, res
