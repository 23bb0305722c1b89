"""Command line interface.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 property-suite failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, io
from .checks import run_property_suite
from .config import ExperimentConfig, default_config, load_config
from .dynsys import integrate_ensemble, sample_initial_conditions
from .errors import ConfigInvalid, CwdmdError
from .experiments import (
    analytic_bode,
    quadrature_sweep,
    run_lorenz_experiment,
    run_lti_experiment,
)
from .observables import make_scale_grid
from .wavelet import CWT_FFT_NORMALIZATION, Signal, WaveletKind, cwt_fft

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_PROPERTY = 3


def _parse_targets(text: str | None):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"--target-hz expects comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise ConfigInvalid("--target-hz is empty")
    return vals


def _resolve_config(system: str | None, config_path, seed, out, target_hz, tol) -> ExperimentConfig:
    if config_path is not None:
        cfg = load_config(config_path)
        if system is not None and cfg.system != system:
            raise ConfigInvalid(f"config describes {cfg.system!r}, command expects {system!r}")
    else:
        cfg = default_config(system or "lti")
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if out is not None:
        changes["output_dir"] = str(out)
    targets = _parse_targets(target_hz)
    if targets is not None:
        changes["target_frequencies"] = targets
    if tol is not None:
        changes["truncation_tol"] = tol
    return cfg.replace(**changes) if changes else cfg


def _common(f):
    f = click.option("--tol", type=float, default=None, help="SVD truncation tolerance.")(f)
    f = click.option("--target-hz", "target_hz", default=None,
                     help="Comma-separated target frequencies in Hz.")(f)
    f = click.option("--out", type=click.Path(path_type=Path), default=None,
                     help="Output directory.")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for initial conditions.")(f)
    f = click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
                     help="JSON config file.")(f)
    return f


def _summary(report) -> None:
    click.echo(f"observables: {report.n_observables}, retained rank: {report.retained_rank}")
    for sel in report.selections:
        lam = sel["lambda"]
        line = (f"target {sel['target_hz']:.6g} Hz -> lambda = {lam[0]:.4f} "
                f"{'+' if lam[1] >= 0 else '-'} {abs(lam[1]):.4f}i (distance {sel['distance']:.4f})")
        if "interior_correlation" in sel:
            line += (f", correlation {sel['interior_correlation']:.4f}, "
                     f"relative L2 {sel['interior_relative_l2']:.4f}")
        click.echo(line)
    for k, v in report.timings.items():
        click.echo(f"time {k}: {v:.2f} s")


@click.group()
@click.version_option(__version__, prog_name="cwdmd")
def cli():
    """Wavelet-based dynamic mode decomposition experiments."""


@cli.command()
@click.option("--system", type=click.Choice(["lti", "lorenz"]), default=None,
              help="System when no config is given.")
@click.option("--export-cwt", is_flag=True,
              help="Also write the Morlet CWT of each output on the configured scale grid.")
@_common
def simulate(system, export_cwt, config_path, seed, out, target_hz, tol):
    """Simulate the ensemble and write one trajectory CSV per initial condition."""
    cfg = _resolve_config(None if config_path else system, config_path, seed, out, target_hz, tol)
    sys_ = cfg.build_system()
    x0 = sample_initial_conditions(cfg.region(), cfg.ic_count, cfg.seed, sys_.dimension)
    ens = integrate_ensemble(sys_, x0, cfg.dt, cfg.steps, cfg.substeps)
    out_dir = Path(cfg.output_dir)
    width = len(str(len(ens) - 1))
    files = [io.write_trajectory_csv(out_dir / f"trajectory_{k:0{width}d}.csv", tr)
             for k, tr in enumerate(ens.trajectories)]
    if export_cwt:
        scales = make_scale_grid(cfg.c_param, cfg.j_max).scales
        kind = WaveletKind.morlet(cfg.omega0)
        for k, tr in enumerate(ens.trajectories):
            grid = cwt_fft(Signal(cfg.dt, tr.outputs), scales, kind)
            files.append(io.write_cwt_csv(out_dir / f"cwt_{k:0{width}d}.csv", grid))
    io.write_manifest(out_dir, cfg, files, "simulate")
    click.echo(f"wrote {len(ens)} trajectories to {out_dir}")


@cli.command()
@_common
def lti(config_path, seed, out, target_hz, tol):
    """Run the linear system experiment."""
    cfg = _resolve_config("lti", config_path, seed, out, target_hz, tol)
    report, _ = run_lti_experiment(cfg)
    _summary(report)
    click.echo(f"analytic Bode peak: {report.metrics['analytic_bode_peak_rad']:.3f} rad/s")


@cli.command()
@_common
def lorenz(config_path, seed, out, target_hz, tol):
    """Run the Lorenz experiment."""
    cfg = _resolve_config("lorenz", config_path, seed, out, target_hz, tol)
    report, _ = run_lorenz_experiment(cfg)
    _summary(report)


@cli.command()
@_common
@click.option("--cwt-normalization-scale", type=float, default=1.0, hidden=True,
              help="Fault injection: multiply the FFT normalization constant.")
def check(config_path, seed, out, target_hz, tol, cwt_normalization_scale):
    """Run the property suite; exit code 3 when any property fails."""
    cfg = _resolve_config("lti", config_path, seed, out, target_hz, tol)
    results = run_property_suite(cfg, CWT_FFT_NORMALIZATION * cwt_normalization_scale)
    for r in results:
        click.echo(r.line())
    failed = [r for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} properties hold")
    if out is not None:
        io.write_json(Path(out) / "check.json",
                      [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results])
    if failed:
        sys.exit(EXIT_PROPERTY)


@cli.command("resolvent-sweep")
@click.option("--system", type=click.Choice(["lti", "lorenz"]), default=None,
              help="System when no config is given.")
@_common
def resolvent_sweep(system, config_path, seed, out, target_hz, tol):
    """Write the data-driven resolvent magnitude sweep (and the analytic one for LTI)."""
    cfg = _resolve_config(None if config_path else system, config_path, seed, out, target_hz, tol)
    sys_ = cfg.build_system()
    x0 = sample_initial_conditions(cfg.region(), cfg.ic_count, cfg.seed, sys_.dimension)
    ens = integrate_ensemble(sys_, x0, cfg.dt, cfg.steps, cfg.substeps)
    out_dir = Path(cfg.output_dir)
    anchor = int(np.ceil(cfg.interior_fraction * cfg.steps))
    s, mag = quadrature_sweep(cfg, ens, anchor)
    files = [io.write_sweep_csv(out_dir / "sweep_quadrature.csv", s, mag)]
    click.echo(f"quadrature sweep peak: {s[int(np.argmax(mag))].imag:.4f} rad/s")
    if cfg.system == "lti":
        sa, ma = analytic_bode(cfg, x0)
        files.append(io.write_sweep_csv(out_dir / "sweep_analytic.csv", sa, ma))
        click.echo(f"analytic sweep peak: {sa[int(np.argmax(ma))].imag:.4f} rad/s")
    io.write_manifest(out_dir, cfg, files, "resolvent-sweep")


def main(argv=None) -> int:
    """Entry point that maps errors to the documented exit codes."""
    try:
        cli.main(args=argv, prog_name="cwdmd", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return EXIT_CONFIG
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except CwdmdError as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        return exc.exit_code
    except json.JSONDecodeError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
