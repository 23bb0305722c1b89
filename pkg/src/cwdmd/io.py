"""CSV and manifest writers.

Every float is written with 17 significant digits so values survive a round
trip through text exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FORMAT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return FLOAT_FORMAT % float(v)


def write_csv(path, header, rows) -> Path:
    """Write ``rows`` (iterable of sequences or a 2-D array) under ``header``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return ``(header, array)`` for a file written by :func:`write_csv`."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r]
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    return header, arr


def write_trajectory_csv(path, traj) -> Path:
    n = traj.states.shape[1]
    header = ["t"] + [f"x{i}" for i in range(1, n + 1)] + ["y"]
    return write_csv(path, header, np.column_stack([traj.times, traj.states, traj.outputs]))


def write_cwt_csv(path, grid) -> Path:
    j, n = grid.coefficients.shape
    sig = np.repeat(grid.scales, n)
    tau = np.tile(grid.dt * np.arange(n), j)
    c = grid.coefficients.ravel()
    return write_csv(path, ["sigma", "tau", "re", "im"], np.column_stack([sig, tau, c.real, c.imag]))


def write_observables_csv(path, matrix: np.ndarray, names) -> Path:
    """One snapshot per row, one observable per column."""
    return write_csv(path, list(names), np.asarray(matrix).T)


def write_spectrum_csv(path, spec) -> Path:
    mu = spec.discrete_eigenvalues
    lam = spec.continuous_eigenvalues
    rows = ([m.real, m.imag, l.real, l.imag, int(f)] for m, l, f in zip(mu, lam, spec.flags))
    return write_csv(path, ["re_mu", "im_mu", "re_lambda", "im_lambda", "flag"], rows)


def write_field_csv(path, field) -> Path:
    n = field.points.shape[1]
    v = field.values
    header = [f"x{i}" for i in range(1, n + 1)] + ["magnitude", "argument", "re", "im"]
    return write_csv(path, header,
                     np.column_stack([field.points, np.abs(v), np.angle(v), v.real, v.imag]))


def write_sweep_csv(path, s_values, magnitude) -> Path:
    s_values = np.asarray(s_values, dtype=complex)
    return write_csv(path, ["re_s", "im_s", "magnitude"],
                     np.column_stack([s_values.real, s_values.imag, magnitude]))


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_manifest(out_dir, config, files, command: str) -> Path:
    """Index ``files`` (paths inside ``out_dir``) with their hashes."""
    out_dir = Path(out_dir)
    entries = [{"path": os.path.relpath(f, out_dir), "sha256": file_sha256(f)} for f in files]
    manifest = {
        "command": command,
        "library": "cwdmd",
        "version": __version__,
        "config_hash": config.config_hash(),
        "config": config.to_dict(),
        "files": entries,
    }
    return write_json(out_dir / "manifest.json", manifest)
