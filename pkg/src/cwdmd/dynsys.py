"""Dynamical systems with scalar outputs, fixed-step integration and sampling.

Vector fields and output maps are written to act on the last axis of an
array, so a whole ensemble of initial conditions is integrated in one pass.
Random initial conditions come from numpy's PCG64 generator seeded with the
user supplied integer, which is reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteState,
    SingularResolvent,
    UnsupportedDimension,
)

ArrayMap = Callable[[np.ndarray], np.ndarray]

# Condition number above which sI - A is treated as singular.
RESOLVENT_COND_LIMIT = 1e12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SystemSpec:
    """A vector field ``x' = T(x)`` observed through ``y = g(x)``.

    ``vector_field`` maps an array of shape ``(..., n)`` to the same shape and
    ``output_map`` maps ``(..., n)`` to ``(...)``.
    """

    dimension: int
    vector_field: ArrayMap
    output_map: ArrayMap
    name: str = "custom"

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise DimensionMismatch("dimension must be a positive integer")


@dataclass(frozen=True)
class TrajectoryGrid:
    dt: float
    states: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        if self.states.shape[0] != self.outputs.shape[0]:
            raise DimensionMismatch("states and outputs differ in length")

    @property
    def n_samples(self) -> int:
        return self.outputs.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_samples)


@dataclass(frozen=True)
class OutputEnsemble:
    dt: float
    initial_conditions: np.ndarray
    trajectories: tuple

    def __post_init__(self):
        if len(self.trajectories) != self.initial_conditions.shape[0]:
            raise DimensionMismatch("one trajectory per initial condition is required")
        lengths = {tr.n_samples for tr in self.trajectories}
        if len(lengths) > 1:
            raise DimensionMismatch("trajectories differ in length")
        if any(tr.dt != self.dt for tr in self.trajectories):
            raise DimensionMismatch("trajectories differ in dt")

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def n_samples(self) -> int:
        return self.trajectories[0].n_samples

    @property
    def outputs(self) -> np.ndarray:
        """All outputs stacked as a ``(K, N+1)`` array."""
        return np.stack([tr.outputs for tr in self.trajectories])


# ---------------------------------------------------------------------------
# systems


def lti(A, c) -> SystemSpec:
    """Linear system ``x' = Ax`` with output ``y = c^T x``."""
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    if c.ndim != 1 or c.shape[0] != A.shape[0]:
        raise DimensionMismatch(
            f"c has length {c.shape[0] if c.ndim == 1 else c.shape}, expected {A.shape[0]}"
        )
    A = _frozen(A.copy())
    c = _frozen(c.copy())

    def vector_field(x):
        return x @ A.T

    def output_map(x):
        return np.sum(x * c, axis=-1)

    return SystemSpec(A.shape[0], vector_field, output_map, name="lti")


def lorenz(alpha: float = 10.0, rho: float = 28.0, beta: float = 8.0 / 3.0) -> SystemSpec:
    """Lorenz system observed through ``tanh((x1*x2 - 5*x3)/10)``."""
    alpha, rho, beta = float(alpha), float(rho), float(beta)

    def vector_field(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        return np.stack(
            [alpha * (x2 - x1), x1 * (rho - x3) - x2, x1 * x2 - beta * x3], axis=-1
        )

    def output_map(x):
        return np.tanh((x[..., 0] * x[..., 1] - 5.0 * x[..., 2]) / 10.0)

    return SystemSpec(3, vector_field, output_map, name="lorenz")


def builtin_systems() -> dict:
    """Catalog of system factories keyed by name."""
    return {"lti": lti, "lorenz": lorenz}


# ---------------------------------------------------------------------------
# integration


def _rk4_batch(system: SystemSpec, x0: np.ndarray, dt: float, steps: int,
               substeps: int) -> np.ndarray:
    """Classical RK4 on a batch ``(K, n)``; returns states ``(K, steps+1, n)``.

    Each sampling interval ``dt`` is covered by ``substeps`` equal RK4 steps,
    so the output grid is always ``t_i = i*dt``.
    """
    f = system.vector_field
    h = dt / substeps
    out = np.empty((x0.shape[0], steps + 1, x0.shape[1]))
    out[:, 0] = x0
    x = x0.copy()
    # Overflow is reported through NonFiniteState, not floating-point warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            for _ in range(substeps):
                k1 = f(x)
                k2 = f(x + 0.5 * h * k1)
                k3 = f(x + 0.5 * h * k2)
                k4 = f(x + h * k3)
                x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if not (np.isfinite(k1).all() and np.isfinite(k2).all()
                        and np.isfinite(k3).all() and np.isfinite(k4).all()
                        and np.isfinite(x).all()):
                    raise NonFiniteState(
                        f"non-finite state during RK4 at sample {i} (t = {i * dt:g})"
                    )
            out[:, i + 1] = x
    return out


def _check_args(system: SystemSpec, x0: np.ndarray, dt: float, steps: int, substeps: int):
    if not (dt > 0 and np.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt}")
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps}")
    if int(substeps) != substeps or substeps < 1:
        raise ValueError(f"substeps must be a positive integer, got {substeps}")
    if x0.shape[-1] != system.dimension:
        raise DimensionMismatch(
            f"initial state has length {x0.shape[-1]}, system dimension is {system.dimension}"
        )
    if not np.isfinite(x0).all():
        raise NonFiniteState("initial state is not finite")


def _make_grid(system: SystemSpec, states: np.ndarray, dt: float) -> TrajectoryGrid:
    outputs = np.asarray(system.output_map(states), dtype=float)
    if not np.isfinite(outputs).all():
        raise NonFiniteState("output map produced a non-finite value")
    return TrajectoryGrid(float(dt), _frozen(states), _frozen(outputs))


def integrate_rk4(system: SystemSpec, x0, dt: float, steps: int,
                  substeps: int = 1) -> TrajectoryGrid:
    """Integrate one initial condition with fixed-step RK4.

    ``substeps`` refines the integration step to ``dt/substeps`` while still
    recording samples every ``dt``.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    _check_args(system, x0, dt, steps, substeps)
    states = _rk4_batch(system, x0[None, :], dt, int(steps), int(substeps))[0]
    return _make_grid(system, states, dt)


def integrate_ensemble(system: SystemSpec, initial_conditions, dt: float, steps: int,
                       substeps: int = 1) -> OutputEnsemble:
    """Integrate every row of ``initial_conditions`` on a shared time grid."""
    x0 = np.atleast_2d(np.asarray(initial_conditions, dtype=float))
    _check_args(system, x0, dt, steps, substeps)
    states = _rk4_batch(system, x0, dt, int(steps), int(substeps))
    trajectories = tuple(_make_grid(system, states[k], dt) for k in range(x0.shape[0]))
    return OutputEnsemble(float(dt), _frozen(x0.copy()), trajectories)


# ---------------------------------------------------------------------------
# initial conditions


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Box:
    bounds: tuple = field()

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not b:
            raise ValueError("box needs at least one axis")
        for lo, hi in b:
            if not lo <= hi:
                raise ValueError(f"box bounds must be ordered, got ({lo}, {hi})")
        object.__setattr__(self, "bounds", b)


Region = Union[Circle, Box]


def sample_initial_conditions(region: Region, count: int, seed: int,
                              dimension: int | None = None) -> np.ndarray:
    """Draw ``count`` initial conditions from ``region`` with PCG64(seed).

    Circle samples are uniform in angle on the circle itself. Box samples are
    independently uniform per axis. ``dimension`` (the system order) is
    checked against the region when given.
    """
    if int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    if isinstance(region, Circle):
        if dimension is not None and dimension != 2:
            raise UnsupportedDimension(f"circle sampling needs n = 2, got n = {dimension}")
        theta = rng.uniform(0.0, 2.0 * np.pi, size=int(count))
        return region.radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if isinstance(region, Box):
        if dimension is not None and dimension != len(region.bounds):
            raise DimensionMismatch(
                f"box has {len(region.bounds)} axes, system dimension is {dimension}"
            )
        lo = np.array([b[0] for b in region.bounds])
        hi = np.array([b[1] for b in region.bounds])
        return lo + (hi - lo) * rng.random((int(count), lo.size))
    raise TypeError(f"unknown region type {type(region).__name__}")


# ---------------------------------------------------------------------------
# analytic reference


def analytic_lti_resolvent(A, c, s: complex, x):
    """Evaluate ``c^T (sI - A)^{-1} x`` for one state or a stack of states."""
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or c.shape != (A.shape[0],):
        raise DimensionMismatch("A must be square and c must match its order")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != A.shape[0]:
        raise DimensionMismatch(f"state length {X.shape[1]} does not match order {A.shape[0]}")
    M = complex(s) * np.eye(A.shape[0]) - A
    if not np.isfinite(M).all() or np.linalg.cond(M) > RESOLVENT_COND_LIMIT:
        raise SingularResolvent(f"sI - A is numerically singular at s = {s}")
    Z = np.linalg.solve(M, X.T.astype(complex))
    vals = c @ Z
    return complex(vals[0]) if single else vals


def trajectory_rows(traj: TrajectoryGrid) -> Sequence:
    """Rows ``t, x1..xn, y`` for CSV export."""
    return np.column_stack([traj.times, traj.states, traj.outputs])
