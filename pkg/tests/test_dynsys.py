import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwdmd.dynsys import (
    Box,
    Circle,
    SystemSpec,
    analytic_lti_resolvent,
    builtin_systems,
    integrate_ensemble,
    integrate_rk4,
    lorenz,
    lti,
    sample_initial_conditions,
)
from cwdmd.errors import (
    DimensionMismatch,
    NonFiniteState,
    SingularResolvent,
    UnsupportedDimension,
)
from oracles import expm_taylor, lti_resolvent_closed_form

A_LTI = [[-1.0, 500.0], [-500.0, -1.0]]
ROT = [[0.0, 1.0], [-1.0, 0.0]]


def zero_system(n=2):
    return SystemSpec(n, lambda x: np.zeros_like(x), lambda x: np.sum(x, axis=-1))


def test_zero_field_keeps_state():
    tr = integrate_rk4(zero_system(), [3.0, -1.0], 0.1, 10)
    assert tr.states.shape == (11, 2)
    assert np.all(tr.states == np.array([3.0, -1.0]))


def test_rotation_one_period_matches_expm():
    # 6284 steps of 0.001 end at t = 6.284, slightly past 2*pi, so the
    # oracle is the exponential at that time rather than the point (1, 0).
    tr = integrate_rk4(lti(ROT, [1.0, 0.0]), [1.0, 0.0], 0.001, 6284)
    ref = expm_taylor(np.array(ROT) * 6.284) @ np.array([1.0, 0.0])
    assert np.linalg.norm(tr.states[-1] - ref) <= 1e-9
    assert np.linalg.norm(tr.states[-1] - [1.0, 0.0]) < 1e-3


def test_lorenz_equilibrium():
    tr = integrate_rk4(lorenz(), [0.0, 0.0, 0.0], 0.02, 50)
    assert np.all(tr.states == 0.0)
    assert np.all(tr.outputs == 0.0)


def test_lti_vector_field():
    sys_ = lti(A_LTI, [1.0, 0.0])
    assert np.allclose(sys_.vector_field(np.array([1.0, 0.0])), [-1.0, -500.0], rtol=0, atol=0)


def test_lorenz_vector_field_and_output():
    sys_ = lorenz(10.0, 28.0, 8.0 / 3.0)
    f = sys_.vector_field(np.array([1.0, 1.0, 1.0]))
    assert f[0] == 0.0 and f[1] == 26.0
    assert f[2] == pytest.approx(1.0 - 8.0 / 3.0, abs=1e-15)
    assert sys_.output_map(np.zeros(3)) == 0.0
    x = np.array([2.0, 3.0, 0.5])
    assert sys_.output_map(x) == math.tanh((6.0 - 2.5) / 10.0)


def test_builtin_catalog():
    cat = builtin_systems()
    assert set(cat) == {"lti", "lorenz"}
    assert cat["lorenz"]().dimension == 3


@pytest.mark.parametrize("A, c", [([[1.0, 2.0, 3.0]], [1.0]), (A_LTI, [1.0, 0.0, 0.0])])
def test_lti_dimension_mismatch(A, c):
    with pytest.raises(DimensionMismatch):
        lti(A, c)


def test_non_finite_state_aborts():
    blow = SystemSpec(1, lambda x: x * x, lambda x: x[..., 0])
    with pytest.raises(NonFiniteState):
        integrate_rk4(blow, [1.0], 0.5, 100)


def test_circle_samples_on_circle():
    x = sample_initial_conditions(Circle(20.0), 100, 0)
    assert x.shape == (100, 2)
    assert np.all(np.abs(np.linalg.norm(x, axis=1) - 20.0) <= 1e-12)


def test_box_samples_inside():
    bounds = ((-20.0, 20.0), (-30.0, 30.0), (0.0, 50.0))
    x = sample_initial_conditions(Box(bounds), 40, 3)
    assert x.shape == (40, 3)
    for d, (lo, hi) in enumerate(bounds):
        assert np.all((x[:, d] >= lo) & (x[:, d] <= hi))


def test_circle_needs_two_dimensions():
    with pytest.raises(UnsupportedDimension):
        sample_initial_conditions(Circle(1.0), 3, 0, dimension=3)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), count=st.integers(1, 50),
       radius=st.floats(0.1, 100.0))
def test_sampling_is_pure(seed, count, radius):
    a = sample_initial_conditions(Circle(radius), count, seed)
    b = sample_initial_conditions(Circle(radius), count, seed)
    assert np.array_equal(a, b)


def test_rk4_order():
    sys_ = lti(ROT, [1.0, 0.0])
    errs = []
    for dt in (0.1, 0.05):
        end = integrate_rk4(sys_, [1.0, 0.0], dt, int(round(2.0 / dt))).states[-1]
        errs.append(np.linalg.norm(end - expm_taylor(np.array(ROT) * 2.0) @ [1.0, 0.0]))
    assert 14.0 <= errs[0] / errs[1] <= 18.0


def test_lti_trajectory_matches_expm(lti_cfg):
    x0 = np.array([20.0, 0.0])
    tr = integrate_rk4(lti(A_LTI, [1.0, 0.0]), x0, 0.001, 2000, substeps=lti_cfg.substeps)
    A = np.array(A_LTI)
    idx = np.arange(0, 2001, 100)
    ref = np.array([expm_taylor(A * tr.times[i]) @ x0 for i in idx])
    rel = np.linalg.norm(tr.states[idx] - ref, axis=1) / np.linalg.norm(ref, axis=1)
    assert rel.max() <= 1e-6


def test_outputs_equal_output_map(lti_small_ensemble):
    sys_ = lti(A_LTI, [1.0, 0.0])
    for tr in lti_small_ensemble.trajectories[:2]:
        assert np.array_equal(tr.outputs, sys_.output_map(tr.states))


def test_ensemble_structure(lti_small_ensemble):
    ens = lti_small_ensemble
    for k, tr in enumerate(ens.trajectories):
        assert np.array_equal(tr.states[0], ens.initial_conditions[k])
        assert tr.dt == ens.dt and tr.n_samples == ens.n_samples
    assert ens.outputs.shape == (8, 2001)


def test_integrate_ensemble_matches_single_runs():
    sys_ = lorenz()
    x0 = sample_initial_conditions(Box(((-1.0, 1.0),) * 3), 3, 5)
    ens = integrate_ensemble(sys_, x0, 0.02, 20, substeps=2)
    for k in range(3):
        one = integrate_rk4(sys_, x0[k], 0.02, 20, substeps=2)
        assert np.allclose(ens.trajectories[k].states, one.states, rtol=0, atol=1e-12)


def test_resolvent_identity_case():
    assert analytic_lti_resolvent(-np.eye(2), [1.0, 0.0], 0.0, [1.0, 0.0]) == pytest.approx(1.0)


def test_resolvent_against_closed_form():
    val = analytic_lti_resolvent(A_LTI, [1.0, 0.0], 500j, [20.0, 0.0])
    ref = lti_resolvent_closed_form(A_LTI, [1.0, 0.0], 500j, [20.0, 0.0])
    assert abs(val - ref) <= 1e-12 * abs(ref)


def test_resolvent_large_s():
    x = np.array([3.0, -4.0])
    val = analytic_lti_resolvent(A_LTI, [1.0, 0.0], 1e6j, x)
    assert abs(val) == pytest.approx(3.0 / 1e6, rel=0.01)


def test_resolvent_singular():
    with pytest.raises(SingularResolvent):
        analytic_lti_resolvent(-np.eye(2), [1.0, 0.0], -1.0, [1.0, 0.0])


def test_resolvent_vectorized_over_states():
    X = np.array([[1.0, 2.0], [3.0, -1.0]])
    both = analytic_lti_resolvent(A_LTI, [1.0, 0.0], 2 + 400j, X)
    for q in range(2):
        assert both[q] == analytic_lti_resolvent(A_LTI, [1.0, 0.0], 2 + 400j, X[q])
