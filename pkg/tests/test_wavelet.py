import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwdmd.checks import cwt_oracle_error, pulse_reconstruction_error
from cwdmd.errors import (
    EmptyScales,
    NonFiniteState,
    NotAdmissible,
    OutOfWindow,
    SignalTooShort,
    ZeroScale,
)
from cwdmd.wavelet import (
    CWT_FFT_NORMALIZATION,
    CwtGrid,
    Signal,
    WaveletKind,
    admissibility_constant,
    cwt_direct,
    cwt_fft,
    inverse_cwt_pointwise,
    log_scale_weights,
    min_resolved_scale,
    wavelet_fourier,
    wavelet_time,
)
from oracles import (
    admissibility_by_quad,
    fourier_by_quad,
    gaussian_time,
    morlet_time,
)

MORLET = WaveletKind.morlet(6.0)
GAUSS = WaveletKind.modulated_gaussian(6.0)


def smooth_noise(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.convolve(rng.standard_normal(n + 64), np.hanning(33), mode="same")[:n]


def test_kappa_stored():
    for w0 in (0.0, 1.5, 6.0, 8.0):
        assert WaveletKind.morlet(w0).kappa == math.exp(-w0 * w0 / 2)


def test_wavelet_time_values():
    assert wavelet_time(GAUSS, 0.0) == 1.0
    assert wavelet_time(MORLET, 0.0) == 1.0 - math.exp(-18.0)
    v = wavelet_time(WaveletKind.modulated_gaussian(0.0), 1.0)
    assert v.imag == 0.0 and v.real == pytest.approx(math.exp(-0.5), abs=1e-16)


def test_wavelet_fourier_values():
    assert wavelet_fourier(GAUSS, 6.0) == 1.0
    assert abs(wavelet_fourier(MORLET, 0.0)) <= 1e-300
    assert wavelet_fourier(GAUSS, 0.0).real == pytest.approx(1.523e-8, rel=1e-3)
    assert wavelet_fourier(GAUSS, 0.0).real == pytest.approx(
        fourier_by_quad(lambda t: gaussian_time(6.0, t), 0.0).real, abs=1e-12)


@pytest.mark.parametrize("omega0", [6.0, 3.0])
def test_fourier_matches_adaptive_quadrature(omega0):
    kind = WaveletKind.morlet(omega0)
    om = np.random.default_rng(4).uniform(-8.0, 16.0, 20)
    ref = np.array([fourier_by_quad(lambda t: morlet_time(omega0, t), w) for w in om])
    assert np.max(np.abs(wavelet_fourier(kind, om) - ref)) <= 1e-8


def test_direct_kills_constants():
    sig = Signal(0.01, np.full(2001, 5.0))
    vals = cwt_direct(sig, MORLET, 10.0, 0.01 * np.arange(500, 1501, 100))
    assert np.max(np.abs(vals)) <= 1e-8


def test_direct_and_fft_of_zero_signal_are_zero():
    sig = Signal(1.0, np.zeros(64))
    assert cwt_direct(sig, MORLET, 3.0, 20.0) == 0.0
    assert np.all(cwt_fft(sig, [2.0, 5.0], MORLET).coefficients == 0.0)


def test_direct_on_cosine_matches_gaussian_integral():
    # cos = (e^{iwt} + e^{-iwt})/2 and each exponential transforms to
    # e^{+-iw tau} sqrt(2 pi) conj(G^(+-s w)), with s the scale in time units.
    dt, w = 1e-3, 50.0
    h = np.cos(w * dt * np.arange(20001))
    sig = Signal(dt, h)
    s_samples = 60.0
    s_time = s_samples * dt
    root = math.sqrt(2.0 * math.pi)
    for kind in (MORLET, GAUSS):
        for tau in (8.0, 10.0, 12.3):
            got = cwt_direct(sig, kind, s_samples, tau)
            ref = 0.5 * root * (np.exp(1j * w * tau) * np.conj(wavelet_fourier(kind, s_time * w))
                                + np.exp(-1j * w * tau) * np.conj(wavelet_fourier(kind, -s_time * w)))
            assert abs(got - ref) <= 1e-6 * abs(ref)


def test_zero_scale_rejected():
    sig = Signal(1.0, np.ones(8))
    with pytest.raises(ZeroScale):
        cwt_direct(sig, MORLET, 0.0, 1.0)
    with pytest.raises(ZeroScale):
        cwt_fft(sig, [1.0, 0.0], MORLET)
    with pytest.raises(EmptyScales):
        cwt_fft(sig, [], MORLET)


def test_signal_validation():
    with pytest.raises(SignalTooShort):
        Signal(1.0, [1.0])
    with pytest.raises(NonFiniteState):
        Signal(1.0, [1.0, np.nan])


def test_fft_matches_direct_unit_scale():
    err = cwt_oracle_error(MORLET, n_samples=2 ** 12 + 1, max_scale=64.0, n_shifts=15)
    assert err <= 1e-6


def test_fft_normalization_constant():
    assert CWT_FFT_NORMALIZATION == math.sqrt(2.0 * math.pi)


def test_oracle_detects_one_percent_fault():
    err = cwt_oracle_error(MORLET, 1.01 * CWT_FFT_NORMALIZATION, n_samples=2 ** 12 + 1,
                           max_scale=64.0, n_shifts=15)
    assert err > 1e-3


def test_two_scales_equal_two_single_calls():
    sig = Signal(0.5, smooth_noise(513))
    both = cwt_fft(sig, [4.0, 9.0], MORLET).coefficients
    assert np.array_equal(both[0], cwt_fft(sig, [4.0], MORLET).coefficients[0])
    assert np.array_equal(both[1], cwt_fft(sig, [9.0], MORLET).coefficients[0])


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), seed=st.integers(0, 10_000))
def test_cwt_linearity(a, b, seed):
    h1 = smooth_noise(257, seed)
    h2 = smooth_noise(257, seed + 1)
    scales = [3.0, 7.5, 20.0]
    g1 = cwt_fft(Signal(1.0, h1), scales, MORLET).coefficients
    g2 = cwt_fft(Signal(1.0, h2), scales, MORLET).coefficients
    g = cwt_fft(Signal(1.0, a * h1 + b * h2), scales, MORLET).coefficients
    tol = 1e-12 * (abs(a) * np.abs(g1).max() + abs(b) * np.abs(g2).max() + 1.0)
    assert np.max(np.abs(g - (a * g1 + b * g2))) <= tol


def test_translation_covariance():
    n, m = 4097, 5
    h = smooth_noise(n, 3)
    scales = [6.0, 12.0, 24.0]
    g0 = cwt_fft(Signal(1.0, h), scales, MORLET).coefficients
    g1 = cwt_fft(Signal(1.0, np.roll(h, -m)), scales, MORLET).coefficients
    lo, hi = int(0.1 * n), int(0.9 * n) - m
    diff = np.abs(g1[:, lo:hi] - g0[:, lo + m:hi + m]).max()
    assert diff <= 1e-6 * np.abs(g0[:, lo:hi]).max()


def test_negative_scale_is_conjugate_and_realification_spans():
    h = smooth_noise(1025, 8)
    wp = cwt_fft(Signal(1.0, h), [12.0], MORLET).coefficients[0]
    wm = cwt_fft(Signal(1.0, h), [-12.0], MORLET).coefficients[0]
    assert np.allclose(wm, wp.conj(), rtol=0, atol=1e-13 * np.abs(wp).max())
    assert (np.linalg.matrix_rank(np.vstack([wp.real, wp.imag]))
            == np.linalg.matrix_rank(np.vstack([wp, wm])))


def test_min_resolved_scale():
    s = min_resolved_scale(MORLET)
    assert wavelet_fourier(MORLET, s * math.pi).real <= 1e-12 * 1.0001
    assert s == pytest.approx(4.276, abs=1e-3)


def test_admissibility_constant_matches_adaptive_quadrature():
    c = admissibility_constant(MORLET)
    assert c == pytest.approx(admissibility_by_quad(6.0), rel=1e-9)


def test_admissibility_self_convergence():
    c1 = admissibility_constant(MORLET, 200)
    c2 = admissibility_constant(MORLET, 400)
    assert abs(c1 - c2) <= 5e-5 * c2
    assert c1 > 0 and math.isfinite(c1)


def test_admissibility_depends_on_omega0():
    c6 = admissibility_constant(WaveletKind.morlet(6.0))
    c8 = admissibility_constant(WaveletKind.morlet(8.0))
    assert math.isfinite(c8) and c8 > 0 and c6 != c8


def test_modulated_gaussian_not_admissible():
    with pytest.raises(NotAdmissible):
        admissibility_constant(GAUSS)
    grid = CwtGrid(np.array([2.0]), 1.0, np.zeros((1, 8), dtype=complex))
    with pytest.raises(NotAdmissible):
        inverse_cwt_pointwise(grid, GAUSS, 1.0, 1.0)


def test_log_scale_weights_on_dyadic_grid():
    scales = np.exp2(np.arange(1, 41) / 8)
    assert np.allclose(log_scale_weights(scales), math.log(2) / 8, rtol=0, atol=1e-14)


def test_inverse_of_zero_grid():
    grid = CwtGrid(np.array([2.0, 4.0]), 1.0, np.zeros((2, 16), dtype=complex))
    assert inverse_cwt_pointwise(grid, MORLET, 8.0, 1.88) == 0.0


def test_inverse_out_of_window():
    grid = CwtGrid(np.array([2.0]), 0.5, np.zeros((1, 16), dtype=complex))
    with pytest.raises(OutOfWindow):
        inverse_cwt_pointwise(grid, MORLET, 7.6, 1.88)


def test_inverse_pulse_reconstruction():
    err, n_scales = pulse_reconstruction_error()
    assert n_scales >= 200
    assert err <= 1e-2


def test_inverse_linearity():
    n = 2049
    h1, h2 = smooth_noise(n, 11), smooth_noise(n, 12)
    scales = np.exp2(np.arange(8, 81) / 8)
    c = admissibility_constant(MORLET)
    rec = lambda h: inverse_cwt_pointwise(cwt_fft(Signal(1.0, h), scales, MORLET), MORLET, 1024.0, c)
    a, b = 2.5, -0.75
    assert abs(rec(a * h1 + b * h2) - (a * rec(h1) + b * rec(h2))) <= 1e-10
