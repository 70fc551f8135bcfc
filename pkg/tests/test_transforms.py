import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from atollpr.grid import TFGrid
from atollpr.transforms import (
    WINDOW_NORM_SQ,
    WINDOW_RADIUS,
    CauchySpec,
    GaborSpec,
    PreconditionError,
    Signal,
    TransformDomainError,
    analytic_part,
    cauchy_forward,
    cauchy_from_spectrum,
    gabor_forward,
    gabor_inverse,
    gabor_isometry_ratio,
    hilbert,
    symmetrize,
    window,
)

from conftest import gaussian_mixture


def test_window_constants():
    assert window(WINDOW_RADIUS) == pytest.approx(1e-12)
    val, _ = quad(lambda t: math.exp(-2 * math.pi * t * t), -np.inf, np.inf)
    assert WINDOW_NORM_SQ == pytest.approx(val, rel=1e-12)


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal([1.0], 1.0)
    with pytest.raises(ValueError):
        Signal([1.0, np.inf], 1.0)
    with pytest.raises(ValueError):
        Signal([1.0, 2.0], 0.0)
    s = Signal(np.ones(8), 4.0, 1.0)
    assert s.duration == 2.0 and s.times[-1] == pytest.approx(2.75)


def _window_oracle(x, y):
    return 2**-0.5 * np.exp(-1j * np.pi * x * y) * np.exp(-np.pi * (x**2 + y**2) / 2)


def test_gabor_of_window_closed_form():
    spec = GaborSpec((-2, 2), (-2, 2), 0.05, 0.05)
    f = Signal.from_function(window, (-6, 6), 32.0)
    F = gabor_forward(f, spec)
    X, Y = F.lattice.meshgrid()
    ref = _window_oracle(X, Y)
    assert np.max(np.abs(F.values - ref)) / np.abs(ref).max() < 1e-6


def test_closed_form_matches_quadrature_oracle():
    # independent check of the oracle itself by adaptive quadrature
    for x, y in [(0.3, -0.7), (1.1, 0.4), (-0.5, 1.5)]:
        re, _ = quad(lambda t: window(t) * window(t - x) * math.cos(2 * math.pi * t * y), -10, 10, epsabs=1e-14)
        im, _ = quad(lambda t: -window(t) * window(t - x) * math.sin(2 * math.pi * t * y), -10, 10, epsabs=1e-14)
        assert abs(complex(re, im) - _window_oracle(x, y)) < 1e-12


def test_gabor_zero_signal():
    F = gabor_forward(Signal(np.zeros(200), 16.0, -6.0), GaborSpec((-2, 2), (-2, 2), 0.25, 0.25))
    assert np.all(F.values == 0)


def test_gabor_domain_errors():
    f = Signal.from_function(window, (-3, 3), 8.0)
    with pytest.raises(TransformDomainError):
        gabor_forward(f, GaborSpec((-2, 2), (-2, 2), 0.25, 0.25))  # support too short
    g = Signal.from_function(window, (-8, 8), 2.0)
    with pytest.raises(TransformDomainError):
        gabor_forward(g, GaborSpec((-1, 1), (-3, 3), 0.25, 0.25))  # beyond Nyquist


def test_time_shift_covariance(rng):
    dx = 0.05
    a = 0.5  # multiple of dx and of the sample spacing
    mix = gaussian_mixture(rng)
    fs = 16.0
    f = Signal.from_function(mix, (-7, 7), fs)
    g = Signal.from_function(lambda t: mix(t - a), (-7, 7), fs)
    Fg = gabor_forward(g, GaborSpec((-1.5, 1.5), (-2, 2), dx, dx))
    Ff = gabor_forward(f, GaborSpec((-1.5 - a, 1.5 - a), (-2, 2), dx, dx))
    ys = Fg.lattice.ys
    pred = np.exp(-2j * np.pi * a * ys)[:, None] * Ff.values
    assert np.max(np.abs(Fg.values - pred)) < 1e-8


def test_modulation_covariance(rng):
    b = 0.5
    mix = gaussian_mixture(rng)
    fs = 16.0
    f = Signal.from_function(mix, (-7, 7), fs)
    g = Signal.from_function(lambda t: np.exp(2j * np.pi * b * t) * mix(t), (-7, 7), fs)
    Fg = gabor_forward(g, GaborSpec((-1.5, 1.5), (-1.5, 1.5), 0.05, 0.05))
    Ff = gabor_forward(f, GaborSpec((-1.5, 1.5), (-1.5 - b, 1.5 - b), 0.05, 0.05))
    assert np.max(np.abs(Fg.values - Ff.values)) < 1e-8


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.complex_numbers(max_magnitude=5), b=st.complex_numbers(max_magnitude=5))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    spec = GaborSpec((-1, 1), (-1, 1), 0.1, 0.1)
    f = Signal.from_function(gaussian_mixture(rng), (-5, 5), 8.0)
    g = Signal.from_function(gaussian_mixture(rng), (-5, 5), 8.0)
    lhs = gabor_forward(f.with_samples(a * f.samples + b * g.samples), spec).values
    rhs = a * gabor_forward(f, spec).values + b * gabor_forward(g, spec).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, abs(a) + abs(b)) * 10


def _round_trip(seed):
    rng = np.random.default_rng(seed)
    mix = gaussian_mixture(rng, k=4, rad=1.0)
    spec = GaborSpec((-5.5, 5.5), (-5.5, 5.5), 0.25, 0.25)
    fs = 16.0
    f = Signal.from_function(mix, (-9, 9), fs)
    F = gabor_forward(f, spec)
    back = gabor_inverse(F, fs, t0=f.t0, n=f.n)
    return f, F, back


def test_gabor_round_trip():
    f, F, back = _round_trip(1)
    err = np.linalg.norm(back.samples - f.samples) / np.linalg.norm(f.samples)
    assert err < 1e-6
    assert back.norm() / f.norm() == pytest.approx(1.0, abs=1e-6)


def test_discrete_isometry():
    for seed in range(3):
        f, F, _ = _round_trip(seed)
        assert abs(gabor_isometry_ratio(F, f) - 1) < 1e-4


def test_gabor_inverse_zero_and_undersampled():
    lat = GaborSpec((-1, 1), (-1, 1), 0.25, 0.25).lattice
    out = gabor_inverse(TFGrid(lat, np.zeros(lat.shape, complex)), 8.0)
    assert np.all(out.samples == 0)
    coarse = GaborSpec((-2, 2), (-2, 2), 1.5, 1.0).lattice
    with pytest.raises(TransformDomainError):
        gabor_inverse(TFGrid(coarse, np.zeros(coarse.shape, complex)), 8.0)


def _cauchy_oracle(X, Y, s):
    return Y ** (s + 0.5) * math.factorial(s) / (2 * np.pi * (1 + Y - 1j * X)) ** (s + 1)


@pytest.mark.parametrize("s", [1, 2, 4])
def test_cauchy_closed_form(s):
    spec = CauchySpec(s, (-2, 2), (0.2, 2.0), 0.1, 0.1)
    dw = 2e-4
    w = (np.arange(200_000) + 0.5) * dw  # midpoint nodes
    W = cauchy_from_spectrum(w, np.exp(-2 * np.pi * w), dw, spec)
    X, Y = W.lattice.meshgrid()
    ref = _cauchy_oracle(X, Y, s)
    assert np.max(np.abs(W.values - ref)) / np.abs(ref).max() < 1e-6


def test_cauchy_oracle_by_quadrature():
    s, x, y = 2, 0.4, 0.7

    def integrand(w, part):
        v = np.exp(-2 * np.pi * w) * y**0.5 * (y * w) ** s * np.exp(-2 * np.pi * y * w) * np.exp(2j * np.pi * x * w)
        return v.real if part == 0 else v.imag

    re, _ = quad(integrand, 0, np.inf, args=(0,), epsabs=1e-14)
    im, _ = quad(integrand, 0, np.inf, args=(1,), epsabs=1e-14)
    assert abs(complex(re, im) - _cauchy_oracle(x, y, s)) < 1e-10


def _analytic_signal(t, centres, scale=1.0):
    # f_hat(w) = sum_k w e^{-2 pi a_k w} on w > 0  ->  f(t) = sum_k 1 / (2 pi (a_k - i t))^2
    return sum(1.0 / (2 * np.pi * (a - 1j * t / scale)) ** 2 for a in centres)


def test_cauchy_forward_from_samples():
    # f_hat(w) = e^{-2 pi w} on w > 0  <->  f(t) = 1 / (2 pi (1 - i t)); periodic truncation error small
    fs = 16.0
    f = Signal.from_function(lambda t: 1 / (2 * np.pi * (1 - 1j * t)), (-4096, 4096 - 1 / fs), fs)
    f = analytic_part(f)
    spec = CauchySpec(2, (-1, 1), (0.5, 1.5), 0.25, 0.25)
    W = cauchy_forward(f, spec, tol=1e-6)
    X, Y = W.lattice.meshgrid()
    ref = _cauchy_oracle(X, Y, 2)
    assert np.max(np.abs(W.values - ref)) / np.abs(ref).max() < 1e-3


def test_cauchy_zero_and_precondition():
    spec = CauchySpec(1, (-1, 1), (0.5, 1.0), 0.25, 0.25)
    assert np.all(cauchy_forward(Signal(np.zeros(64), 8.0), spec).values == 0)
    t = np.arange(256) / 16
    with pytest.raises(PreconditionError) as ei:
        cauchy_forward(Signal(np.cos(2 * np.pi * t), 16.0), spec)
    assert ei.value.measured == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ValueError):
        CauchySpec(1, (-1, 1), (0.0, 1.0), 0.25, 0.25)
    with pytest.raises(ValueError):
        CauchySpec(0, (-1, 1), (0.5, 1.0), 0.25, 0.25)


def test_cauchy_scaling_covariance():
    lam = 2.0
    centres = (1.0, 1.7)
    dw = 1e-3
    w = np.arange(1, 60_000) * dw
    spec = CauchySpec(2, (-1, 1), (0.5, 1.5), 0.1, 0.1)
    fhat = sum(w * np.exp(-2 * np.pi * a * w) for a in centres)
    # f(t / lam) has transform lam * f_hat(lam w)
    ghat = lam * sum(lam * w * np.exp(-2 * np.pi * a * lam * w) for a in centres)
    Wg = cauchy_from_spectrum(w, ghat, dw, spec)
    small = CauchySpec(2, (-1 / lam, 1 / lam), (0.5 / lam, 1.5 / lam), 0.1 / lam, 0.1 / lam)
    Wf = cauchy_from_spectrum(w, fhat, dw, small)
    assert Wf.lattice.shape == Wg.lattice.shape
    assert np.max(np.abs(Wg.values - lam**0.5 * Wf.values)) < 1e-7


def test_analytic_part_examples():
    t = np.arange(256) / 32
    f = Signal(np.cos(2 * np.pi * t), 32.0)
    fa = analytic_part(f)
    assert np.max(np.abs(fa.samples - 0.5 * np.exp(2j * np.pi * t))) < 1e-10
    rng = np.random.default_rng(3)
    x = rng.standard_normal(257)
    fa = analytic_part(Signal(x, 1.0))
    # DC is halved, so 2 Re f_a returns the DC too; without DC it recovers f exactly
    assert np.max(np.abs(2 * fa.samples.real - x)) < 1e-10
    y = x - x.mean()
    assert np.max(np.abs(2 * analytic_part(Signal(y, 1.0)).samples.real - y)) < 1e-10
    once = analytic_part(Signal(np.exp(2j * np.pi * 3 * t), 32.0))
    assert np.max(np.abs(analytic_part(once).samples - once.samples)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(n=st.integers(4, 129), seed=st.integers(0, 1000))
def test_symmetrize_inverts_analytic_part(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    s = Signal(x, 1.0)
    assert np.max(np.abs(symmetrize(analytic_part(s)) - x)) < 1e-12


def test_hilbert_of_cosine():
    t = np.arange(128) / 16
    assert np.max(np.abs(hilbert(np.cos(2 * np.pi * t)) - np.sin(2 * np.pi * t))) < 1e-12


def test_periodic_forward_wraps():
    fs = 8.0
    f = Signal.from_function(lambda t: window(t - 5.5), (0, 8 - 1 / fs), fs)
    spec = GaborSpec((0, 7.75), (-1, 1), 0.25, 0.25)
    F = gabor_forward(f, spec, periodic=True)
    # energy near x=5.5 and, by wrap-around, symmetric about it
    col = np.abs(F.values).max(axis=0)
    assert F.lattice.xs[np.argmax(col)] == pytest.approx(5.5)
