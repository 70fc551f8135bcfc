"""Gabor and Cauchy-wavelet transforms on a time-frequency lattice.

The Gabor transform uses the fixed Gaussian window ``phi(t) = exp(-pi t^2)``
and the convention

    V f(x, y) = int f(t) phi(t - x) exp(-2 pi i t y) dt,

evaluated with Riemann sums whose weight is the sample spacing.  The Cauchy
wavelet transform of order ``s`` is evaluated in the frequency domain from
``psi_hat(w) = w^s exp(-2 pi w)`` for ``w > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Lattice, TFGrid

__all__ = [
    "Signal",
    "GaborSpec",
    "CauchySpec",
    "TransformDomainError",
    "PreconditionError",
    "window",
    "WINDOW_RADIUS",
    "WINDOW_NORM_SQ",
    "gabor_forward",
    "gabor_inverse",
    "gabor_isometry_ratio",
    "cauchy_forward",
    "cauchy_from_spectrum",
    "analytic_part",
    "symmetrize",
    "hilbert",
]

# phi(t) < 1e-12 for |t| > WINDOW_RADIUS
WINDOW_RADIUS = math.sqrt(-math.log(1e-12) / math.pi)
# ||phi||_2^2 = int exp(-2 pi t^2) dt
WINDOW_NORM_SQ = 1.0 / math.sqrt(2.0)


class TransformDomainError(ValueError):
    """Input outside the region where a transform is defined or accurate."""


class PreconditionError(ValueError):
    """Input violates a documented precondition (e.g. not analytic)."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled complex signal ``f(t0 + k / sample_rate)``."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel().copy()
        if s.size < 2:
            raise ValueError("a signal needs at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("signal samples must be finite")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self):
        return self.samples.size

    @property
    def dt(self):
        return 1.0 / self.sample_rate

    @property
    def duration(self):
        return self.n / self.sample_rate

    @property
    def times(self):
        return self.t0 + np.arange(self.n) / self.sample_rate

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dt))

    def with_samples(self, samples):
        return Signal(samples, self.sample_rate, self.t0)

    @classmethod
    def from_function(cls, func, t_range, sample_rate):
        t0, t1 = t_range
        n = int(math.floor((t1 - t0) * sample_rate)) + 1
        t = t0 + np.arange(n) / sample_rate
        return cls(func(t), sample_rate, t0)


@dataclass(frozen=True)
class GaborSpec:
    """Output lattice of the Gabor transform; the window is not configurable."""

    x_range: tuple
    y_range: tuple
    dx: float
    dy: float

    @property
    def lattice(self):
        return Lattice.from_ranges(self.x_range, self.y_range, self.dx, self.dy)


@dataclass(frozen=True)
class CauchySpec:
    """Output lattice of the Cauchy wavelet transform (``y > 0`` only)."""

    order: int
    x_range: tuple
    y_range: tuple
    dx: float
    dy: float

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("Cauchy order must be a positive integer")
        if not min(self.y_range) > 0:
            raise ValueError("Cauchy lattice must lie strictly above y = 0")

    @property
    def lattice(self):
        return Lattice.from_ranges(self.x_range, self.y_range, self.dx, self.dy)


def window(t):
    return np.exp(-np.pi * np.asarray(t) ** 2)


def _wrap(d, period):
    return (d + period / 2) % period - period / 2


def _window_matrix(times, xs, periodic, period):
    d = times[None, :] - xs[:, None]
    if periodic:
        d = _wrap(d, period)
    return window(d)


def _check_lattice_against_signal(lat, f, periodic):
    nyq = f.sample_rate / 2
    ymax = max(abs(lat.ys[0]), abs(lat.ys[-1]))
    if ymax > nyq * (1 + 1e-12):
        raise TransformDomainError(
            f"lattice frequency {ymax:g} exceeds Nyquist {nyq:g} of the signal"
        )
    if periodic:
        if f.duration < 2 * WINDOW_RADIUS:
            raise TransformDomainError("periodic signal shorter than the window support")
        return
    t = f.times
    slack = 0.5 * f.dt
    if t[0] > lat.xs[0] - WINDOW_RADIUS + slack or t[-1] < lat.xs[-1] + WINDOW_RADIUS - slack:
        raise TransformDomainError(
            f"signal covers [{t[0]:g}, {t[-1]:g}] but the lattice x-range "
            f"[{lat.xs[0]:g}, {lat.xs[-1]:g}] needs +-{WINDOW_RADIUS:.3f} of support"
        )


def gabor_forward(f: Signal, spec, periodic: bool = False, chunk: int = 256) -> TFGrid:
    """Gabor transform ``V f`` sampled on ``spec``'s lattice.

    Parameters
    ----------
    f : Signal
    spec : GaborSpec or Lattice
    periodic : bool
        Treat ``f`` as one period of a periodic signal and wrap the window
        around the sample range.  The window tails then never fall off the
        signal.
    """
    lat = spec if isinstance(spec, Lattice) else spec.lattice
    _check_lattice_against_signal(lat, f, periodic)
    t = f.times
    E = np.exp(-2j * np.pi * np.outer(t, lat.ys))  # (n, ny)
    out = np.empty((lat.ny, lat.nx), dtype=complex)
    xs = lat.xs
    for start in range(0, lat.nx, chunk):
        sl = slice(start, min(start + chunk, lat.nx))
        W = _window_matrix(t, xs[sl], periodic, f.duration) * f.samples[None, :]
        out[:, sl] = (W @ E).T * f.dt
    return TFGrid(lat, out)


def gabor_inverse(
    F: TFGrid,
    sample_rate: float,
    t0: float | None = None,
    n: int | None = None,
    periodic: bool = False,
    chunk: int = 256,
) -> Signal:
    """Synthesis with the dual window ``phi / ||phi||^2``.

    For lattices with ``dx*dy`` well below 1 the Gaussian Gabor system is
    numerically tight, so this inverts :func:`gabor_forward` on signals whose
    time-frequency energy lies inside the lattice.  The default time grid
    spans the lattice x-range plus the window support.
    """
    lat = F.lattice
    if lat.dx * lat.dy > 1.0:
        raise TransformDomainError(
            f"lattice density dx*dy = {lat.dx * lat.dy:g} > 1 is too coarse for inversion"
        )
    if t0 is None:
        t0 = lat.xs[0] - WINDOW_RADIUS
    if n is None:
        n = int(math.ceil((lat.xs[-1] + WINDOW_RADIUS - t0) * sample_rate)) + 1
    t = t0 + np.arange(n) / sample_rate
    period = n / sample_rate
    Econj = np.exp(2j * np.pi * np.outer(lat.ys, t))  # (ny, n)
    out = np.zeros(n, dtype=complex)
    xs = lat.xs
    vals = F.values
    for start in range(0, lat.nx, chunk):
        sl = slice(start, min(start + chunk, lat.nx))
        B = vals[:, sl].T @ Econj  # (nchunk, n)
        out += np.sum(_window_matrix(t, xs[sl], periodic, period) * B, axis=0)
    out *= lat.dx * lat.dy / WINDOW_NORM_SQ
    return Signal(out, sample_rate, t0)


def gabor_isometry_ratio(F: TFGrid, f: Signal) -> float:
    """``||V f||_{L^2(lattice)} / (||phi|| ||f||)``; 1 for a tight lattice."""
    energy = np.sum(np.abs(F.values) ** 2) * F.lattice.cell_area
    return float(np.sqrt(energy / WINDOW_NORM_SQ) / f.norm())


def cauchy_from_spectrum(omega, fhat, domega, spec: CauchySpec) -> TFGrid:
    """Cauchy wavelet transform from samples of ``f_hat`` on ``omega > 0``.

    ``W f(x, y) = sum_m f_hat(w_m) y^(1/2) psi_hat(y w_m) exp(2 pi i x w_m) dw``.
    """
    lat = spec.lattice
    omega = np.asarray(omega, float)
    fhat = np.asarray(fhat, complex)
    keep = omega > 0
    omega, fhat = omega[keep], fhat[keep]
    w = np.asarray(domega, float)
    if w.ndim:
        w = w[keep]
    ys = lat.ys
    yw = ys[:, None] * omega[None, :]
    psi = np.exp(spec.order * np.log(yw) - 2 * np.pi * yw)
    A = (fhat * w)[None, :] * np.sqrt(ys)[:, None] * psi  # (ny, m)
    Ex = np.exp(2j * np.pi * np.outer(omega, lat.xs))  # (m, nx)
    return TFGrid(lat, A @ Ex)


def cauchy_forward(f: Signal, spec: CauchySpec, tol: float = 1e-10) -> TFGrid:
    """Cauchy wavelet transform of an analytic signal.

    Raises
    ------
    PreconditionError
        If the fraction of spectral energy at negative frequencies exceeds
        ``tol``; the measured fraction is attached as ``.measured``.
    """
    X = np.fft.fft(f.samples)
    freqs = np.fft.fftfreq(f.n, d=f.dt)
    total = np.sum(np.abs(X) ** 2)
    if total > 0:
        neg = float(np.sum(np.abs(X[freqs < 0]) ** 2) / total)
        if neg > tol:
            raise PreconditionError(
                f"negative-frequency energy fraction {neg:.3e} exceeds {tol:g}", measured=neg
            )
    fhat = f.dt * np.exp(-2j * np.pi * freqs * f.t0) * X
    domega = 1.0 / (f.n * f.dt)
    return cauchy_from_spectrum(freqs, fhat, domega, spec)


def analytic_part(f: Signal) -> Signal:
    """Drop negative frequencies; DC and Nyquist bins are halved.

    With this weighting ``2 Re(analytic_part(f)) == f`` for real ``f``.
    """
    n = f.n
    X = np.fft.fft(f.samples)
    h = np.zeros(n)
    h[0] = 0.5
    if n % 2 == 0:
        h[1 : n // 2] = 1.0
        h[n // 2] = 0.5
    else:
        h[1 : (n + 1) // 2] = 1.0
    return f.with_samples(np.fft.ifft(X * h))


def symmetrize(g: Signal) -> np.ndarray:
    """Real signal whose positive-frequency half is ``g``'s.

    Inverse of :func:`analytic_part` on real signals: positive bins are kept,
    negative bins are the conjugate mirror, DC and Nyquist are ``2 Re``.
    """
    n = g.n
    G = np.fft.fft(g.samples)
    S = np.zeros(n, dtype=complex)
    half = n // 2 if n % 2 == 0 else (n + 1) // 2
    S[1:half] = G[1:half]
    S[n - half + 1 :] = np.conj(G[1:half][::-1])
    S[0] = 2 * G[0].real
    if n % 2 == 0:
        S[n // 2] = 2 * G[n // 2].real
    return np.fft.ifft(S).real


def hilbert(x) -> np.ndarray:
    """Hilbert transform with ``(Hf)^ = -i sgn(w) f^`` (DC and Nyquist zeroed)."""
    x = np.asarray(x, float)
    n = x.size
    X = np.fft.fft(x)
    sgn = np.sign(np.fft.fftfreq(n))
    if n % 2 == 0:
        sgn[n // 2] = 0.0
    return np.fft.ifft(-1j * sgn * X).real
