"""Mono audio I/O and phase-shift constructions.

A real signal ``f`` is rotated by ``alpha`` by multiplying its positive
frequencies by ``e^{i alpha}`` and its negative frequencies by
``e^{-i alpha}``; DC and Nyquist bins are left alone so the result stays real
and the map is unitary.  Per-component shifts rotate the Gabor coefficients
of the analytic part of ``f`` on each atoll component separately.

Audio time is mapped to window units by ``time_scale`` (seconds per unit), so
the Gaussian window ``exp(-pi t^2)`` has a physical width of about
``time_scale`` seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from .alignment import scramble_phases
from .atoll import segment
from .grid import TFGrid
from .retrieval import PeriodicGabor, periodic_lattice
from .transforms import Signal, analytic_part, hilbert, symmetrize

__all__ = [
    "AudioBuffer",
    "AudioFormatError",
    "read_wav",
    "write_wav",
    "phase_shift_global",
    "phase_shift_time_domain",
    "time_formula_discrepancy",
    "phase_shift_components",
    "AudioLattice",
    "two_burst",
]


class AudioFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono real samples at an integer sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1:
            raise AudioFormatError("only mono audio is supported")
        if s.size < 2:
            raise AudioFormatError("audio needs at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise AudioFormatError("audio samples must be finite")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise AudioFormatError("sample rate must be a positive integer")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    @property
    def channels(self):
        return 1

    @property
    def n(self):
        return self.samples.size

    @property
    def duration(self):
        return self.n / self.sample_rate_hz

    def norm(self):
        return float(np.linalg.norm(self.samples))

    def peak(self):
        return float(np.max(np.abs(self.samples)))

    def normalized(self):
        """Copy scaled into ``[-1, 1]`` (unchanged if already inside)."""
        p = self.peak()
        return self if p <= 1 else AudioBuffer(self.samples / p, self.sample_rate_hz)

    def with_samples(self, samples):
        return AudioBuffer(samples, self.sample_rate_hz)


def read_wav(path) -> AudioBuffer:
    """Read 16-bit PCM or 32-bit float mono WAV, scaled into ``[-1, 1]``."""
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise AudioFormatError(f"{data.shape[1]}-channel WAV; only mono is supported")
    if data.dtype == np.int16:
        x = data.astype(float) / 32768.0
    elif data.dtype == np.float32:
        x = data.astype(float)
    else:
        raise AudioFormatError(f"unsupported WAV sample type {data.dtype}")
    return AudioBuffer(x, rate).normalized()


def write_wav(path, buf: AudioBuffer):
    """Write 32-bit float mono WAV; returns the gain applied to fit ``[-1, 1]``."""
    out = buf.normalized()
    gain = 1.0 if out is buf else 1.0 / buf.peak()
    wavfile.write(path, buf.sample_rate_hz, out.samples.astype(np.float32))
    return gain


def _rotation(n, alpha):
    k = np.fft.fftfreq(n)
    rot = np.ones(n, complex)
    rot[k > 0] = np.exp(1j * alpha)
    rot[k < 0] = np.exp(-1j * alpha)
    if n % 2 == 0:
        rot[n // 2] = 1.0  # Nyquist bin is its own mirror
    return rot


def phase_shift_global(f: AudioBuffer, alpha: float) -> AudioBuffer:
    """Spectral phase rotation ``f^alpha``."""
    X = np.fft.fft(f.samples) * _rotation(f.n, alpha)
    out = np.fft.ifft(X)
    return f.with_samples(out.real)


def phase_shift_time_domain(f: AudioBuffer, alpha: float) -> AudioBuffer:
    """``cos(alpha) f - sin(alpha) H f`` with ``(Hf)^ = -i sgn(w) f^``.

    Agrees with :func:`phase_shift_global` on signals without DC or Nyquist
    content.
    """
    x = f.samples
    return f.with_samples(math.cos(alpha) * x - math.sin(alpha) * hilbert(x))


def time_formula_discrepancy(f: AudioBuffer, alpha: float) -> dict:
    """Relative distance of two time-domain readings from the spectral shift.

    ``standard`` is ``cos(alpha) f - sin(alpha) H f``; ``reflected`` is the
    literal ``cos(alpha) f(t) + sin(alpha) (Hf)(-t)`` (time reversal taken as
    circular index reversal about the first sample).
    """
    ref = phase_shift_global(f, alpha).samples
    x = f.samples
    Hx = hilbert(x)
    refl = np.roll(Hx[::-1], 1)
    lit = math.cos(alpha) * x + math.sin(alpha) * refl
    std = phase_shift_time_domain(f, alpha).samples
    nf = np.linalg.norm(x)
    return {
        "standard": float(np.linalg.norm(std - ref) / nf),
        "reflected": float(np.linalg.norm(lit - ref) / nf),
    }


@dataclass(frozen=True)
class AudioLattice:
    """Periodic Gabor lattice for an audio buffer.

    ``time_scale`` is seconds per window unit and ``dx`` the window hop in
    window units (``dx * sample_rate_hz * time_scale`` must be an integer).
    """

    time_scale: float = 0.025
    dx: float = 0.25

    def signal(self, f: AudioBuffer, samples=None) -> Signal:
        fs = f.sample_rate_hz * self.time_scale
        return Signal(f.samples if samples is None else samples, fs, 0.0)

    def lattice(self, f: AudioBuffer):
        fs = f.sample_rate_hz * self.time_scale
        return periodic_lattice(0.0, f.n / fs, fs, self.dx)

    def operator(self, f: AudioBuffer):
        return PeriodicGabor(self.lattice(f))


def analytic_gabor(f: AudioBuffer, lat: AudioLattice = AudioLattice()) -> TFGrid:
    """Gabor grid of the analytic part of ``f``."""
    op = lat.operator(f)
    fa = analytic_part(lat.signal(f))
    return TFGrid(op.lattice, op.forward(fa.samples))


def phase_shift_components(
    f: AudioBuffer,
    dec,
    alphas,
    lat: AudioLattice = AudioLattice(),
) -> AudioBuffer:
    """Rotate each atoll component of ``V f_a`` and resynthesize a real signal.

    ``dec`` must be computed on ``lat.lattice(f)``, e.g. by
    :func:`segment_audio`.  Cells outside every component keep their phase.
    """
    op = lat.operator(f)
    fa = analytic_part(lat.signal(f))
    V = TFGrid(op.lattice, op.forward(fa.samples))
    G = scramble_phases(V, dec, alphas)
    g = lat.signal(f, op.pinv(G.values))
    return f.with_samples(symmetrize(g))


def segment_audio(f: AudioBuffer, rel_threshold=1e-4, lat: AudioLattice = AudioLattice()):
    """Atoll decomposition of ``|V f_a|`` at ``rel_threshold * max``."""
    V = analytic_gabor(f, lat)
    A = V.abs()
    return segment(A, rel_threshold * float(A.values.max()), fit=False), V


def magnitude_residual(f: AudioBuffer, g: AudioBuffer, lat: AudioLattice = AudioLattice()) -> float:
    """``|| |V g_a| - |V f_a| || / || V f_a ||``."""
    A = np.abs(analytic_gabor(f, lat).values)
    B = np.abs(analytic_gabor(g, lat).values)
    return float(np.linalg.norm(B - A) / np.linalg.norm(A))


def two_burst(sample_rate_hz=4000, duration=1.0, centers=(0.3, 0.7), freqs=(440.0, 660.0), width=0.06):
    """Two disjoint Gaussian wave packets (a synthetic two-syllable word)."""
    t = np.arange(int(round(sample_rate_hz * duration))) / sample_rate_hz
    x = np.zeros_like(t)
    for c, fr in zip(centers, freqs):
        x += np.exp(-np.pi * ((t - c) / width) ** 2) * np.cos(2 * np.pi * fr * t)
    return AudioBuffer(0.9 * x / np.max(np.abs(x)), sample_rate_hz)
