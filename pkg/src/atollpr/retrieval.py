"""Alternating-projection phase retrieval from Gabor magnitudes.

Retrieval works on a periodic lattice: the signal is one period of length
``T`` sampled at ``fs``, window positions ``x_k = t0 + k dx`` tile the period
(``dx * fs`` an integer) and frequencies ``y_j = -fs/2 + j/T`` cover the full
band.  Each column of the transform is then a scaled FFT of a windowed frame,
the least-squares synthesis is exact, and the range projection
``P = V V^+`` is an orthogonal projection.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .grid import Lattice, TFGrid, _check_same
from .transforms import Signal, TransformDomainError, _wrap, window

__all__ = [
    "PeriodicGabor",
    "periodic_lattice",
    "RetrievalResult",
    "retrieve",
    "diagnose_phases",
    "PhaseDiagnosis",
    "restore_magnitude",
]


def periodic_lattice(t0, duration, sample_rate, dx) -> Lattice:
    """Lattice compatible with :class:`PeriodicGabor` for one signal period."""
    n = int(round(duration * sample_rate))
    hop = dx * sample_rate
    if abs(hop - round(hop)) > 1e-9 or round(hop) < 1:
        raise TransformDomainError("dx * sample_rate must be a positive integer")
    hop = int(round(hop))
    if n % hop:
        raise TransformDomainError("dx must divide the period")
    T = n / sample_rate
    return Lattice(t0, -sample_rate / 2, dx, 1.0 / T, n // hop, n)


class PeriodicGabor:
    """Gabor analysis/synthesis pair on a :func:`periodic_lattice`."""

    def __init__(self, lattice: Lattice):
        n = lattice.ny
        T = lattice.nx * lattice.dx
        fs = n / T
        hop = lattice.dx * fs
        if abs(lattice.dy * T - 1) > 1e-9 or abs(hop - round(hop)) > 1e-9:
            raise TransformDomainError("lattice is not a full periodic Gabor lattice")
        if abs(lattice.origin_y + fs / 2) > 1e-9 * fs:
            raise TransformDomainError("periodic lattice must start at -fs/2")
        if lattice.dx * lattice.dy > 1:
            raise TransformDomainError("lattice undersampled: dx*dy > 1")
        self.lattice = lattice
        self.n, self.T, self.fs = n, T, fs
        self.t0 = lattice.origin_x
        t = self.t0 + np.arange(n) / fs
        self.times = t
        self.win = window(_wrap(t[None, :] - lattice.xs[:, None], T))  # (nx, n)
        self.norm = np.sum(self.win**2, axis=0)
        if np.min(self.norm) <= 0:
            raise TransformDomainError("window positions leave gaps in the period")
        ys = lattice.ys
        self._order = np.rint(ys * T).astype(int) % n  # FFT bin of each y row
        self._phase = np.exp(-2j * np.pi * self.t0 * ys)[:, None] / fs

    def forward(self, samples) -> np.ndarray:
        frames = self.win * np.asarray(samples)[None, :]
        X = np.fft.fft(frames, axis=1)  # (nx, n)
        return X[:, self._order].T * self._phase

    def pinv(self, values) -> np.ndarray:
        X = np.empty((self.lattice.nx, self.n), complex)
        X[:, self._order] = (np.asarray(values) / self._phase).T
        frames = np.fft.ifft(X, axis=1)
        return np.sum(self.win * frames, axis=0) / self.norm

    def project(self, values) -> np.ndarray:
        return self.forward(self.pinv(values))

    def signal(self, samples):
        return Signal(samples, self.fs, self.t0)


@dataclass
class RetrievalResult:
    f_rec: Signal
    F_rec: TFGrid
    iterations: int
    measurement_residual_rel: float
    time_residual_rel: float | None
    phase_map: TFGrid
    log: list
    stalled: bool = False

    def write_log(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "residual"])
            for it, r in self.log:
                w.writerow([it, repr(r)])

    def summary(self):
        return {
            "iterations": self.iterations,
            "measurement_residual_rel": self.measurement_residual_rel,
            "time_residual_rel": self.time_residual_rel,
            "stalled": self.stalled,
        }


def _rel(a, b):
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb > 0 else float(np.linalg.norm(a))


def restore_magnitude(M, C):
    """``M * exp(i arg C)``: the measured magnitude with the phase of ``C``."""
    return M * np.exp(1j * np.angle(C))


def retrieve(
    magnitude: TFGrid,
    iters: int = 500,
    seed: int = 0,
    truth: Signal | None = None,
    floor: float = 1e-2,
    stall_tol: float = 1e-9,
    stall_window: int = 20,
    log_every: int = 1,
    callback=None,
) -> RetrievalResult:
    """Griffin-Lim style alternating projections.

    Starting from the measured magnitude with seeded uniform random phase,
    iterate ``F <- M * exp(i arg(P F))``.  The measurement residual
    ``|| |P F| - M || / ||M||`` is nonincreasing.  Iteration stops after
    ``iters`` steps or when the residual changes by less than ``stall_tol``
    (relative) over ``stall_window`` steps.

    Parameters
    ----------
    magnitude : TFGrid
        Real non-negative grid on a :func:`periodic_lattice`.
    truth : Signal, optional
        Ground truth for ``time_residual_rel`` (after optimal global phase)
        and for ``phase_map``; without it ``phase_map`` is ``-arg(F_rec)``.
    floor : float
        Cells below ``floor * max(M)`` are blank in ``phase_map``.
    """
    if magnitude.is_complex:
        raise TypeError("retrieve expects a real magnitude grid")
    M = magnitude.values
    if np.any(M < 0):
        raise ValueError("magnitude must be non-negative")
    op = PeriodicGabor(magnitude.lattice)
    lat = magnitude.lattice
    nM = np.linalg.norm(M)
    if nM == 0:
        zero = np.zeros(op.n, complex)
        return RetrievalResult(
            op.signal(zero), TFGrid(lat, np.zeros(lat.shape, complex)), 0, 0.0,
            None if truth is None else (0.0 if truth.norm() == 0 else 1.0),
            TFGrid(lat, np.zeros(lat.shape)), [(0, 0.0)],
        )
    rng = np.random.default_rng(seed)
    F = M * np.exp(2j * np.pi * rng.random(M.shape))
    C = op.project(F)
    res = float(np.linalg.norm(np.abs(C) - M) / nM)
    log = [(0, res)]
    history = [res]
    stalled = False
    it = 0
    for it in range(1, iters + 1):
        F = restore_magnitude(M, C)
        C = op.project(F)
        res = float(np.linalg.norm(np.abs(C) - M) / nM)
        history.append(res)
        if it % log_every == 0 or it == iters:
            log.append((it, res))
        if callback is not None:
            callback(it, res)
        if len(history) > stall_window:
            old = history[-1 - stall_window]
            if old == 0 or abs(old - res) <= stall_tol * old:
                stalled = True
                if log[-1][0] != it:
                    log.append((it, res))
                break
    f_rec = op.pinv(C)
    F_rec = TFGrid(lat, op.forward(f_rec))
    time_rel = None
    if truth is not None:
        g = truth.samples
        ip = np.vdot(f_rec, g)  # sum conj(f_rec) * g
        a = np.angle(ip) if ip != 0 else 0.0
        time_rel = _rel(np.exp(1j * a) * f_rec, g)
    # arg(F / F_rec) against the truth if known, else the recovered phase
    keep = M >= floor * M.max()
    ph = np.zeros(lat.shape)
    ref = op.forward(truth.samples) if truth is not None else np.ones(lat.shape)
    ph[keep] = np.angle(ref[keep] * np.conj(F_rec.values[keep]))
    return RetrievalResult(
        op.signal(f_rec), F_rec, it, res, time_rel, TFGrid(lat, ph), log, stalled
    )


@dataclass
class PhaseDiagnosis:
    mean_phase: float
    circular_std: float
    n_cells: int
    degenerate: bool

    def to_dict(self):
        return {
            "mean_phase": self.mean_phase,
            "circular_std": self.circular_std,
            "n_cells": self.n_cells,
            "degenerate": self.degenerate,
        }


def diagnose_phases(F_true: TFGrid, F_rec: TFGrid, dec, floor: float = 1e-2):
    """Circular mean and spread of ``arg(F_true / F_rec)`` per component.

    Only cells with ``|F_true| >= floor * max|F_true|`` are used.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    _check_same(F_true.lattice, F_rec.lattice)
    _check_same(F_true.lattice, dec.lattice)
    A = np.abs(F_true.values)
    keep = A >= floor * A.max() if A.max() > 0 else np.zeros_like(A, bool)
    keep &= np.abs(F_rec.values) > 0
    out = []
    lab = dec.labels()
    for j in range(len(dec.components)):
        sel = keep & (lab == j + 1)
        if not sel.any():
            out.append(PhaseDiagnosis(0.0, math.nan, 0, True))
            continue
        u = F_true.values[sel] * np.conj(F_rec.values[sel])
        u = u / np.abs(u)
        m = u.mean()
        if m == 0:
            out.append(PhaseDiagnosis(0.0, math.inf, int(sel.sum()), False))
            continue
        # 1 - R from deviations about the mean direction; forming |m| directly
        # would lose everything below sqrt(eps)
        dev = np.angle(u * np.conj(m / abs(m)))
        one_minus_R = float(np.mean(2.0 * np.sin(dev / 2) ** 2))
        std = math.sqrt(-2.0 * math.log1p(-one_minus_R)) if one_minus_R < 1 else math.inf
        out.append(PhaseDiagnosis(float(np.angle(m)), std, int(sel.sum()), False))
    return out
