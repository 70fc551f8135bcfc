"""Sobolev trace constants.

On a raster mask the sharp discrete ``H^1`` trace constant is the square
root of the top eigenvalue of ``B u = mu (M + K) u`` with ``B`` the boundary
arc-length weights, ``M`` the cell-area mass and ``K`` the edge-weighted
graph Laplacian.  Since ``sqrt(a^2 + b^2) <= a + b`` the same number also
bounds the boundary norm by the ``W^{1,2}`` sum norm.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from ..grid import Annulus, Disc, DomainMask, Raster, boundary_weights, rasterize
from .poincare import _edges, _graph_laplacian, reference_lattice

__all__ = ["ThinAnnulusError", "trace_rayleigh", "rho", "trace_constant", "rayleigh_quotient"]

TAU_MAX = 0.95


class ThinAnnulusError(ValueError):
    pass


def _forms(mask: DomainMask):
    lat = mask.lattice
    idx, horiz, vert = _edges(mask.cells)
    n = mask.count
    K = _graph_laplacian(n, horiz, vert, lat.dy / lat.dx, lat.dx / lat.dy)
    M = sp.identity(n, format="csc") * lat.cell_area
    B = sp.diags(boundary_weights(mask)[mask.cells]).tocsc()
    return B, (M + K).tocsc()


def rayleigh_quotient(values, mask: DomainMask):
    """``||u||_{dD} / sqrt(||u||^2 + ||grad u||^2)`` for cell values on ``mask``."""
    B, A = _forms(mask)
    u = np.asarray(values)[mask.cells] if np.ndim(values) == 2 else np.asarray(values)
    return float(math.sqrt(np.real(np.vdot(u, B @ u)) / np.real(np.vdot(u, A @ u))))


def trace_rayleigh(mask: DomainMask, return_vector=False):
    """Largest ``||u||_{dD} / ||u||_{H^1(D)}`` over cell functions on ``mask``."""
    if mask.count < 2:
        raise ValueError("trace constant needs at least two cells")
    B, A = _forms(mask)
    n = mask.count
    if n <= 400:
        from scipy.linalg import eigh

        w, V = eigh(B.toarray(), A.toarray())
        mu, vec = w[-1], V[:, -1]
    else:
        w, V = sla.eigsh(B, k=1, M=A, which="LA", tol=1e-10)
        mu, vec = w[0], V[:, 0]
    kappa = math.sqrt(max(float(mu), 0.0))
    if return_vector:
        out = np.zeros(mask.lattice.shape)
        out[mask.cells] = vec
        return kappa, out
    return kappa


def rho(tau, table=None):
    """Calibrated ``rho(tau) = C_trace(B_{tau,1})`` with a conservative lookup.

    Between table nodes the larger of the two bracketing entries is used.
    """
    if not 0 <= tau <= TAU_MAX + 1e-12:
        raise ThinAnnulusError(
            f"thin-annulus regime out of calibrated range: r/s = {tau:.4f} > {TAU_MAX}"
        )
    if table is None:
        from .calibration import load_calibration

        table = load_calibration()["rho"]
    taus = np.asarray(table["tau"], float)
    vals = np.asarray(table["value"], float)
    j = int(np.searchsorted(taus, tau, side="left"))
    if j < taus.size and abs(taus[j] - tau) < 1e-12:
        return float(vals[j])
    lo = max(j - 1, 0)
    hi = min(j, taus.size - 1)
    return float(max(vals[lo], vals[hi]))


def trace_constant(domain, table=None, resolution=60):
    """Trace constant bound ``rho(r/s) (s^(1/2) + s^(-1/2))``.

    Discs use ``tau = 0``.  Raster domains fall back to the direct
    Rayleigh-quotient maximization on the mask.
    """
    if isinstance(domain, Disc):
        return rho(0.0, table) * (math.sqrt(domain.radius) + 1.0 / math.sqrt(domain.radius))
    if isinstance(domain, Annulus):
        s = domain.outer
        return rho(domain.inner / s, table) * (math.sqrt(s) + 1.0 / math.sqrt(s))
    if isinstance(domain, Raster):
        return trace_rayleigh(domain.mask)
    raise TypeError(f"unknown domain {domain!r}")


def reference_trace(domain, resolution=60):
    """Rayleigh trace constant of a rasterized disc/annulus (no table)."""
    return trace_rayleigh(rasterize(domain, reference_lattice(domain, resolution)))
