"""Poincare constants: closed-form bounds and a Neumann-Laplacian eigensolver."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from scipy import ndimage

from ..grid import CROSS, Annulus, Disc, DomainMask, Lattice, Raster, rasterize

__all__ = [
    "ConvergenceError",
    "neumann_laplacian",
    "neumann_lambda2",
    "poincare_constant",
    "reference_lattice",
    "analytic_poincare_bound",
]

# first zero of J1' ; lambda_2(unit disc) = J1P_ZERO**2
J1P_ZERO = 1.8411837813406593


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _edges(cells):
    idx = -np.ones(cells.shape, int)
    idx[cells] = np.arange(int(cells.sum()))
    h = cells[:, :-1] & cells[:, 1:]
    v = cells[:-1, :] & cells[1:, :]
    return idx, (idx[:, :-1][h], idx[:, 1:][h]), (idx[:-1, :][v], idx[1:, :][v])


def _graph_laplacian(n, horiz, vert, wh, wv):
    r = np.concatenate([horiz[0], vert[0]])
    c = np.concatenate([horiz[1], vert[1]])
    w = np.concatenate([np.full(horiz[0].size, wh), np.full(vert[0].size, wv)])
    W = sp.coo_matrix((w, (r, c)), shape=(n, n)).tocsr()
    W = W + W.T
    return (sp.diags(np.asarray(W.sum(axis=1)).ravel()) - W).tocsc()


def neumann_laplacian(mask: DomainMask):
    """5-point Laplacian on the masked cells with natural (Neumann) boundary.

    Off-mask neighbours are simply absent, which is the graph Laplacian with
    edge weights ``1/dx^2`` and ``1/dy^2``.
    """
    lat = mask.lattice
    _, horiz, vert = _edges(mask.cells)
    return _graph_laplacian(mask.count, horiz, vert, 1.0 / lat.dx**2, 1.0 / lat.dy**2)


def neumann_lambda2(mask: DomainMask, tol=1e-8, maxiter=10_000, seed=0, block=4):
    """Smallest nonzero Neumann eigenvalue by block inverse iteration.

    The constant null vector is deflated by grounding one node: the reduced
    matrix is SPD, and for right-hand sides orthogonal to constants its
    solution, re-projected onto the complement of constants, is the
    pseudo-inverse applied to that right-hand side.

    Returns
    -------
    lam : float
    iterations : int

    Raises
    ------
    ValueError
        Mask empty, a single cell, or not 4-connected.
    ConvergenceError
        Estimated relative eigenvalue error still above ``tol`` after
        ``maxiter``.
    """
    n = mask.count
    if n < 2:
        raise ValueError("eigensolve needs at least two cells")
    _, ncomp = ndimage.label(mask.cells, structure=CROSS)
    if ncomp != 1:
        raise ValueError(f"mask has {ncomp} connected components; lambda_2 would be 0")
    L = neumann_laplacian(mask)
    lu = sla.splu(L[1:, 1:].tocsc())

    def apply_pinv(B):
        X = np.zeros_like(B)
        X[1:] = lu.solve(B[1:])
        return X - X.mean(axis=0)

    # block iteration with Rayleigh-Ritz: the smallest Ritz value converges
    # like (lambda_2 / lambda_{k+2})^(2 it), so nearly degenerate pairs
    # lambda_2 ~ lambda_3 (nearly symmetric rasters) do not stall it
    k = min(block, n - 1)
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, k))
    V -= V.mean(axis=0)
    V, _ = np.linalg.qr(V)
    lam = float(np.linalg.eigvalsh(V.T @ (L @ V))[0])
    prev_step = None
    for it in range(1, maxiter + 1):
        V, _ = np.linalg.qr(apply_pinv(V))
        theta, S = np.linalg.eigh(V.T @ (L @ V))
        V = V @ S
        new = float(theta[0])
        step = abs(new - lam)
        # the Ritz value converges geometrically; the remaining error is
        # about step * q / (1 - q) with q the observed contraction
        q = step / prev_step if prev_step else 0.0
        remaining = step * q / (1.0 - q) if q < 1.0 else math.inf
        roundoff = step <= 64 * np.finfo(float).eps * abs(new)
        if roundoff or (step <= tol * abs(new) and remaining <= tol * abs(new)):
            return new, it
        prev_step = step if step > 0 else prev_step
        lam = new
    v = V[:, 0]
    resid = float(np.linalg.norm(L @ v - lam * v))
    raise ConvergenceError(f"inverse iteration did not converge in {maxiter} steps", resid)


def reference_lattice(domain, resolution=100):
    """Square lattice covering a disc/annulus with ``resolution`` cells per outer radius."""
    R = domain.radius if isinstance(domain, Disc) else domain.outer
    h = R / resolution
    n = 2 * resolution + 4
    c = domain.center
    o = -(n - 1) / 2 * h
    return Lattice(c.real + o, c.imag + o, h, h, n, n)


def poincare_constant(domain, method="closed-form", c_annulus=None, resolution=100):
    """``C_poinc(2, D)``.

    Parameters
    ----------
    domain : Disc, Annulus or Raster
    method : {"closed-form", "eigensolve"}
        ``closed-form`` gives ``diam/pi`` for discs and ``c * s`` for annuli
        (``c`` from the calibration table); ``eigensolve`` returns
        ``1/sqrt(lambda_2)`` of the Neumann Laplacian on the raster.
    c_annulus : float, optional
        Override of the calibrated annulus constant.
    resolution : int
        Cells per outer radius when a disc/annulus is rasterized.
    """
    if method == "closed-form":
        if isinstance(domain, Disc):
            return 2.0 * domain.radius / math.pi
        if isinstance(domain, Annulus):
            if c_annulus is None:
                from .calibration import load_calibration

                c_annulus = load_calibration()["annulus_poincare_c"]
            return c_annulus * domain.outer
        raise ValueError("no closed form for raster domains; use method='eigensolve'")
    if method != "eigensolve":
        raise ValueError(f"unknown method {method!r}")
    if isinstance(domain, Raster):
        mask = domain.mask
    else:
        mask = rasterize(domain, reference_lattice(domain, resolution))
    lam, _ = neumann_lambda2(mask)
    return 1.0 / math.sqrt(lam)


def analytic_poincare_bound(C_poinc, area, dist_z0, p=2.0):
    """``C_poinc * (1 + (area / (pi dist^2))^(1/p))``."""
    if not (C_poinc > 0 and area > 0 and dist_z0 > 0 and p >= 1):
        raise ValueError("analytic_poincare_bound needs positive inputs and p >= 1")
    return C_poinc * (1.0 + (area / (math.pi * dist_z0**2)) ** (1.0 / p))
