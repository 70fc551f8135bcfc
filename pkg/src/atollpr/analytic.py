"""Holomorphic normalizers and holomorphy diagnostics.

A Gabor transform becomes an entire function after flipping ``y`` and
multiplying by a Bargmann-type factor; a Cauchy wavelet transform of an
analytic signal becomes holomorphic in the upper half-plane after
multiplication by ``|1/y|^(s+1/2)``.  The checks in this module measure how
well sampled grids satisfy the Cauchy-Riemann equations and the identity
``|F'| = |grad |F||`` for holomorphic ``F``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TFGrid, flip_y, gradient

__all__ = [
    "GaborNormalizer",
    "CauchyNormalizer",
    "IdentityNormalizer",
    "Normalizer",
    "normalize",
    "bargmann_grid",
    "cr_residual",
    "verify_key_lemma",
    "flip_y",
]


@dataclass(frozen=True)
class GaborNormalizer:
    """``eta(z) = exp(pi (|z - z0|^2 / 2 - i (x + x0)(y - y0)))``."""

    z0: complex = 0j

    def __call__(self, z):
        z = np.asarray(z, complex)
        x, y = z.real, z.imag
        x0, y0 = self.z0.real, self.z0.imag
        return np.exp(np.pi * (np.abs(z - self.z0) ** 2 / 2 - 1j * (x + x0) * (y - y0)))

    def modulus(self, z):
        return np.exp(np.pi * np.abs(np.asarray(z) - self.z0) ** 2 / 2)

    def to_dict(self):
        return {"kind": "gabor", "z0": [self.z0.real, self.z0.imag]}


@dataclass(frozen=True)
class CauchyNormalizer:
    """``eta(z) = |1/y|^(s + 1/2)``, defined for ``y != 0``."""

    order: int = 1

    def __call__(self, z):
        y = np.asarray(z, complex).imag
        if np.any(y == 0):
            raise ValueError("Cauchy normalizer is undefined on y = 0")
        return np.abs(1.0 / y) ** (self.order + 0.5) + 0j

    def modulus(self, z):
        return np.abs(self(z))

    def to_dict(self):
        return {"kind": "cauchy", "order": self.order}


@dataclass(frozen=True)
class IdentityNormalizer:
    def __call__(self, z):
        return np.ones_like(np.asarray(z, complex))

    def modulus(self, z):
        return np.ones(np.shape(z))

    def to_dict(self):
        return {"kind": "none"}


Normalizer = GaborNormalizer | CauchyNormalizer | IdentityNormalizer


def normalize(F: TFGrid, eta) -> TFGrid:
    """Pointwise product ``eta(z) F(z)``.

    For :class:`GaborNormalizer`, ``F`` must already be the y-flipped grid
    ``V f(x, -y)`` (see :func:`bargmann_grid`).
    """
    if eta is None or isinstance(eta, IdentityNormalizer):
        return F
    if isinstance(eta, CauchyNormalizer) and F.lattice.ys.min() <= 0:
        raise ValueError("Cauchy normalizer needs a lattice strictly above y = 0")
    return TFGrid(F.lattice, eta(F.lattice.z()) * F.values)


def bargmann_grid(V: TFGrid, z0: complex = 0j) -> TFGrid:
    """Entire function ``eta_z0(z) V f(x, -y)`` from a Gabor grid ``V f``."""
    return normalize(flip_y(V), GaborNormalizer(z0))


def _interior(a):
    return a[1:-1, 1:-1]


def cr_residual(G: TFGrid) -> float:
    """Dimensionless Cauchy-Riemann defect of a sampled complex field.

    ``max sqrt((u_x - v_y)^2 + (u_y + v_x)^2)`` over interior cells (central
    differences), divided by ``max |grad G|``.  The pointwise defect is
    ``2 |dG/dz_bar|``, so multiplying ``G`` by a unimodular constant leaves
    it unchanged.  Returns 0 for fields with vanishing gradient.
    """
    if G.lattice.nx < 3 or G.lattice.ny < 3:
        raise ValueError("cr_residual needs at least a 3x3 lattice")
    gx, gy = gradient(G)
    ux, vx = gx.values.real, gx.values.imag
    uy, vy = gy.values.real, gy.values.imag
    defect = _interior(np.hypot(ux - vy, uy + vx))
    scale = _interior(np.sqrt(ux**2 + vx**2 + uy**2 + vy**2)).max()
    if scale == 0:
        return 0.0
    return float(defect.max() / scale)


def verify_key_lemma(G: TFGrid, floor: float = 1e-3) -> float:
    """Relative defect in ``|G'| = |grad |G||`` for a holomorphic field.

    ``G' = u_x + i v_x`` and ``grad |G| = Re(conj(G) grad G) / |G|`` are formed
    from central differences.  The maximum of ``||G'| - |grad|G|||`` is taken
    over interior cells with ``|G| >= floor * max |G|`` (the modulus is not
    differentiable at zeros) and divided by ``max |G'|`` over the same cells.

    Raises
    ------
    ValueError
        If no interior cell clears the floor.
    """
    gx, gy = gradient(G)
    v = _interior(G.values)
    Gx, Gy = _interior(gx.values), _interior(gy.values)
    mod = np.abs(v)
    keep = mod >= floor * mod.max()
    keep &= mod > 0
    if not keep.any():
        raise ValueError("no cells above the floor")
    v, Gx, Gy, mod = v[keep], Gx[keep], Gy[keep], mod[keep]
    dmod_x = np.real(np.conj(v) * Gx) / mod
    dmod_y = np.real(np.conj(v) * Gy) / mod
    lhs = np.abs(Gx)
    rhs = np.hypot(dmod_x, dmod_y)
    scale = lhs.max()
    if scale == 0:
        return float(np.abs(rhs).max())
    return float(np.max(np.abs(lhs - rhs)) / scale)
