"""Segmentation of magnitude grids into atoll components.

An atoll component is a 4-connected region ``D_plus`` on which the magnitude
stays above a threshold, together with the bounded holes it encloses (the
lagoons).  ``D`` is the union of both.  Besides segmentation this module
measures the boundary-depth quantile ``s_t``, the energy outside a region,
and fits discs or annuli to components so closed-form constants can be used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from skimage import measure

from .grid import (
    CROSS,
    Annulus,
    Disc,
    DomainMask,
    Lattice,
    Raster,
    TFGrid,
    distance_transform,
    grad_magnitude,
    lp_norm,
)

__all__ = [
    "AtollComponent",
    "AtollDecomposition",
    "segment",
    "s_t",
    "concentration",
    "fit_param_domain",
    "fit_lagoon",
    "circle_fit",
]

DEFAULT_MIN_CELLS = 9
FIT_TOLERANCE = 0.10


@dataclass(eq=False)
class AtollComponent:
    """One atoll: full domain ``D``, its lagoons and ``D_plus = D - lagoons``.

    ``delta`` is the measured minimum of ``|F|`` on ``D_plus`` and ``Delta``
    the measured maximum of ``|F|`` and ``|grad |F||`` on ``D``.  ``parent``
    is the index of the component whose lagoon contains this one, if any.
    """

    D: DomainMask
    lagoons: list
    D_plus: DomainMask
    delta: float
    Delta: float
    parent: int | None = None
    shape: object = None
    fit_residual: float | None = None
    lagoon_shapes: list = field(default_factory=list)

    @property
    def lattice(self):
        return self.D.lattice

    def to_dict(self, mask_refs=None):
        out = {
            "delta": self.delta,
            "Delta": self.Delta,
            "area": self.D.area,
            "area_plus": self.D_plus.area,
            "n_lagoons": len(self.lagoons),
            "lagoon_areas": [lg.area for lg in self.lagoons],
            "parent": self.parent,
            "shape": _shape_dict(self.shape),
            "fit_residual": self.fit_residual,
            "lagoon_shapes": [_shape_dict(s) for s in self.lagoon_shapes],
        }
        if mask_refs is not None:
            out["masks"] = mask_refs
        return out


@dataclass(eq=False)
class AtollDecomposition:
    components: list
    lattice: Lattice
    threshold: float

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def union(self, plus=False):
        cells = np.zeros(self.lattice.shape, bool)
        for c in self.components:
            cells |= (c.D_plus if plus else c.D).cells
        return DomainMask(self.lattice, cells)

    def labels(self):
        """Integer label grid: 0 outside, ``j+1`` on component ``j``'s ``D``.

        Nested components overwrite their parent's lagoon cells.
        """
        lab = np.zeros(self.lattice.shape, int)
        order = sorted(range(len(self.components)), key=lambda j: self._depth(j))
        for j in order:
            lab[self.components[j].D.cells] = j + 1
        return lab

    def _depth(self, j):
        d = 0
        while self.components[j].parent is not None:
            j = self.components[j].parent
            d += 1
        return d

    def to_dict(self, mask_refs=None):
        comps = []
        for j, c in enumerate(self.components):
            comps.append(c.to_dict(None if mask_refs is None else mask_refs[j]))
        return {
            "lattice": self.lattice.to_header(),
            "threshold": self.threshold,
            "nested": [j for j, c in enumerate(self.components) if c.parent is not None],
            "components": comps,
        }


def _shape_dict(shape):
    if shape is None:
        return None
    if isinstance(shape, Disc):
        return {"kind": "disc", "center": [shape.center.real, shape.center.imag], "radius": shape.radius}
    if isinstance(shape, Annulus):
        return {
            "kind": "annulus",
            "center": [shape.center.real, shape.center.imag],
            "inner": shape.inner,
            "outer": shape.outer,
        }
    return {"kind": "raster"}


def segment(magnitude: TFGrid, delta: float, min_area: float | None = None, fit: bool = True):
    """Split the superlevel set ``{|F| >= delta}`` into atoll components.

    Parameters
    ----------
    magnitude : TFGrid
        Real, non-negative grid ``|F|``.
    delta : float
        Threshold; the reported ``delta`` of each component is the measured
        minimum on its ``D_plus`` and is therefore ``>= delta``.
    min_area : float, optional
        Components whose ``D`` is smaller are dropped.  Defaults to 9 cells.
    fit : bool
        Attach disc/annulus fits (``shape``) to each component.

    Returns
    -------
    AtollDecomposition
        Possibly empty.
    """
    if magnitude.is_complex:
        raise TypeError("segment expects a real magnitude grid")
    vals = magnitude.values
    if np.any(vals < 0):
        raise ValueError("magnitude must be non-negative")
    if not delta > 0:
        raise ValueError("delta must be positive")
    lat = magnitude.lattice
    if min_area is None:
        min_area = DEFAULT_MIN_CELLS * lat.cell_area
    gmag = grad_magnitude(magnitude).values

    labels, n = ndimage.label(vals >= delta, structure=CROSS)
    comps = []
    for k in range(1, n + 1):
        core = labels == k
        filled = ndimage.binary_fill_holes(core, structure=CROSS)
        if filled.sum() * lat.cell_area < min_area:
            continue
        hole_lab, nh = ndimage.label(filled & ~core, structure=CROSS)
        lagoons = []
        for h in range(1, nh + 1):
            lag = ndimage.binary_fill_holes(hole_lab == h, structure=CROSS)
            lagoons.append(DomainMask(lat, lag))
        comps.append(
            AtollComponent(
                D=DomainMask(lat, filled),
                lagoons=lagoons,
                D_plus=DomainMask(lat, core),
                delta=float(vals[core].min()),
                Delta=float(max(vals[filled].max(), gmag[filled].max())),
            )
        )

    # nesting: a component lying inside another's lagoon
    for i, ci in enumerate(comps):
        best = None
        for j, cj in enumerate(comps):
            if i == j:
                continue
            if any(np.all(lg.cells[ci.D.cells]) for lg in cj.lagoons):
                if best is None or comps[best].D.count > cj.D.count:
                    best = j
        ci.parent = best

    if fit:
        for c in comps:
            c.shape, c.fit_residual = fit_param_domain(c, return_residual=True)
            c.lagoon_shapes = [fit_lagoon(lg) for lg in c.lagoons]
    return AtollDecomposition(comps, lat, float(delta))


def s_t(mask: DomainMask, t: float) -> float:
    """Boundary-depth quantile ``inf_{|S| = t|D|} sup_{z in S} dist(z, dD)``.

    The infimum is attained by the ``ceil(t n)`` cells closest to the
    boundary, so the value is the ``ceil(t n)``-th smallest distance.
    """
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    if mask.is_empty():
        raise ValueError("s_t of an empty mask")
    d = np.sort(distance_transform(mask).values[mask.cells])
    k = max(1, math.ceil(t * d.size - 1e-9))
    return float(d[k - 1])


def concentration(F: TFGrid, mask: DomainMask) -> float:
    """``L^2`` norm of ``F`` outside ``mask`` (the lattice stands in for R^2)."""
    return lp_norm(F, ~mask, 2)


# ----------------------------------------------------------------------------
# Geometric fits


def _contour_points(cells, lat):
    padded = ndimage.gaussian_filter(np.pad(cells.astype(float), 2), 1.0, mode="constant")
    contours = measure.find_contours(padded, 0.5)
    if not contours:
        contours = measure.find_contours(np.pad(cells.astype(float), 2), 0.5)
    if not contours:
        return np.zeros(0, complex)
    c = max(contours, key=len) - 2.0
    return (lat.origin_x + c[:, 1] * lat.dx) + 1j * (lat.origin_y + c[:, 0] * lat.dy)


def circle_fit(points):
    """Algebraic least-squares circle ``(center, radius, max_rel_residual)``."""
    x, y = points.real, points.imag
    A = np.column_stack([2 * x, 2 * y, np.ones_like(x)])
    b = x**2 + y**2
    (cx, cy, k), *_ = np.linalg.lstsq(A, b, rcond=None)
    r = math.sqrt(max(k + cx**2 + cy**2, 0.0))
    c = complex(cx, cy)
    res = np.max(np.abs(np.abs(points - c) - r)) / r if r > 0 else math.inf
    return c, r, float(res)


def _concentric_fit(outer, inner):
    pts = np.concatenate([outer, inner])
    x, y = pts.real, pts.imag
    is_out = np.r_[np.ones(outer.size), np.zeros(inner.size)]
    A = np.column_stack([2 * x, 2 * y, is_out, 1 - is_out])
    b = x**2 + y**2
    (cx, cy, ko, ki), *_ = np.linalg.lstsq(A, b, rcond=None)
    c = complex(cx, cy)
    R = math.sqrt(max(ko + abs(c) ** 2, 0.0))
    r = math.sqrt(max(ki + abs(c) ** 2, 0.0))
    res_o = np.max(np.abs(np.abs(outer - c) - R)) / R if R > 0 else math.inf
    res_i = np.max(np.abs(np.abs(inner - c) - r)) / r if r > 0 else math.inf
    return c, r, R, float(max(res_o, res_i))


def fit_param_domain(component: AtollComponent, return_residual=False):
    """Disc or annulus describing ``component.D_plus``; Raster if neither fits.

    A disc is fitted to the outer boundary when there are no lagoons, a
    concentric annulus when there is exactly one.  The fit is rejected when
    the largest boundary deviation exceeds 10% of the fitted radius.
    """
    lat = component.lattice
    outer = _contour_points(component.D.cells, lat)
    shape, res = Raster(component.D_plus), math.inf
    if outer.size >= 3 and len(component.lagoons) == 0:
        c, r, res = circle_fit(outer)
        if res <= FIT_TOLERANCE and r > 0:
            shape = Disc(c, r)
    elif outer.size >= 3 and len(component.lagoons) == 1:
        inner = _contour_points(component.lagoons[0].cells, lat)
        if inner.size >= 3:
            c, r, R, res = _concentric_fit(outer, inner)
            if res <= FIT_TOLERANCE and 0 < r < R:
                shape = Annulus(c, r, R)
    if not isinstance(shape, Raster) and _area_mismatch(shape, component.D_plus) > FIT_TOLERANCE:
        shape = Raster(component.D_plus)
    if return_residual:
        return shape, (None if math.isinf(res) else res)
    return shape


def _area_mismatch(shape, mask):
    if isinstance(shape, Disc):
        a = math.pi * shape.radius**2
    else:
        a = math.pi * (shape.outer**2 - shape.inner**2)
    return abs(a - mask.area) / a


def fit_lagoon(mask: DomainMask):
    """Disc fit for a lagoon, or Raster when the circle fit is poor."""
    pts = _contour_points(mask.cells, mask.lattice)
    if pts.size >= 3:
        c, r, res = circle_fit(pts)
        if res <= FIT_TOLERANCE and r > 0:
            return Disc(c, r)
    return Raster(mask)
