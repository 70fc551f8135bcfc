"""Stability certificates for atoll components.

The certificate constant is

    C = c * (Ca + Cs + sum_i Cb_i * var_i * Ct * (Ca + Cs))

with ``Ca`` the analytic Poincare constant of ``D_plus`` at the chosen base
point, ``Cs`` the sampling constant there, ``Ct`` the trace constant of
``D_plus`` and, per lagoon, ``Cb_i`` its boundary-domination constant and
``var_i`` the oscillation of ``|eta|`` over it.  ``c`` is a uniform
multiplier kept explicit (default 1).  The bound on the aligned distance is
``C * Delta^2 / delta^2`` times the ``W^{1,p}`` magnitude discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..analytic import CauchyNormalizer, GaborNormalizer, IdentityNormalizer
from ..grid import (
    Annulus,
    Disc,
    DomainMask,
    Raster,
    TFGrid,
    boundary_cells,
    distance_transform,
    lp_norm,
)
from .calibration import VERSION as CALIBRATION_VERSION
from .poincare import analytic_poincare_bound, poincare_constant
from .trace import trace_constant

__all__ = [
    "StabilityCertificate",
    "select_z0",
    "boundary_constant",
    "var_eta",
    "hyperbolic_area",
    "assemble_certificate",
    "a_priori_certificate",
    "combine",
]


@dataclass(frozen=True)
class StabilityCertificate:
    component_id: int
    p: float
    z0: complex
    dist_z0: float
    C_samp: float
    C_poinc_classical: float
    C_poinc_analytic: float
    C_trace: float
    C_bound: list
    var_eta: list
    c_uniform: float
    C_total: float
    delta: float
    Delta: float
    bound_value: float
    provenance: dict = field(default_factory=dict)
    calibration_version: str = CALIBRATION_VERSION

    def recompute_total(self):
        return combine(
            self.C_poinc_analytic, self.C_samp, self.C_trace, self.C_bound, self.var_eta, self.c_uniform
        )

    def to_dict(self):
        d = asdict(self)
        d["z0"] = [self.z0.real, self.z0.imag]
        return d


def combine(Ca, Cs, Ct, Cb, var, c=1.0):
    """Evaluate the certificate constant from its parts."""
    base = Ca + Cs
    lagoon = sum(b * v for b, v in zip(Cb, var)) * Ct * base
    return c * (base + lagoon)


# ----------------------------------------------------------------------------
# Constituents


def select_z0(G: TFGrid, mask: DomainMask, t=0.5, p=2.0):
    """Base point with small sampling constant and large boundary distance.

    Among cells with ``|G(z)| |D|^(1/p) <= (1-t)^(-1/p) ||G||_p`` the one
    deepest inside ``mask`` is chosen.

    Returns
    -------
    z0 : complex
    C_samp : float
        Realized ``|G(z0)| |D|^(1/p) / ||G||_p`` (0 if ``G`` vanishes).
    dist : float
        Distance of ``z0`` to the boundary of ``mask``.
    """
    if mask.is_empty():
        raise ValueError("select_z0 on an empty mask")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    depth = distance_transform(mask).values
    z = mask.lattice.z()
    g = np.abs(G.values)
    norm = lp_norm(G, mask, p)
    if norm == 0:
        k = np.argmax(np.where(mask.cells, depth, -1.0))
        return complex(z.flat[k]), 0.0, float(depth.flat[k])
    area_p = mask.area ** (1.0 / p) if not math.isinf(p) else 1.0
    C = (1.0 - t) ** (-1.0 / p) if not math.isinf(p) else 1.0
    ok = mask.cells & (g * area_p <= C * norm)
    if ok.any():
        k = np.argmax(np.where(ok, depth, -1.0))
    else:
        k = np.argmin(np.where(mask.cells, g, np.inf))
    return complex(z.flat[k]), float(g.flat[k] * area_p / norm), float(depth.flat[k])


def boundary_constant(domain, p=2.0):
    """``r^(1/p)`` for a disc; rasters use an enclosing disc."""
    if isinstance(domain, Disc):
        r = domain.radius
    elif isinstance(domain, Raster):
        r = _enclosing_radius(domain.mask)
    else:
        raise TypeError("boundary constant is defined for simply connected lagoons")
    return r ** (1.0 / p)


def _enclosing_radius(mask):
    pts = mask.points()
    c = pts.mean()
    lat = mask.lattice
    return float(np.abs(pts - c).max() + 0.5 * math.hypot(lat.dx, lat.dy))


def var_eta(eta, lagoon):
    """``max_{boundary}|eta| / min_{lagoon}|eta|``.

    Closed forms for discs (Gabor and Cauchy normalizers); raster lagoons are
    scanned cell by cell.
    """
    if eta is None or isinstance(eta, IdentityNormalizer):
        return 1.0
    if isinstance(lagoon, Disc):
        c, r = lagoon.center, lagoon.radius
        if isinstance(eta, GaborNormalizer):
            d = abs(c - eta.z0)
            return math.exp(math.pi * ((d + r) ** 2 - max(0.0, d - r) ** 2) / 2)
        if isinstance(eta, CauchyNormalizer):
            y = c.imag
            if y - r <= 0:
                raise ValueError("Cauchy lagoon must lie strictly above y = 0")
            return ((y + r) / (y - r)) ** (eta.order + 0.5)
        raise TypeError(f"unknown normalizer {eta!r}")
    if isinstance(lagoon, Raster):
        mask = lagoon.mask
        z = mask.lattice.z()
        if isinstance(eta, CauchyNormalizer) and np.any(z[mask.cells].imag <= 0):
            raise ValueError("Cauchy lagoon must lie strictly above y = 0")
        mod = eta.modulus(z[mask.cells])
        bmod = eta.modulus(z[boundary_cells(mask)])
        return float(bmod.max() / mod.min())
    raise TypeError(f"unsupported lagoon {lagoon!r}")


def hyperbolic_area(disc: Disc, quadrature=False, n=1000):
    """Hyperbolic area ``int dx dy / y^2`` of a disc in the upper half-plane.

    With ``quadrature=True`` the integral is evaluated by an ``n x n`` polar
    midpoint rule instead of the closed form.
    """
    y, r = disc.center.imag, disc.radius
    if y <= r:
        raise ValueError("disc must lie strictly inside the upper half-plane")
    if not quadrature:
        return 2 * math.pi * (1.0 / math.sqrt(1.0 - (r / y) ** 2) - 1.0)
    rho = (np.arange(n) + 0.5) * r / n
    phi = (np.arange(n) + 0.5) * 2 * math.pi / n
    P, PH = np.meshgrid(rho, phi)
    integrand = P / (y + P * np.sin(PH)) ** 2
    return float(integrand.sum() * (r / n) * (2 * math.pi / n))


# ----------------------------------------------------------------------------
# Assembly


def _lagoon_normalizer(eta, lagoon, recenter):
    if isinstance(eta, GaborNormalizer) and recenter:
        if isinstance(lagoon, Disc):
            return GaborNormalizer(lagoon.center)
        return GaborNormalizer(complex(lagoon.mask.points().mean()))
    return eta


def _classical_poincare(shape, method, mask, c_annulus):
    if method == "auto":
        method = "eigensolve" if isinstance(shape, Raster) else "closed-form"
    if method == "eigensolve":
        dom = shape if isinstance(shape, Raster) else Raster(mask)
        return poincare_constant(dom, "eigensolve"), "eigensolve"
    tag = "closed-form" if isinstance(shape, Disc) else "bound"
    return poincare_constant(shape, "closed-form", c_annulus=c_annulus), tag


def _trace(shape, mask):
    if isinstance(shape, Raster):
        return trace_constant(shape), "eigensolve"
    return trace_constant(shape), "bound"


def _lagoon_terms(lagoons, eta, p, recenter):
    Cb, var, tags = [], [], []
    for lg in lagoons:
        Cb.append(boundary_constant(lg, p))
        var.append(var_eta(_lagoon_normalizer(eta, lg, recenter), lg))
        tags.append("closed-form" if isinstance(lg, Disc) else "bound")
    return Cb, var, tags


def assemble_certificate(
    component,
    eta=None,
    G: TFGrid | None = None,
    p=2.0,
    t=0.5,
    c_uniform=1.0,
    component_id=0,
    poincare_method="auto",
    recenter=True,
    c_annulus=None,
):
    """Evaluate every constant for one atoll component.

    Parameters
    ----------
    component : AtollComponent
        Its ``shape`` decides between closed forms (disc/annulus fits) and
        raster eigensolves.
    eta : normalizer or None
        With ``recenter`` a Gabor normalizer is re-based at each lagoon's
        centre, the choice that minimizes its oscillation there.
    G : TFGrid, optional
        Magnitude difference ``||F1| - |F2||`` used to pick ``z0``; ``None``
        means zero (a priori certificate).
    poincare_method : {"auto", "closed-form", "eigensolve"}
    """
    Dp = component.D_plus
    shape = component.shape if component.shape is not None else Raster(Dp)
    if G is None:
        G = TFGrid(Dp.lattice, np.zeros(Dp.lattice.shape))
    if p != 2 and (isinstance(shape, Raster) or poincare_method == "eigensolve"):
        raise ValueError("raster certificates are only available for p = 2")

    z0, Cs, dist = select_z0(G, Dp, t, p)
    lat = Dp.lattice
    dist = max(dist, 0.5 * min(lat.dx, lat.dy))
    Cp, tag_p = _classical_poincare(shape, poincare_method, Dp, c_annulus)
    Ca = analytic_poincare_bound(Cp, Dp.area, dist, p)
    Ct, tag_t = _trace(shape, Dp)

    if isinstance(shape, Annulus) and len(component.lagoons) == 1:
        lagoon_shapes = [Disc(shape.center, shape.inner)] if shape.inner > 0 else [Raster(component.lagoons[0])]
    else:
        lagoon_shapes = list(component.lagoon_shapes) or [Raster(lg) for lg in component.lagoons]
    Cb, var, tags = _lagoon_terms(lagoon_shapes, eta, p, recenter)

    C_total = combine(Ca, Cs, Ct, Cb, var, c_uniform)
    return StabilityCertificate(
        component_id=component_id,
        p=float(p),
        z0=z0,
        dist_z0=dist,
        C_samp=Cs,
        C_poinc_classical=Cp,
        C_poinc_analytic=Ca,
        C_trace=Ct,
        C_bound=Cb,
        var_eta=var,
        c_uniform=float(c_uniform),
        C_total=C_total,
        delta=component.delta,
        Delta=component.Delta,
        bound_value=C_total * component.Delta**2 / component.delta**2,
        provenance={
            "C_samp": "measured",
            "C_poinc_classical": tag_p,
            "C_poinc_analytic": "bound",
            "C_trace": tag_t,
            "C_bound": tags,
            "var_eta": ["closed-form" if isinstance(s, Disc) else "measured" for s in lagoon_shapes],
        },
    )


def a_priori_certificate(shape, eta=None, delta=1.0, Delta=1.0, p=2.0, c_uniform=1.0, recenter=True):
    """Certificate for an exact disc or annulus with ``z0`` at maximal depth.

    The sampling constant is taken as 0 (vanishing magnitude difference) and
    the base point sits at the centre of a disc or on the mid-radius circle
    of an annulus, so ``dist(z0)`` is ``r`` resp. ``(s - r)/2``.
    """
    if isinstance(shape, Disc):
        z0, dist, area, lagoons = shape.center, shape.radius, math.pi * shape.radius**2, []
    elif isinstance(shape, Annulus):
        z0 = shape.center + (shape.inner + shape.outer) / 2
        dist = (shape.outer - shape.inner) / 2
        area = math.pi * (shape.outer**2 - shape.inner**2)
        lagoons = [Disc(shape.center, shape.inner)] if shape.inner > 0 else []
    else:
        raise TypeError("a priori certificates need a disc or an annulus")
    Cp = poincare_constant(shape, "closed-form")
    Ca = analytic_poincare_bound(Cp, area, dist, p)
    Ct = trace_constant(shape)
    Cb, var, tags = _lagoon_terms(lagoons, eta, p, recenter)
    C_total = combine(Ca, 0.0, Ct, Cb, var, c_uniform)
    return StabilityCertificate(
        component_id=0,
        p=float(p),
        z0=complex(z0),
        dist_z0=dist,
        C_samp=0.0,
        C_poinc_classical=Cp,
        C_poinc_analytic=Ca,
        C_trace=Ct,
        C_bound=Cb,
        var_eta=var,
        c_uniform=float(c_uniform),
        C_total=C_total,
        delta=float(delta),
        Delta=float(Delta),
        bound_value=C_total * Delta**2 / delta**2,
        provenance={
            "C_samp": "measured",
            "C_poinc_classical": "closed-form" if isinstance(shape, Disc) else "bound",
            "C_poinc_analytic": "bound",
            "C_trace": "bound",
            "C_bound": tags,
            "var_eta": ["closed-form"] * len(lagoons),
        },
    )
