"""Estimator-style wrappers (``fit`` / ``transform`` / ``predict``).

They follow the scikit-learn conventions: hyper-parameters are stored
verbatim by ``__init__``, learned state gets a trailing underscore, and
``get_params`` / ``set_params`` come from :class:`BaseEstimator`.  Inputs are
grids and signals rather than 2-D feature matrices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import _validation as val
from .alignment import align_decomposition
from .analytic import CauchyNormalizer, GaborNormalizer
from .atoll import segment
from .constants import assemble_certificate
from .grid import Lattice
from .retrieval import retrieve
from .transforms import GaborSpec, Signal, gabor_forward, gabor_inverse

__all__ = [
    "GaborTransformer",
    "AtollSegmenter",
    "StabilityCertifier",
    "GaborPhaseRetriever",
    "ComponentPhaseAligner",
    "make_normalizer",
]


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet")


def make_normalizer(eta, order=1):
    if eta in (None, "none"):
        return None
    if eta == "gabor":
        return GaborNormalizer()
    if eta == "cauchy":
        return CauchyNormalizer(int(order))
    raise ValueError(f"unknown normalizer {eta!r}")


class GaborTransformer(TransformerMixin, BaseEstimator):
    """Gabor transform on a fixed lattice."""

    def __init__(self, x_range=(-4.0, 4.0), y_range=(-4.0, 4.0), dx=0.25, dy=0.25, periodic=False):
        self.x_range = x_range
        self.y_range = y_range
        self.dx = dx
        self.dy = dy
        self.periodic = periodic

    def fit(self, X: Signal, y=None):
        self.lattice_ = GaborSpec(tuple(self.x_range), tuple(self.y_range), self.dx, self.dy).lattice
        self.sample_rate_ = X.sample_rate
        return self

    def transform(self, X: Signal):
        _check_fitted(self, "lattice_")
        return gabor_forward(X, self.lattice_, periodic=self.periodic)

    def inverse_transform(self, F, t0=None, n=None):
        _check_fitted(self, "lattice_")
        return gabor_inverse(F, self.sample_rate_, t0=t0, n=n, periodic=self.periodic)


class AtollSegmenter(BaseEstimator):
    """Threshold segmentation into atoll components.

    ``delta`` is absolute unless ``relative`` is set, in which case it is a
    fraction of ``max |F|``.
    """

    def __init__(self, delta=0.1, relative=True, min_area=None, fit_shapes=True):
        self.delta = delta
        self.relative = relative
        self.min_area = min_area
        self.fit_shapes = fit_shapes

    def fit(self, X, y=None):
        A = val.check_magnitude(X)
        d = val.check_positive(self.delta, "delta")
        thr = d * float(A.values.max()) if self.relative else d
        if thr <= 0:
            raise ValueError("magnitude vanishes; nothing to segment")
        self.decomposition_ = segment(A, thr, self.min_area, fit=self.fit_shapes)
        self.threshold_ = thr
        return self

    def predict(self, X=None):
        """Integer label grid (0 = background)."""
        _check_fitted(self, "decomposition_")
        return self.decomposition_.labels()


class StabilityCertifier(BaseEstimator):
    """Assemble one certificate per component of a decomposition."""

    def __init__(self, eta="gabor", order=1, p=2.0, t=0.5, c_uniform=1.0, poincare_method="auto"):
        self.eta = eta
        self.order = order
        self.p = p
        self.t = t
        self.c_uniform = c_uniform
        self.poincare_method = poincare_method

    def fit(self, X, y=None, G=None):
        """``X`` is an :class:`AtollDecomposition`; ``G`` an optional magnitude difference."""
        val.check_p(self.p)
        val.check_fraction(self.t, "t")
        val.check_positive(self.c_uniform, "c_uniform")
        eta = make_normalizer(self.eta, self.order)
        self.certificates_ = [
            assemble_certificate(
                comp, eta, G, self.p, self.t, self.c_uniform, component_id=j,
                poincare_method=self.poincare_method,
            )
            for j, comp in enumerate(X.components)
        ]
        return self

    def predict(self, X=None):
        """Bound values ``C * Delta^2 / delta^2`` per component."""
        _check_fitted(self, "certificates_")
        return np.array([c.bound_value for c in self.certificates_])


class GaborPhaseRetriever(BaseEstimator):
    """Alternating-projection retrieval from a periodic-lattice magnitude."""

    def __init__(self, iters=500, seed=0, floor=1e-2):
        self.iters = iters
        self.seed = seed
        self.floor = floor

    def fit(self, X, y=None, truth=None):
        A = val.check_magnitude(X)
        self.result_ = retrieve(A, iters=int(self.iters), seed=int(self.seed), truth=truth, floor=self.floor)
        return self

    def predict(self, X=None):
        _check_fitted(self, "result_")
        return self.result_.f_rec

    def transform(self, X=None):
        _check_fitted(self, "result_")
        return self.result_.F_rec


class ComponentPhaseAligner(BaseEstimator):
    """Per-component optimal phases of ``G`` against ``F``."""

    def fit(self, X, y, decomposition=None):
        if decomposition is None:
            raise ValueError("ComponentPhaseAligner.fit needs a decomposition")
        val.check_same_lattice(X, y)
        self.report_ = align_decomposition(X, y, decomposition)
        return self

    def predict(self, X=None):
        _check_fitted(self, "report_")
        return np.asarray(self.report_.alphas)


def lattice_from_args(x_range, y_range, dx, dy) -> Lattice:
    return GaborSpec(tuple(x_range), tuple(y_range), dx, dy).lattice
