"""Phase retrieval from time-frequency magnitudes, up to component-wise phase.

Submodules
----------
grid        lattices, grids, masks, discrete norms and boundary geometry
tfg         TFG binary grid format
transforms  Gabor and Cauchy wavelet transforms
analytic    holomorphic normalizers and holomorphy checks
atoll       atoll segmentation and geometric fits
constants   Poincare / trace / boundary constants and certificates
alignment   global and component-wise phase alignment
retrieval   alternating-projection retrieval and phase diagnosis
audio       WAV I/O and phase-shift constructions
estimators  fit/transform/predict wrappers
"""

from .grid import Annulus, Disc, DomainMask, Lattice, Raster, TFGrid
from .transforms import CauchySpec, GaborSpec, Signal

__version__ = "0.1.0"

__all__ = [
    "Annulus",
    "Disc",
    "DomainMask",
    "Lattice",
    "Raster",
    "TFGrid",
    "CauchySpec",
    "GaborSpec",
    "Signal",
    "__version__",
]
