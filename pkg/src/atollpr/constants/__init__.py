"""Poincare, trace, boundary and sampling constants, and certificate assembly."""

from .calibration import VERSION as CALIBRATION_VERSION
from .calibration import load_calibration
from .certificate import (
    StabilityCertificate,
    a_priori_certificate,
    assemble_certificate,
    boundary_constant,
    combine,
    hyperbolic_area,
    select_z0,
    var_eta,
)
from .poincare import (
    ConvergenceError,
    analytic_poincare_bound,
    neumann_lambda2,
    neumann_laplacian,
    poincare_constant,
)
from .trace import ThinAnnulusError, rho, trace_constant, trace_rayleigh

__all__ = [
    "CALIBRATION_VERSION",
    "load_calibration",
    "StabilityCertificate",
    "a_priori_certificate",
    "assemble_certificate",
    "boundary_constant",
    "combine",
    "hyperbolic_area",
    "select_z0",
    "var_eta",
    "ConvergenceError",
    "analytic_poincare_bound",
    "neumann_lambda2",
    "neumann_laplacian",
    "poincare_constant",
    "ThinAnnulusError",
    "rho",
    "trace_constant",
    "trace_rayleigh",
]
