"""Small input checks shared by the estimators and the CLI."""

import math

import numpy as np

from .grid import DomainMask, TFGrid, _check_same


def check_grid(obj, name="grid", real=None):
    if not isinstance(obj, TFGrid):
        raise TypeError(f"{name} must be a TFGrid, got {type(obj).__name__}")
    if real is True and obj.is_complex:
        raise TypeError(f"{name} must be real-valued")
    return obj


def check_magnitude(obj, name="magnitude"):
    """Real non-negative grid; complex grids are replaced by their modulus."""
    check_grid(obj, name)
    g = obj.abs() if obj.is_complex else obj
    if np.any(g.values < 0):
        raise ValueError(f"{name} must be non-negative")
    return g


def check_same_lattice(*objs):
    lat = objs[0].lattice
    for o in objs[1:]:
        _check_same(lat, o.lattice)
    return lat


def check_mask(obj, name="mask", nonempty=True):
    if not isinstance(obj, DomainMask):
        raise TypeError(f"{name} must be a DomainMask")
    if nonempty and obj.is_empty():
        raise ValueError(f"{name} is empty")
    return obj


def check_positive(x, name, allow_inf=False):
    x = float(x)
    if not (x > 0) or (math.isinf(x) and not allow_inf) or math.isnan(x):
        raise ValueError(f"{name} must be positive, got {x}")
    return x


def check_fraction(x, name):
    x = float(x)
    if not 0 < x < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {x}")
    return x


def check_p(p):
    p = float(p)
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    return p
