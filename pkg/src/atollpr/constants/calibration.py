"""Calibration of the trace function ``rho`` and the annulus Poincare constant.

Run ``python3 -m atollpr.constants.calibration [--out PATH]`` to regenerate
the shipped table.  Each reference annulus ``B_{tau,1}`` is rasterized so its
width spans at least ``MIN_WIDTH_CELLS`` cells; ``rho(tau)`` is the discrete
Rayleigh trace constant and ``h(tau) = 1/sqrt(lambda_2)`` the Neumann
Poincare constant.  Both are inflated by ``MARGIN`` to absorb
discretization error.
"""

from __future__ import annotations

import argparse
import functools
import json
import math
from importlib import resources

import numpy as np

from ..grid import Annulus, Disc, rasterize

VERSION = "calibration-v1"
TAUS = [round(0.05 * k, 2) for k in range(20)]  # 0.0 ... 0.95
MIN_WIDTH_CELLS = 24
BASE_RESOLUTION = 100
MARGIN = 1.02
# thin-annulus limit of the Neumann Poincare constant of B_{tau,1}
THIN_LIMIT = 1.0


def _domain(tau):
    return Disc(0j, 1.0) if tau == 0 else Annulus(0j, tau, 1.0)


def resolution_for(tau):
    return max(BASE_RESOLUTION, int(math.ceil(MIN_WIDTH_CELLS / (1.0 - tau))))


def calibrate(taus=TAUS, verbose=False):
    from .poincare import neumann_lambda2, reference_lattice
    from .trace import trace_rayleigh

    rho_vals, poinc_vals, res_used = [], [], []
    for tau in taus:
        dom = _domain(tau)
        res = resolution_for(tau)
        mask = rasterize(dom, reference_lattice(dom, res))
        kappa = trace_rayleigh(mask)
        lam, _ = neumann_lambda2(mask)
        h = 1.0 / math.sqrt(lam)
        rho_vals.append(kappa)
        poinc_vals.append(h)
        res_used.append(res)
        if verbose:
            print(f"tau={tau:.2f} res={res} rho={kappa:.6f} h={h:.6f}")
    c_ann = MARGIN * max(max(poinc_vals), THIN_LIMIT)
    return {
        "version": VERSION,
        "margin": MARGIN,
        "rho": {"tau": list(taus), "value": [MARGIN * v for v in rho_vals], "raw": rho_vals},
        "annulus_poincare": {"tau": list(taus), "raw": poinc_vals},
        "annulus_poincare_c": c_ann,
        "resolution": res_used,
    }


@functools.lru_cache(maxsize=None)
def _load_default():
    text = resources.files("atollpr.constants").joinpath("data/calibration_v1.json").read_text()
    return json.loads(text)


def load_calibration(path=None):
    if path is None:
        return _load_default()
    with open(path) as fh:
        return json.load(fh)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None, help="output JSON (default: print)")
    args = ap.parse_args(argv)
    table = calibrate(verbose=True)
    text = json.dumps(table, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


if __name__ == "__main__":
    main()
