"""Command line interface: ``atollpr <subcommand> [options]``.

Every subcommand writes its artifacts into ``--out-dir``.  Errors are
reported on stderr as a single JSON line and give exit status 1 (2 for
usage errors).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import tfg
from .transforms import WINDOW_RADIUS

EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _pair(text):
    v = _floats(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError(f"expected two numbers 'a,b', got {text!r}")
    return tuple(v)


# ----------------------------------------------------------------------------
# helpers


def _out(args, name):
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _dump(obj, path):
    from .demos import dump_json

    return dump_json(obj, path)


def _threshold(A, args):
    if args.delta is not None:
        return float(args.delta)
    return float(args.rel_delta) * float(A.values.max())


def _read_grid(path):
    obj = tfg.read(path)
    if not hasattr(obj, "values"):
        raise ValueError(f"{path} holds a mask, expected a grid")
    return obj


def _mask_refs(dec, args):
    mdir = _out(args, "masks")
    os.makedirs(mdir, exist_ok=True)
    refs = []
    for j, c in enumerate(dec.components):
        r = {"D": f"masks/c{j}_D.tfg", "D_plus": f"masks/c{j}_Dplus.tfg", "lagoons": []}
        tfg.write(os.path.join(args.out_dir, r["D"]), c.D)
        tfg.write(os.path.join(args.out_dir, r["D_plus"]), c.D_plus)
        for i, lg in enumerate(c.lagoons):
            p = f"masks/c{j}_lagoon{i}.tfg"
            tfg.write(os.path.join(args.out_dir, p), lg)
            r["lagoons"].append(p)
        refs.append(r)
    return refs


def _segment(A, args):
    from .atoll import segment

    min_area = None if args.min_area is None else float(args.min_area)
    return segment(A, _threshold(A, args), min_area)


# ----------------------------------------------------------------------------
# subcommands


def cmd_transform(args):
    from .audio import AudioLattice, read_wav
    from .grid import TFGrid
    from .transforms import CauchySpec, GaborSpec, Signal, analytic_part, cauchy_forward, gabor_forward

    buf = read_wav(args.input)
    fs = buf.sample_rate_hz * args.time_scale
    sig = Signal(buf.samples, fs, 0.0)
    if args.analytic:
        sig = analytic_part(sig)
    if args.cauchy is not None:
        if args.y_range is None:
            raise ValueError("--cauchy needs --y-range with y > 0")
        xr = args.x_range or (0.0, buf.n / fs)
        spec = CauchySpec(args.cauchy, xr, args.y_range, args.dx, args.dy)
        F = cauchy_forward(sig, spec)
        kind = {"transform": "cauchy", "order": args.cauchy}
    elif args.x_range is None and args.y_range is None:
        lat = AudioLattice(args.time_scale, args.dx)
        op = lat.operator(buf)
        F = TFGrid(op.lattice, op.forward(sig.samples))
        kind = {"transform": "gabor", "periodic": True}
    else:
        T = buf.n / fs
        xr = args.x_range or (WINDOW_RADIUS, T - WINDOW_RADIUS)
        yr = args.y_range or (-fs / 2, fs / 2)
        F = gabor_forward(sig, GaborSpec(xr, yr, args.dx, args.dy))
        kind = {"transform": "gabor", "periodic": False}
    tfg.write(_out(args, "transform.tfg"), F)
    tfg.write(_out(args, "magnitude.tfg"), F.abs())
    info = dict(kind, lattice=F.lattice.to_header(), sample_rate=fs, time_scale=args.time_scale)
    _dump(info, _out(args, "transform.json"))
    return info


def cmd_segment(args):
    A = _read_grid(args.input).abs()
    dec = _segment(A, args)
    out = dec.to_dict(_mask_refs(dec, args))
    _dump(out, _out(args, "decomposition.json"))
    return {"n_components": len(dec)}


def cmd_certify(args):
    from .constants import assemble_certificate, load_calibration
    from .estimators import make_normalizer
    from .grid import TFGrid

    A = _read_grid(args.input).abs()
    G = None
    if args.other is not None:
        B = _read_grid(args.other).abs()
        G = TFGrid(A.lattice, np.abs(A.values - B.values))
    eta = make_normalizer(args.eta, args.order)
    if args.eta == "cauchy" and A.lattice.ys.min() <= 0:
        raise ValueError("Cauchy certificates need a lattice with y > 0")
    dec = _segment(A, args)
    certs = [
        assemble_certificate(c, eta, G, args.p, args.t, args.uniform_c, component_id=j).to_dict()
        for j, c in enumerate(dec.components)
    ]
    bundle = {
        "normalizer": None if eta is None else eta.to_dict(),
        "calibration_version": load_calibration()["version"],
        "certificates": certs,
        "decomposition": dec.to_dict(_mask_refs(dec, args)),
    }
    if not certs:
        bundle["warning"] = "empty decomposition"
        print(json.dumps({"warning": "empty decomposition"}), file=sys.stderr)
    _dump(bundle, _out(args, "certificates.json"))
    return {"n_certificates": len(certs)}


def cmd_align(args):
    from .alignment import align_decomposition

    F = _read_grid(args.input)
    G = _read_grid(args.other)
    dec = _segment(F.abs(), args)
    rep = align_decomposition(F, G, dec)
    _dump(rep.to_dict(), _out(args, "alignment.json"))
    with open(_out(args, "alignment.csv"), "w") as fh:
        fh.write(rep.to_csv())
    return {"n_components": len(dec)}


def cmd_scramble(args):
    from .alignment import scramble_phases

    F = _read_grid(args.input)
    dec = _segment(F.abs(), args)
    if args.alphas is not None:
        alphas = list(args.alphas)
    else:
        rng = np.random.default_rng(args.seed)
        alphas = list(rng.uniform(-math.pi, math.pi, len(dec)))
    G = scramble_phases(F, dec, alphas)
    tfg.write(_out(args, "scrambled.tfg"), G)
    _dump({"alphas": alphas, "decomposition": dec.to_dict(_mask_refs(dec, args))}, _out(args, "scramble.json"))
    return {"n_components": len(dec)}


def cmd_retrieve(args):
    from .audio import AudioBuffer, write_wav
    from .retrieval import retrieve

    A = _read_grid(args.input).abs()
    log_path = _out(args, "iterations.csv")
    with open(log_path, "w") as fh:
        fh.write("iter,residual\n")

        def stream(it, r):
            line = f"{it},{r!r}\n"
            fh.write(line)
            if args.stream:
                sys.stdout.write(line)

        res = retrieve(A, iters=args.iters, seed=args.seed, callback=stream)
    tfg.write(_out(args, "reconstruction.tfg"), res.F_rec)
    tfg.write(_out(args, "phase_map.tfg"), res.phase_map)
    rate = int(round(res.f_rec.sample_rate / args.time_scale))
    gain = write_wav(_out(args, "reconstruction.wav"), AudioBuffer(res.f_rec.samples.real, rate))
    out = dict(res.summary(), wav_sample_rate_hz=rate, wav_gain=gain, seed=args.seed)
    _dump(out, _out(args, "retrieval.json"))
    return out


def cmd_audio_shift(args):
    from .audio import (
        AudioLattice,
        magnitude_residual,
        phase_shift_components,
        phase_shift_global,
        read_wav,
        segment_audio,
        time_formula_discrepancy,
        write_wav,
    )

    f = read_wav(args.input)
    lat = AudioLattice(args.time_scale, args.dx)
    report = {"sample_rate_hz": f.sample_rate_hz}
    if args.alphas is not None:
        dec, _ = segment_audio(f, args.rel_delta, lat)
        if len(args.alphas) != len(dec):
            raise ValueError(f"{len(args.alphas)} phases given for {len(dec)} components")
        g = phase_shift_components(f, dec, args.alphas, lat)
        report.update(mode="components", alphas=list(args.alphas), n_components=len(dec))
    else:
        g = phase_shift_global(f, args.alpha)
        report.update(mode="global", alpha=args.alpha, time_formula=time_formula_discrepancy(f, args.alpha))
    report["magnitude_residual_rel"] = magnitude_residual(f, g, lat)
    report["waveform_change_rel"] = float(np.linalg.norm(g.samples - f.samples) / f.norm())
    report["energy_ratio"] = g.norm() / f.norm()
    report["output_gain"] = write_wav(_out(args, "shifted.wav"), g)
    _dump(report, _out(args, "audio_shift.json"))
    return report


def cmd_demo(args):
    from . import demos

    fn = {"instability": demos.demo_instability, "figure2": demos.demo_figure2, "audio": demos.demo_audio}
    return fn[args.scenario](args.out_dir, seed=args.seed)


# ----------------------------------------------------------------------------
# parser


def _add_threshold(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--delta", type=float, default=None, help="absolute threshold on |F|")
    g.add_argument("--rel-delta", type=float, default=0.1, help="threshold as a fraction of max|F| (default 0.1)")
    p.add_argument("--min-area", type=float, default=None, help="drop components smaller than this (default 9 cells)")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="BLAS/FFT thread limit (default: library default)")
    common.add_argument("--out-dir", default=".", help="directory for artifacts (default .)")

    ap = _Parser(prog="atollpr", description="Phase retrieval up to component-wise phase.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", parents=[common], help="Gabor or Cauchy transform of a WAV file")
    p.add_argument("input", help="mono WAV file")
    p.add_argument("--time-scale", type=float, default=0.025, help="seconds per window unit (default 0.025)")
    p.add_argument("--dx", type=float, default=0.25, help="time step in window units (default 0.25)")
    p.add_argument("--dy", type=float, default=0.25, help="frequency step (default 0.25; periodic mode uses 1/T)")
    p.add_argument("--x-range", type=_pair, default=None, help="'a,b' time range (default: periodic full lattice)")
    p.add_argument("--y-range", type=_pair, default=None, help="'a,b' frequency / scale range")
    p.add_argument("--analytic", action="store_true", help="transform the analytic part")
    p.add_argument("--cauchy", type=int, default=None, metavar="S", help="Cauchy wavelet of order S instead of Gabor")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("segment", parents=[common], help="atoll decomposition of a magnitude grid")
    p.add_argument("input", help="TFG grid (modulus is taken)")
    _add_threshold(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("certify", parents=[common], help="stability certificates per component")
    p.add_argument("input", help="TFG grid of F1 (modulus is taken)")
    p.add_argument("--other", default=None, help="TFG grid of F2 for the base-point choice")
    _add_threshold(p)
    p.add_argument("--eta", choices=["gabor", "cauchy", "none"], default="gabor", help="normalizer (default gabor)")
    p.add_argument("--order", type=int, default=1, help="Cauchy order s (default 1)")
    p.add_argument("--p", type=float, default=2.0, help="norm exponent (default 2)")
    p.add_argument("--t", type=float, default=0.5, help="sampling fraction t (default 0.5)")
    p.add_argument("--uniform-c", type=float, default=1.0, help="uniform multiplier c (default 1)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("align", parents=[common], help="component-wise phase alignment of two grids")
    p.add_argument("input", help="TFG grid F (defines the components)")
    p.add_argument("other", help="TFG grid G")
    _add_threshold(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("scramble", parents=[common], help="multiply each component by its own phase")
    p.add_argument("input", help="complex TFG grid")
    _add_threshold(p)
    p.add_argument("--alphas", type=_floats, default=None, help="comma-separated phases (default: seeded random)")
    p.set_defaults(func=cmd_scramble)

    p = sub.add_parser("retrieve", parents=[common], help="alternating-projection retrieval from a magnitude")
    p.add_argument("input", help="TFG magnitude on a periodic lattice (as written by 'transform')")
    p.add_argument("--iters", type=int, default=500, help="maximum iterations (default 500)")
    p.add_argument("--time-scale", type=float, default=0.025, help="seconds per window unit for the WAV (default 0.025)")
    p.add_argument("--stream", action="store_true", help="also stream the CSV iteration log to stdout")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("audio-shift", parents=[common], help="global or per-component phase shift of a WAV")
    p.add_argument("input", help="mono WAV file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float, default=math.pi / 2, help="global phase (default pi/2)")
    g.add_argument("--alphas", type=_floats, default=None, help="per-component phases")
    p.add_argument("--rel-delta", type=float, default=1e-4, help="segmentation threshold / max (default 1e-4)")
    p.add_argument("--time-scale", type=float, default=0.025, help="seconds per window unit (default 0.025)")
    p.add_argument("--dx", type=float, default=0.25, help="hop in window units (default 0.25)")
    p.set_defaults(func=cmd_audio_shift)

    p = sub.add_parser("demo", parents=[common], help="scripted scenarios")
    p.add_argument("scenario", choices=["instability", "figure2", "audio"])
    p.set_defaults(func=cmd_demo)
    return ap


def _error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    measured = getattr(exc, "measured", None)
    if measured is not None:
        payload["measured"] = measured
    residual = getattr(exc, "residual", None)
    if residual is not None:
        payload["residual"] = residual
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _error(exc, EXIT_USAGE)
    try:
        if args.threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=args.threads):
                args.func(args)
        else:
            args.func(args)
    except (OSError, ValueError, TypeError, RuntimeError) as exc:
        return _error(exc, EXIT_ERROR)
    return 0


if __name__ == "__main__":
    sys.exit(main())
