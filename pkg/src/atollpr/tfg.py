"""Reader and writer for the TFG binary grid format.

Layout::

    b"TFG1"
    uint32 little-endian header length
    UTF-8 JSON header {"nx","ny","origin_x","origin_y","dx","dy","kind"}
    payload, row-major (y-major rows):
        complex -> float64 pairs (re, im)
        real    -> float64
        bool    -> one byte per cell (0/1)
"""

import json
import struct

import numpy as np

from .grid import DomainMask, Lattice, TFGrid

MAGIC = b"TFG1"
KINDS = ("complex", "real", "bool")


class TFGFormatError(ValueError):
    pass


def encode(obj) -> bytes:
    if isinstance(obj, DomainMask):
        kind = "bool"
        payload = obj.cells.astype("u1").tobytes()
    elif isinstance(obj, TFGrid):
        if obj.is_complex:
            kind = "complex"
            payload = obj.values.astype("<c16").tobytes()
        else:
            kind = "real"
            payload = obj.values.astype("<f8").tobytes()
    else:
        raise TypeError(f"cannot encode {type(obj).__name__} as TFG")
    header = dict(obj.lattice.to_header(), kind=kind)
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return MAGIC + struct.pack("<I", len(hbytes)) + hbytes + payload


def decode(data: bytes):
    if data[:4] != MAGIC:
        raise TFGFormatError("missing TFG1 magic")
    if len(data) < 8:
        raise TFGFormatError("truncated header")
    (hlen,) = struct.unpack("<I", data[4:8])
    try:
        header = json.loads(data[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TFGFormatError(f"bad header: {exc}") from exc
    kind = header.get("kind")
    if kind not in KINDS:
        raise TFGFormatError(f"unknown kind {kind!r}")
    lat = Lattice(
        float(header["origin_x"]),
        float(header["origin_y"]),
        float(header["dx"]),
        float(header["dy"]),
        int(header["nx"]),
        int(header["ny"]),
    )
    body = data[8 + hlen :]
    n = lat.nx * lat.ny
    dtype, width = {"complex": ("<c16", 16), "real": ("<f8", 8), "bool": ("u1", 1)}[kind]
    if len(body) != n * width:
        raise TFGFormatError(f"payload has {len(body)} bytes, expected {n * width}")
    arr = np.frombuffer(body, dtype=dtype).reshape(lat.shape)
    if kind == "bool":
        if np.any(arr > 1):
            raise TFGFormatError("bool payload must be 0/1")
        return DomainMask(lat, arr.astype(bool))
    return TFGrid(lat, arr.astype(complex if kind == "complex" else float))


def write(path, obj):
    with open(path, "wb") as fh:
        fh.write(encode(obj))


def read(path):
    with open(path, "rb") as fh:
        return decode(fh.read())
