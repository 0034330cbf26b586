"""Binary and CSV serialization of sampled functions and kernels.

Array file layout ("PSLB" format, version 1, all little-endian):

    magic   4 bytes  b"PSLB"
    version u32      1
    d       u32      dimension
    n       u32      points per axis
    R       f64      half extent
    payload n^d * 2 f64 values, (re, im) pairs, row-major (x1 slowest)
"""

from __future__ import annotations

import csv
import struct

import numpy as np

from .errors import InvalidInputError
from .grid import Grid, SampledFunction

MAGIC = b"PSLB"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


def write_pslb(path, f: SampledFunction) -> None:
    g = f.grid
    payload = np.empty((g.total_points, 2), dtype="<f8")
    flat = f.values.reshape(-1)
    payload[:, 0] = flat.real
    payload[:, 1] = flat.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.dim, g.points_per_axis, g.half_extent))
        fh.write(payload.tobytes())


def read_pslb(path) -> SampledFunction:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise InvalidInputError(f"{path}: truncated header")
        magic, version, d, n, R = _HEADER.unpack(header)
        if magic != MAGIC:
            raise InvalidInputError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise InvalidInputError(f"{path}: unsupported version {version}")
        grid = Grid(int(d), int(n), float(R))
        raw = np.fromfile(fh, dtype="<f8")
    if raw.size != 2 * grid.total_points:
        raise InvalidInputError(
            f"{path}: payload has {raw.size} floats, expected {2 * grid.total_points}")
    pairs = raw.reshape(-1, 2)
    return SampledFunction(grid, pairs[:, 0] + 1j * pairs[:, 1])


def write_function_csv(path, f: SampledFunction) -> None:
    """Index columns plus re/im, one row per grid point."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"i{k + 1}" for k in range(g.dim)] + ["re", "im"])
        flat = f.values.reshape(-1)
        for lin, v in enumerate(flat):
            idx = np.unravel_index(lin, g.shape)
            writer.writerow([*idx, repr(float(v.real)), repr(float(v.imag))])


def write_radial_decay_csv(path, f: SampledFunction) -> None:
    """(|z|, |k(z)|) pairs sorted by radius, for decay fitting."""
    r = f.grid.radius().reshape(-1)
    mag = np.abs(f.values).reshape(-1)
    order = np.argsort(r, kind="stable")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["abs_z", "abs_k"])
        for i in order:
            writer.writerow([repr(float(r[i])), repr(float(mag[i]))])
