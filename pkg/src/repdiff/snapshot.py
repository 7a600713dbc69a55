"""Field snapshots: flat little-endian binary and CSV."""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .field import Field, Grid

_HEADER = struct.Struct("<iid")


def write_binary(path, rho: Field):
    """Header ``(d, n, L)`` as ``<i4, <i4, <f8`` followed by row-major ``<f8`` values."""
    g = rho.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.dimension, g.n, g.L))
        fh.write(np.ascontiguousarray(rho.values, dtype="<f8").tobytes(order="C"))


def read_binary(path) -> Field:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    d, n, L = _HEADER.unpack_from(data)
    grid = Grid(d, L, n)
    expected = _HEADER.size + 8 * n ** d
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for d={d}, n={n}, got {len(data)}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(grid.shape)
    return Field(grid, values.astype(float))


def write_csv(path, rho: Field, max_points: int = 1 << 16):
    """Columns ``x1..xd, value``; refuses grids larger than ``max_points`` nodes."""
    g = rho.grid
    if rho.values.size > max_points:
        raise ValueError(f"{rho.values.size} nodes exceed the CSV limit of {max_points}")
    coords = [c.reshape(-1) for c in g.coords()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(g.dimension)] + ["value"])
        for row in zip(*coords, rho.values.reshape(-1)):
            w.writerow([repr(float(v)) for v in row])


def read_csv(path, L: float) -> Field:
    """Inverse of :func:`write_csv`; the half-width is not stored in the file."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    d = len(rows[0]) - 1
    vals = np.array([float(r[-1]) for r in rows[1:]])
    n = round(len(vals) ** (1.0 / d))
    grid = Grid(d, L, n)
    return Field(grid, vals.reshape(grid.shape))
