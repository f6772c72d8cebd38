"""Shared on-disk formats: points, grids, measures, reports.

Binary layouts (little-endian):

* grid file: magic ``CGGRID1\\0``, float64 origin_x, origin_y, spacing,
  int64 nx, ny, ncomp, then nx*ny*ncomp float64 values, row-major in (i, j)
  with the component index fastest.
* point file: magic ``CGPTS1\\0\\0``, int64 n, then n pairs of float64.

Text formats: points as ``x,y`` CSV (header optional on input, written by
default); equilibrium measures as ``x,y,density,in_support`` CSV, one row
per grid cell.  All writes go through a temp file and an atomic rename.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .errors import ValidationError
from .grids import Grid
from .points import PointConfiguration

GRID_MAGIC = b"CGGRID1\x00"
POINTS_MAGIC = b"CGPTS1\x00\x00"


def atomic_write_bytes(path, payload):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, payload):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def grid_to_bytes(grid, values):
    values = np.asarray(values, dtype=float)
    if values.shape[:2] != (grid.nx, grid.ny):
        raise ValidationError("values do not match the grid shape")
    ncomp = 1 if values.ndim == 2 else values.shape[2]
    header = GRID_MAGIC + struct.pack(
        "<dddqqq", grid.origin[0], grid.origin[1], grid.spacing,
        grid.nx, grid.ny, ncomp,
    )
    return header + values.astype("<f8").tobytes()


def write_grid_binary(path, grid, values):
    atomic_write_bytes(path, grid_to_bytes(grid, values))


def read_grid_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(GRID_MAGIC))
        if magic != GRID_MAGIC:
            raise ValidationError(f"{path}: not a grid file")
        ox, oy, spacing, nx, ny, ncomp = struct.unpack("<dddqqq", fh.read(48))
        data = np.frombuffer(fh.read(), dtype="<f8")
    expected = nx * ny * ncomp
    if len(data) != expected:
        raise ValidationError(f"{path}: truncated grid payload")
    grid = Grid((ox, oy), spacing, int(nx), int(ny))
    shape = (int(nx), int(ny)) if ncomp == 1 else (int(nx), int(ny), int(ncomp))
    return grid, data.reshape(shape).copy()


def points_to_bytes(points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return POINTS_MAGIC + struct.pack("<q", len(pts)) + pts.astype("<f8").tobytes()


def write_points_binary(path, points):
    atomic_write_bytes(path, points_to_bytes(points))


def read_points_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(POINTS_MAGIC))
        if magic != POINTS_MAGIC:
            raise ValidationError(f"{path}: not a point file")
        (n,) = struct.unpack("<q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if len(data) != 2 * n:
        raise ValidationError(f"{path}: truncated point payload")
    return data.reshape(n, 2).copy()


def points_to_csv(points, header=True):
    lines = ["x,y"] if header else []
    for x, y in np.asarray(points, dtype=float).reshape(-1, 2):
        lines.append(f"{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def write_points_csv(path, points, header=True):
    atomic_write_text(path, points_to_csv(points, header=header))


def read_points_csv(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1 and line.lower().replace(" ", "") in ("x,y", '"x","y"'):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected two columns")
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: unparsable coordinates")
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ValidationError(f"{path}:{lineno}: non-finite coordinates")
            rows.append((x, y))
    return np.asarray(rows, dtype=float).reshape(-1, 2)


def write_points(path, points, fmt="csv"):
    if fmt == "csv":
        write_points_csv(path, points)
    elif fmt == "bin":
        write_points_binary(path, points)
    else:
        raise ValidationError(f"unknown point format '{fmt}'")


def read_points(path, frame):
    """Load a configuration from CSV or the binary point format."""
    with open(path, "rb") as fh:
        head = fh.read(len(POINTS_MAGIC))
    if head == POINTS_MAGIC:
        pts = read_points_binary(path)
    else:
        pts = read_points_csv(path)
    return PointConfiguration(pts, frame=frame)


def measure_to_csv(eq):
    X, Y = eq.grid.centers()
    lines = ["x,y,density,in_support"]
    dens = eq.density
    mask = eq.support_mask
    for i in range(eq.grid.nx):
        for j in range(eq.grid.ny):
            lines.append(
                f"{float(X[i, j])!r},{float(Y[i, j])!r},{float(dens[i, j])!r},{int(mask[i, j])}"
            )
    return "\n".join(lines) + "\n"


def write_measure_csv(path, eq):
    atomic_write_text(path, measure_to_csv(eq))


def write_measure_binary(path, eq):
    write_grid_binary(path, eq.grid, eq.density)


def read_measure_binary(path):
    from .potential import SUPPORT_THRESHOLD, EquilibriumMeasure

    grid, density = read_grid_binary(path)
    if density.ndim != 2:
        raise ValidationError(f"{path}: expected a scalar grid")
    mask = density > SUPPORT_THRESHOLD
    return EquilibriumMeasure(
        grid=grid,
        density=density,
        support_mask=mask,
        total_mass=float(density.sum() * grid.cell_area),
    )
