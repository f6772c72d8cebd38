"""Uniform cell-centered grids and square windows.

Every gridded quantity in the package (densities, potentials, vector fields)
lives on a :class:`Grid`: a rectangular array of square cells of side
``spacing``.  ``origin`` is the center of cell ``(0, 0)`` and arrays are
indexed ``[i, j]`` with the first axis along x, shape ``(nx, ny)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered rectangular grid."""

    origin: tuple
    spacing: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValidationError("grid spacing must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValidationError("grid must contain at least one cell")

    @classmethod
    def from_box(cls, x0, x1, y0, y1, spacing):
        """Grid of cells covering the box [x0,x1] x [y0,y1].

        Cell counts are rounded so the box is covered; the box corners land on
        cell edges when the side is a multiple of ``spacing``.
        """
        nx = max(1, int(round((x1 - x0) / spacing)))
        ny = max(1, int(round((y1 - y0) / spacing)))
        origin = (x0 + spacing / 2.0, y0 + spacing / 2.0)
        return cls(origin, float(spacing), nx, ny)

    @classmethod
    def square(cls, center, side, spacing):
        """Square grid of the given side centered at ``center``."""
        cx, cy = center
        half = side / 2.0
        return cls.from_box(cx - half, cx + half, cy - half, cy + half, spacing)

    @property
    def cell_area(self):
        return self.spacing * self.spacing

    @property
    def shape(self):
        return (self.nx, self.ny)

    def x(self):
        return self.origin[0] + self.spacing * np.arange(self.nx)

    def y(self):
        return self.origin[1] + self.spacing * np.arange(self.ny)

    def centers(self):
        """Meshgrid of cell centers, each of shape ``(nx, ny)``."""
        return np.meshgrid(self.x(), self.y(), indexing="ij")

    def bounds(self):
        """Outer edges (x0, x1, y0, y1) of the gridded region."""
        h = self.spacing
        return (
            self.origin[0] - h / 2.0,
            self.origin[0] + h * (self.nx - 0.5),
            self.origin[1] - h / 2.0,
            self.origin[1] + h * (self.ny - 0.5),
        )

    def index_of(self, points):
        """Indices (i, j) of the cells containing each point."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        i = np.floor((pts[:, 0] - self.origin[0]) / self.spacing + 0.5).astype(int)
        j = np.floor((pts[:, 1] - self.origin[1]) / self.spacing + 0.5).astype(int)
        return i, j

    def contains_points(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x0, x1, y0, y1 = self.bounds()
        return (
            (pts[:, 0] >= x0) & (pts[:, 0] <= x1)
            & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
        )

    def contains_box(self, x0, x1, y0, y1):
        gx0, gx1, gy0, gy1 = self.bounds()
        eps = 1e-9 * self.spacing
        return x0 >= gx0 - eps and x1 <= gx1 + eps and y0 >= gy0 - eps and y1 <= gy1 + eps

    def scaled(self, factor):
        """Grid with all lengths multiplied by ``factor`` (same cell counts)."""
        return Grid(
            (self.origin[0] * factor, self.origin[1] * factor),
            self.spacing * factor,
            self.nx,
            self.ny,
        )


@dataclass(frozen=True)
class Window:
    """Axis-aligned square window: [cx-h, cx+h] x [cy-h, cy+h]."""

    center: tuple
    half_side: float

    def __post_init__(self):
        if self.half_side <= 0:
            raise ValidationError("window half_side must be positive")

    @classmethod
    def of_side(cls, center, side):
        return cls((float(center[0]), float(center[1])), side / 2.0)

    @property
    def side(self):
        return 2.0 * self.half_side

    @property
    def area(self):
        return self.side * self.side

    def bounds(self):
        cx, cy = self.center
        h = self.half_side
        return (cx - h, cx + h, cy - h, cy + h)

    def contains_points(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x0, x1, y0, y1 = self.bounds()
        return (
            (pts[:, 0] >= x0) & (pts[:, 0] < x1)
            & (pts[:, 1] >= y0) & (pts[:, 1] < y1)
        )

    def scaled(self, factor):
        return Window(
            (self.center[0] * factor, self.center[1] * factor),
            self.half_side * factor,
        )

    def grid(self, spacing):
        """Cell-centered grid tiling the window at the given spacing."""
        return Grid.square(self.center, self.side, spacing)


def overlap_lengths(lo, hi, centers, h):
    """Exact 1-d overlap of [lo, hi] with cells centered at ``centers``."""
    left = np.maximum(lo, centers - h / 2.0)
    right = np.minimum(hi, centers + h / 2.0)
    return np.clip(right - left, 0.0, None)
