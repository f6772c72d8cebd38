"""Quadrature for the planar logarithmic kernel and its gradient.

``-log|x|`` is harmonic away from the origin, so the midpoint rule on a
uniform grid is extremely accurate there (the h^4 error term carries the
Laplacian of the integrand, which vanishes).  All of the care goes into the
few cells at or next to the singularity; those are integrated in closed form
using double antiderivatives, assuming the density is constant on each cell.

Conventions: grids are cell-centered (:class:`~coulombgas.grids.Grid`), and a
"kernel table" is the array ``T[di + nx - 1, dj + ny - 1]`` holding the exact
integral of the kernel over a single cell at lattice offset ``(di, dj)`` from
the evaluation point, so that grid convolution with a density gives the
potential/field at every cell center.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

#: half-width (in cells) of the exactly integrated neighborhood
EXACT_RADIUS = 3


def _antideriv_log(u, v):
    # Double antiderivative of log(u^2 + v^2): d^2 F / du dv = log(u^2 + v^2).
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r2 = u * u + v * v
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r2 > 0.0, np.log(np.where(r2 > 0.0, r2, 1.0)), 0.0)
        au = np.where(u != 0.0, np.arctan(np.divide(v, np.where(u != 0.0, u, 1.0))), 0.0)
        av = np.where(v != 0.0, np.arctan(np.divide(u, np.where(v != 0.0, v, 1.0))), 0.0)
    return u * v * lg - 3.0 * u * v + u * u * au + v * v * av


def _antideriv_invx(u, v):
    # Double antiderivative of u / (u^2 + v^2).
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r2 = u * u + v * v
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r2 > 0.0, np.log(np.where(r2 > 0.0, r2, 1.0)), 0.0)
        au = np.where(u != 0.0, np.arctan(np.divide(v, np.where(u != 0.0, u, 1.0))), 0.0)
    return 0.5 * v * lg - v + u * au


def _corner_difference(F, x0, x1, y0, y1):
    return F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0)


def rect_log_integral(x0, x1, y0, y1):
    """Exact integral of -log|z| over the rectangle [x0,x1] x [y0,y1].

    Valid for any rectangle, including ones containing the singularity.
    """
    return -0.5 * _corner_difference(_antideriv_log, x0, x1, y0, y1)


def rect_grad_integral(x0, x1, y0, y1):
    """Exact integral of z/|z|^2 (componentwise) over a rectangle."""
    gx = _corner_difference(_antideriv_invx, x0, x1, y0, y1)
    gy = _corner_difference(lambda u, v: _antideriv_invx(v, u), x0, x1, y0, y1)
    return gx, gy


def _offset_table(nx, ny, h):
    """Lattice offsets (in length units) for a full correlation table."""
    dx = h * np.arange(-(nx - 1), nx)
    dy = h * np.arange(-(ny - 1), ny)
    return np.meshgrid(dx, dy, indexing="ij")


def log_kernel_table(nx, ny, h, exact_radius=EXACT_RADIUS):
    """Per-cell integrals of -log|z| for all offsets of an (nx, ny) grid."""
    dx, dy = _offset_table(nx, ny, h)
    r2 = dx * dx + dy * dy
    with np.errstate(divide="ignore"):
        table = -0.5 * np.log(np.where(r2 > 0.0, r2, 1.0)) * h * h
    near = (np.abs(dx) <= exact_radius * h + h / 2) & (np.abs(dy) <= exact_radius * h + h / 2)
    table[near] = rect_log_integral(
        dx[near] - h / 2, dx[near] + h / 2, dy[near] - h / 2, dy[near] + h / 2
    )
    return table


def grad_kernel_tables(nx, ny, h, exact_radius=EXACT_RADIUS):
    """Per-cell integrals of z/|z|^2 for all offsets of an (nx, ny) grid."""
    dx, dy = _offset_table(nx, ny, h)
    r2 = dx * dx + dy * dy
    safe = np.where(r2 > 0.0, r2, 1.0)
    tx = np.where(r2 > 0.0, dx / safe, 0.0) * h * h
    ty = np.where(r2 > 0.0, dy / safe, 0.0) * h * h
    near = (np.abs(dx) <= exact_radius * h + h / 2) & (np.abs(dy) <= exact_radius * h + h / 2)
    gx, gy = rect_grad_integral(
        dx[near] - h / 2, dx[near] + h / 2, dy[near] - h / 2, dy[near] + h / 2
    )
    tx[near] = gx
    ty[near] = gy
    return tx, ty


def convolve_table(density, table):
    """Grid convolution sum_{c'} density[c'] * table[c - c']."""
    out = fftconvolve(density, table, mode="valid")
    # 'valid' of the (2nx-1, 2ny-1) table against (nx, ny) data is (nx, ny)
    return out


def log_potential_grid(density, h, exact_radius=EXACT_RADIUS):
    """(-log * density) at every cell center of the density's own grid."""
    nx, ny = density.shape
    return convolve_table(density, log_kernel_table(nx, ny, h, exact_radius))


def grad_potential_grid(density, h, exact_radius=EXACT_RADIUS):
    """Integral of (x-y)/|x-y|^2 density(y) dy at every cell center."""
    nx, ny = density.shape
    tx, ty = grad_kernel_tables(nx, ny, h, exact_radius)
    return convolve_table(density, tx), convolve_table(density, ty)


def log_potential_at_points(points, centers_x, centers_y, masses, h,
                            exact_radius=EXACT_RADIUS, chunk=2 ** 22):
    """Integral of -log|p - y| against a cell-wise constant density.

    ``centers_x/y`` and ``masses`` describe occupied cells (mass = density *
    cell area).  Cells within ``exact_radius`` cells of a point are integrated
    in closed form; the rest use the midpoint rule.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts))
    near_cut = exact_radius * h + h / 2.0
    for k, p in enumerate(pts):
        dx = p[0] - centers_x
        dy = p[1] - centers_y
        r2 = dx * dx + dy * dy
        with np.errstate(divide="ignore"):
            vals = -0.5 * np.log(np.where(r2 > 0.0, r2, 1.0)) * masses
        near = (np.abs(dx) <= near_cut) & (np.abs(dy) <= near_cut)
        if np.any(near):
            ex = rect_log_integral(
                dx[near] - h / 2, dx[near] + h / 2, dy[near] - h / 2, dy[near] + h / 2
            )
            vals[near] = ex * (masses[near] / (h * h))
        out[k] = vals.sum()
    return out if len(out) > 1 else out


def grad_potential_at_points(points, centers_x, centers_y, masses, h,
                             exact_radius=EXACT_RADIUS):
    """Integral of (p - y)/|p - y|^2 against a cell-wise constant density."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((len(pts), 2))
    near_cut = exact_radius * h + h / 2.0
    for k, p in enumerate(pts):
        dx = p[0] - centers_x
        dy = p[1] - centers_y
        r2 = dx * dx + dy * dy
        safe = np.where(r2 > 0.0, r2, 1.0)
        vx = np.where(r2 > 0.0, dx / safe, 0.0) * masses
        vy = np.where(r2 > 0.0, dy / safe, 0.0) * masses
        near = (np.abs(dx) <= near_cut) & (np.abs(dy) <= near_cut)
        if np.any(near):
            gx, gy = rect_grad_integral(
                dx[near] - h / 2, dx[near] + h / 2, dy[near] - h / 2, dy[near] + h / 2
            )
            w = masses[near] / (h * h)
            vx[near] = gx * w
            vy[near] = gy * w
        out[k, 0] = vx.sum()
        out[k, 1] = vy.sum()
    return out
