"""Grid-discretized electric fields, truncation, and Neumann Poisson solves.

The field attached to a configuration-plus-background pair is
``E(x) = -sum_p (x - p)/|x - p|^2 + integral (x - y)/|x - y|^2 mu(y) dy``,
the gradient of the logarithmic potential of (points - background); it obeys
``-div E = 2 pi (points - background)``.  Truncation at radius eta removes
each point's own singular part inside its disk of radius eta, leaving a field
that is square integrable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sp_fft
from scipy.interpolate import RectBivariateSpline

from . import logkernel
from .errors import IncompatibleFluxError, UnderResolvedError, ValidationError
from .grids import Grid

JITTER_FRACTION = 1.0 / 7.0   # nudge applied to points sitting on a grid node


@dataclass
class GridField:
    """Vector field sampled at the cell centers of a grid: shape (nx, ny, 2)."""

    grid: Grid
    values: np.ndarray
    jittered: tuple = ()

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.ny, 2):
            raise ValidationError("field values must have shape (nx, ny, 2)")

    def energy(self):
        """Plain Riemann sum of |E|^2 over the grid."""
        return float(np.einsum("ijk,ijk->", self.values, self.values) * self.grid.cell_area)


@dataclass
class ScalarGrid:
    """Scalar field sampled at the cell centers of a grid."""

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValidationError("scalar values must have shape (nx, ny)")


def _eta_value(eta):
    value = float(getattr(eta, "eta", eta))
    if not (0.0 < value < 1.0):
        raise ValidationError("truncation radius must lie in (0, 1)")
    return value


def _jitter_on_nodes(points, grid):
    """Move points off grid nodes by h/7; returns (points, moved indices)."""
    pts = np.array(points, dtype=float)
    h = grid.spacing
    i, j = grid.index_of(pts)
    node_x = grid.origin[0] + i * h
    node_y = grid.origin[1] + j * h
    on_node = (np.abs(pts[:, 0] - node_x) < 1e-12 * h) & (
        np.abs(pts[:, 1] - node_y) < 1e-12 * h
    )
    moved = np.nonzero(on_node)[0]
    if len(moved):
        pts[moved, 0] += h * JITTER_FRACTION
        pts[moved, 1] += h * JITTER_FRACTION / 2.0
    return pts, tuple(int(k) for k in moved)


def background_field_interpolator(mu):
    """Cubic-spline evaluator for the background part of the field.

    The field of the gridded background is computed once on the measure's own
    grid (exact near-cell integrals, midpoint far cells) and interpolated from
    there; the result is cached on the measure.
    """
    if "bg_field_spline" not in mu._cache:
        gx, gy = logkernel.grad_potential_grid(mu.density, mu.grid.spacing)
        x, y = mu.grid.x(), mu.grid.y()
        sx = RectBivariateSpline(x, y, gx, kx=3, ky=3)
        sy = RectBivariateSpline(x, y, gy, kx=3, ky=3)
        mu._cache["bg_field_spline"] = (sx, sy)
    return mu._cache["bg_field_spline"]


def background_field_at(points, mu):
    """Background field by direct quadrature (any location, slower)."""
    sx, sy, masses = mu.support_cells()
    return logkernel.grad_potential_at_points(points, sx, sy, masses, mu.grid.spacing)


def field_at_points(config, mu, points):
    """E at arbitrary points: per-charge kernels plus background quadrature."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = background_field_at(pts, mu) if mu is not None else np.zeros_like(pts)
    for p in config.points:
        d = pts - p
        r2 = np.maximum((d * d).sum(axis=1), 1e-300)
        out -= d / r2[:, None]
    return out


def local_field(config, mu, window_grid):
    """Electric field of (config - mu) sampled on ``window_grid``.

    ``mu`` may be None for a chargeless background.  Points coinciding with a
    grid node are jittered by h/7 (recorded on the returned field).
    """
    pts, moved = _jitter_on_nodes(config.points, window_grid)
    X, Y = window_grid.centers()
    values = np.zeros((window_grid.nx, window_grid.ny, 2))
    if mu is not None:
        x0, x1, y0, y1 = window_grid.bounds()
        if mu.grid.contains_box(x0, x1, y0, y1):
            sx, sy = background_field_interpolator(mu)
            values[:, :, 0] = sx(window_grid.x(), window_grid.y())
            values[:, :, 1] = sy(window_grid.x(), window_grid.y())
        else:
            bg = background_field_at(
                np.column_stack([X.ravel(), Y.ravel()]), mu
            )
            values[:, :, 0] = bg[:, 0].reshape(X.shape)
            values[:, :, 1] = bg[:, 1].reshape(X.shape)
    for p in pts:
        dx = X - p[0]
        dy = Y - p[1]
        r2 = dx * dx + dy * dy
        values[:, :, 0] -= dx / r2
        values[:, :, 1] -= dy / r2
    return GridField(window_grid, values, jittered=moved)


def truncate_field(field_obj, config, eta):
    """Remove each charge's own singular field inside its eta-disk.

    Cells farther than eta from every charge are left untouched (exactly).
    """
    eta = _eta_value(eta)
    grid = field_obj.grid
    h = grid.spacing
    if not eta > 2.0 * h:
        raise UnderResolvedError(
            f"truncation radius {eta} must exceed twice the grid spacing {h}"
        )
    pts, _ = _jitter_on_nodes(config.points, grid)
    values = field_obj.values.copy()
    x = grid.x()
    y = grid.y()
    reach = int(np.ceil(eta / h)) + 1
    for p in pts:
        i0, j0 = grid.index_of(p[None, :])
        i0, j0 = int(i0[0]), int(j0[0])
        isl = slice(max(i0 - reach, 0), min(i0 + reach + 1, grid.nx))
        jsl = slice(max(j0 - reach, 0), min(j0 + reach + 1, grid.ny))
        dx = x[isl, None] - p[0]
        dy = y[None, jsl] - p[1]
        r2 = dx * dx + dy * dy
        inside = r2 < eta * eta
        if not inside.any():
            continue
        inv = np.where(inside, 1.0 / np.maximum(r2, 1e-300), 0.0)
        values[isl, jsl, 0] += dx * inv
        values[isl, jsl, 1] += dy * inv
    return GridField(grid, values, jittered=field_obj.jittered)


def divergence(field_obj):
    """Central-difference divergence (copied edges); a ScalarGrid."""
    h = field_obj.grid.spacing
    ex = field_obj.values[:, :, 0]
    ey = field_obj.values[:, :, 1]
    div = np.zeros_like(ex)
    div[1:-1, :] += (ex[2:, :] - ex[:-2, :]) / (2 * h)
    div[:, 1:-1] += (ey[:, 2:] - ey[:, :-2]) / (2 * h)
    div[0, :] = div[1, :]
    div[-1, :] = div[-2, :]
    div[:, 0] = div[:, 1]
    div[:, -1] = div[:, -2]
    return ScalarGrid(field_obj.grid, div)


def _flux_arrays(grid, flux):
    """Normalize boundary data to (south, east, north, west) arrays.

    Order follows the boundary counterclockwise starting at the south edge;
    south/north have length nx (indexed by i), east/west length ny (by j).
    A scalar or None is broadcast.
    """
    if flux is None:
        flux = 0.0
    if np.isscalar(flux):
        return (
            np.full(grid.nx, float(flux)),
            np.full(grid.ny, float(flux)),
            np.full(grid.nx, float(flux)),
            np.full(grid.ny, float(flux)),
        )
    if isinstance(flux, dict):
        flux = (flux["south"], flux["east"], flux["north"], flux["west"])
    south, east, north, west = (np.asarray(a, dtype=float) for a in flux)
    if south.shape != (grid.nx,) or north.shape != (grid.nx,):
        raise ValidationError("south/north flux arrays must have length nx")
    if east.shape != (grid.ny,) or west.shape != (grid.ny,):
        raise ValidationError("east/west flux arrays must have length ny")
    return south, east, north, west


def neumann_laplacian_apply(grid, values, flux=None):
    """-Laplacian with ghost-node Neumann closure: returns A(values) - flux/h."""
    h = grid.spacing
    south, east, north, west = _flux_arrays(grid, flux)
    v = values
    out = 4.0 * v.copy()
    out[1:, :] -= v[:-1, :]
    out[:-1, :] -= v[1:, :]
    out[:, 1:] -= v[:, :-1]
    out[:, :-1] -= v[:, 1:]
    # ghost elimination: missing neighbour = inner value +/- h * outward flux
    out[0, :] -= v[0, :] + h * west
    out[-1, :] -= v[-1, :] + h * east
    out[:, 0] -= v[:, 0] + h * south
    out[:, -1] -= v[:, -1] + h * north
    return out / (h * h)


def neumann_poisson(rhs, flux=None, defect_tol=1e-2):
    """Solve -Laplacian(u) = 2 pi rhs with prescribed outward normal flux.

    ``rhs`` is a :class:`ScalarGrid`; ``flux`` gives ``grad(u) . n`` on the
    boundary as (south, east, north, west) face-midpoint arrays (scalar and
    dict forms accepted).  Compatibility requires
    ``2 pi sum(rhs) h^2 + sum(flux) h = 0``; any defect is removed uniformly
    from the right-hand side and recorded in ``meta['defect']``, but a defect
    larger than ``defect_tol`` relative to the data is an error.

    The discrete 5-point Neumann operator is inverted exactly in a cosine
    basis; the solution has zero mean.
    """
    grid = rhs.grid
    h = grid.spacing
    south, east, north, west = _flux_arrays(grid, flux)

    rhs_eff = 2.0 * np.pi * rhs.values.copy()
    rhs_eff[0, :] += west / h
    rhs_eff[-1, :] += east / h
    rhs_eff[:, 0] += south / h
    rhs_eff[:, -1] += north / h

    defect = float(rhs_eff.sum() * grid.cell_area)
    scale = max(
        float(2.0 * np.pi * np.abs(rhs.values).sum() * grid.cell_area),
        float(sum(np.abs(a).sum() for a in (south, east, north, west)) * h),
        1e-300,
    )
    if abs(defect) / scale > defect_tol and scale > 1e-290:
        raise IncompatibleFluxError(
            f"flux/rhs compatibility defect {defect:.3e} exceeds "
            f"{defect_tol:.0e} relative to the data scale {scale:.3e}",
            defect=defect,
        )
    correction = defect / (grid.nx * grid.ny * grid.cell_area)
    rhs_eff -= correction

    spec = sp_fft.dctn(rhs_eff, type=2)
    kx = 2.0 - 2.0 * np.cos(np.pi * np.arange(grid.nx) / grid.nx)
    ky = 2.0 - 2.0 * np.cos(np.pi * np.arange(grid.ny) / grid.ny)
    lam = (kx[:, None] + ky[None, :]) / (h * h)
    lam[0, 0] = 1.0
    spec /= lam
    spec[0, 0] = 0.0
    values = sp_fft.idctn(spec, type=2)

    # residual of the boundary-value problem: -Lap(u) (ghosts filled from the
    # flux data) against the defect-corrected source
    applied = neumann_laplacian_apply(grid, values, (south, east, north, west))
    residual = float(np.abs(applied - (2.0 * np.pi * rhs.values - correction)).max())
    sol = ScalarGrid(grid, values)
    sol.meta.update(defect=defect, residual=residual,
                    flux=(south, east, north, west))
    return sol


def gradient(scalar):
    """Central-difference gradient of a ScalarGrid as a GridField."""
    h = scalar.grid.spacing
    gx, gy = np.gradient(scalar.values, h, edge_order=2)
    return GridField(scalar.grid, np.stack([gx, gy], axis=-1))


def rotated_gradient(scalar):
    """Divergence-free field (d/dy, -d/dx) of a scalar stream function."""
    h = scalar.grid.spacing
    gx, gy = np.gradient(scalar.values, h, edge_order=2)
    return GridField(scalar.grid, np.stack([gy, -gx], axis=-1))


def dirichlet_energy(scalar):
    """Riemann sum of |grad u|^2 from central differences."""
    return gradient(scalar).energy()
