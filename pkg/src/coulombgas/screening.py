"""Screened transition fields on square annuli.

Given a square annulus C(z, R2) minus C(z, R1), a bounded background density
and the normal flux of an electric field on the outer boundary, the
construction tiles the annulus, gives every tile an integer charge matching
its share of background mass and boundary flux, places that many points at
sub-rectangle centers, and solves one Neumann problem per tile and per
sub-rectangle.  The assembled field matches the given flux on the outer
boundary, has zero flux on the inner boundary and on every internal
interface, and satisfies the charge-background compatibility tile by tile,
so it glues against any interior field with zero outward flux at C(z, R1).

Squares follow the side-length convention: C(z, R) has side R.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sp_fft
from scipy.interpolate import RectBivariateSpline

from . import fieldgrid
from .errors import IncompatibleFluxError, ScreeningInequalityError, ValidationError
from .grids import Grid
from .points import BLOWN_UP, PointConfiguration

#: admissible boundary-flux energy: M <= GATE_CONSTANT * min(m_low^2, 1) * l^3
GATE_CONSTANT = 1.0 / 100.0
#: separation guarantee relative to m_high^{-1/2}
SEPARATION_CONSTANT = 1.0 / 10.0
#: cells across a tile / across a sub-rectangle in the local solves
TILE_CELLS = 24
SUBRECT_CELLS = 24


@dataclass
class Tile:
    """One rectangle of the annulus tiling with its charge data."""

    rect: tuple                 # (x0, x1, y0, y1)
    m_bar: float                # average background density
    m_i: float                  # adjusted density, m_i * area an integer
    charge: int
    outer_edges: tuple = ()     # subset of ("south", "east", "north", "west")

    @property
    def area(self):
        x0, x1, y0, y1 = self.rect
        return (x1 - x0) * (y1 - y0)


@dataclass
class ScreeningProblem:
    """Inputs of the screening construction.

    ``boundary_flux`` maps boundary points (m, 2) on the outer square to the
    outward normal component of the field being screened.  ``mu`` maps
    arbitrary points to the background density; its declared bounds and
    Hölder data (``c_mu``, ``kappa``) are used by the precondition gate and
    by energy bookkeeping.  ``eta1`` is the tiny truncation radius whose
    logarithm prices each placed point.
    """

    center: tuple
    r1: float
    r2: float
    tile_scale: float
    mu: callable
    m_low: float
    m_high: float
    boundary_flux: callable
    eta1: float
    c_mu: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        width = (self.r2 - self.r1) / 2.0
        if not (self.tile_scale <= width <= 1.5 * self.tile_scale):
            raise ValidationError(
                "annulus width (R2-R1)/2 must lie in [tile_scale, 1.5 tile_scale]; "
                f"got width {width} for tile scale {self.tile_scale}"
            )
        if not (0.0 < self.m_low <= self.m_high):
            raise ValidationError("need 0 < m_low <= m_high")
        if not (0.0 < self.eta1 < 1.0):
            raise ValidationError("eta1 must lie in (0, 1)")

    def flux_energy(self, samples_per_side=512):
        """M = integral of |flux|^2 over the outer boundary."""
        pts, _ = boundary_nodes(self.center, self.r2, samples_per_side)
        ds = 4.0 * self.r2 / (4 * samples_per_side)
        g = np.asarray(self.boundary_flux(pts), dtype=float)
        return float((g * g).sum() * ds)

    def check_gate(self):
        m = self.flux_energy()
        bound = GATE_CONSTANT * min(self.m_low ** 2, 1.0) * self.tile_scale ** 3
        if m > bound:
            raise ScreeningInequalityError(m, bound)
        return m


@dataclass
class ScreeningResult:
    problem: ScreeningProblem
    tiles: list
    points: PointConfiguration
    n_tran: int
    energy: float
    subrects: list = field(default_factory=list)   # (rect, point index, tile index)
    tile_solutions: list = field(default_factory=list, repr=False)
    point_solutions: list = field(default_factory=list, repr=False)
    field: fieldgrid.GridField = None

    def min_separation(self):
        return self.points.min_gap()

    def boundary_clearance(self):
        """Distance from the points to both annulus boundaries."""
        c = self.problem.center
        p = np.abs(self.points.points - np.asarray(c))
        linf = np.maximum(p[:, 0], p[:, 1])
        return float(min(
            (self.problem.r2 / 2.0 - linf).min(),
            (linf - self.problem.r1 / 2.0).min(),
        ))

    def check_separation(self):
        floor = SEPARATION_CONSTANT / np.sqrt(self.problem.m_high)
        if self.min_separation() < floor or self.boundary_clearance() < floor:
            raise ValidationError("screening separation guarantee violated")
        return True


@dataclass
class _BoxSolution:
    """Neumann solution on a rectangle with exact-fit anisotropic cells."""

    rect: tuple
    nx: int
    ny: int
    hx: float
    hy: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def x(self):
        return self.rect[0] + self.hx * (np.arange(self.nx) + 0.5)

    def y(self):
        return self.rect[2] + self.hy * (np.arange(self.ny) + 0.5)

    @property
    def cell_area(self):
        return self.hx * self.hy

    def gradient(self):
        gx, gy = np.gradient(self.values, self.hx, self.hy, edge_order=2)
        return gx, gy

    def dirichlet_energy(self):
        gx, gy = self.gradient()
        return float((gx * gx + gy * gy).sum() * self.cell_area)

    def spline(self):
        return RectBivariateSpline(self.x(), self.y(), self.values, kx=3, ky=3)


def _neumann_box_solve(rect, n_across, rhs_fn, flux_fn, defect_tol=1e-2):
    """Cosine-basis Neumann solve on an exactly fitting rectangular grid.

    ``rhs_fn(points)`` gives the source of -Lap(u) = 2 pi rhs at cell
    centers; ``flux_fn(points, normal)`` gives the outward normal derivative
    at boundary-face midpoints.  Cells are near-square with the rectangle
    covered exactly; the compatibility defect is removed uniformly and
    recorded, as in :func:`coulombgas.fieldgrid.neumann_poisson`.
    """
    x0, x1, y0, y1 = rect
    w, h = x1 - x0, y1 - y0
    target = min(w, h) / n_across
    nx = max(4, int(round(w / target)))
    ny = max(4, int(round(h / target)))
    hx, hy = w / nx, h / ny
    xs = x0 + hx * (np.arange(nx) + 0.5)
    ys = y0 + hy * (np.arange(ny) + 0.5)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    rhs = np.asarray(rhs_fn(np.column_stack([X.ravel(), Y.ravel()])),
                     dtype=float).reshape(nx, ny)

    south = np.asarray(flux_fn(np.column_stack([xs, np.full(nx, y0)]),
                               np.array([0.0, -1.0])), dtype=float)
    north = np.asarray(flux_fn(np.column_stack([xs, np.full(nx, y1)]),
                               np.array([0.0, 1.0])), dtype=float)
    east = np.asarray(flux_fn(np.column_stack([np.full(ny, x1), ys]),
                              np.array([1.0, 0.0])), dtype=float)
    west = np.asarray(flux_fn(np.column_stack([np.full(ny, x0), ys]),
                              np.array([-1.0, 0.0])), dtype=float)

    rhs_eff = 2.0 * np.pi * rhs.copy()
    rhs_eff[0, :] += west / hx
    rhs_eff[-1, :] += east / hx
    rhs_eff[:, 0] += south / hy
    rhs_eff[:, -1] += north / hy

    cell_area = hx * hy
    defect = float(rhs_eff.sum() * cell_area)
    scale = max(
        float(2.0 * np.pi * np.abs(rhs).sum() * cell_area),
        float((np.abs(south).sum() + np.abs(north).sum()) * hx
              + (np.abs(east).sum() + np.abs(west).sum()) * hy),
        1e-300,
    )
    if abs(defect) / scale > defect_tol and scale > 1e-290:
        raise IncompatibleFluxError(
            f"flux/rhs compatibility defect {defect:.3e} exceeds "
            f"{defect_tol:.0e} relative to the data scale {scale:.3e}",
            defect=defect,
        )
    correction = defect / (nx * ny * cell_area)
    rhs_eff -= correction

    spec = sp_fft.dctn(rhs_eff, type=2)
    lx = (2.0 - 2.0 * np.cos(np.pi * np.arange(nx) / nx)) / (hx * hx)
    ly = (2.0 - 2.0 * np.cos(np.pi * np.arange(ny) / ny)) / (hy * hy)
    lam = lx[:, None] + ly[None, :]
    lam[0, 0] = 1.0
    spec /= lam
    spec[0, 0] = 0.0
    values = sp_fft.idctn(spec, type=2)

    # residual of the ghost-closed operator against the corrected source
    ax = (2.0 * values
          - np.pad(values, ((1, 0), (0, 0)), mode="edge")[:-1]
          - np.pad(values, ((0, 1), (0, 0)), mode="edge")[1:]) / (hx * hx)
    ay = (2.0 * values
          - np.pad(values, ((0, 0), (1, 0)), mode="edge")[:, :-1]
          - np.pad(values, ((0, 0), (0, 1)), mode="edge")[:, 1:]) / (hy * hy)
    ax[0, :] -= west / hx
    ax[-1, :] -= east / hx
    ay[:, 0] -= south / hy
    ay[:, -1] -= north / hy
    residual = float(np.abs(ax + ay - (2.0 * np.pi * rhs - correction)).max())

    return _BoxSolution(
        rect=rect, nx=nx, ny=ny, hx=hx, hy=hy, values=values,
        meta=dict(defect=defect, residual=residual,
                  flux=(south, east, north, west)),
    )


def boundary_nodes(center, side, per_side):
    """Midpoint nodes and outward normals of a square boundary, ccw S,E,N,W."""
    half = side / 2.0
    s = (np.arange(per_side) + 0.5) / per_side * side - half
    cx, cy = center
    pts = np.concatenate([
        np.column_stack([cx + s, np.full(per_side, cy - half)]),
        np.column_stack([np.full(per_side, cx + half), cy + s]),
        np.column_stack([cx - s, np.full(per_side, cy + half)]),
        np.column_stack([np.full(per_side, cx - half), cy - s]),
    ])
    normals = np.concatenate([
        np.tile([0.0, -1.0], (per_side, 1)),
        np.tile([1.0, 0.0], (per_side, 1)),
        np.tile([0.0, 1.0], (per_side, 1)),
        np.tile([-1.0, 0.0], (per_side, 1)),
    ])
    return pts, normals


def _strips(center, r1, r2):
    """Pinwheel decomposition of the square annulus into four strips.

    Each strip runs along one outer side; together they cover the frame with
    no overlap.  Returns (rect, direction, outer_side) triples in ccw order
    starting at the south side.
    """
    cx, cy = center
    ho, hi = r2 / 2.0, r1 / 2.0
    w = ho - hi
    return [
        ((cx - ho, cx + ho - w, cy - ho, cy - hi), "x+", "south"),
        ((cx + ho - w, cx + ho, cy - ho, cy + ho - w), "y+", "east"),
        ((cx - ho + w, cx + ho, cy + hi, cy + ho), "x-", "north"),
        ((cx - ho, cx - ho + w, cy - ho + w, cy + ho), "y-", "west"),
    ]


def _strip_line_density(problem, rect, direction, outer_side, n_fine=2048,
                        across_quad=32):
    """Charge per unit length along a strip: background minus flux share."""
    x0, x1, y0, y1 = rect
    along_axis = 0 if direction in ("x+", "x-") else 1
    lo, hi = (x0, x1) if along_axis == 0 else (y0, y1)
    s = np.linspace(lo, hi, n_fine + 1)
    mid = 0.5 * (s[1:] + s[:-1])
    t = (np.arange(across_quad) + 0.5) / across_quad
    if along_axis == 0:
        across = y0 + t * (y1 - y0)
        pts = np.column_stack([
            np.repeat(mid, across_quad), np.tile(across, n_fine)
        ])
        width = y1 - y0
    else:
        across = x0 + t * (x1 - x0)
        pts = np.column_stack([
            np.tile(across, n_fine), np.repeat(mid, across_quad)
        ])
        width = x1 - x0
    mu_line = np.asarray(problem.mu(pts), dtype=float).reshape(n_fine, across_quad)
    density = mu_line.mean(axis=1) * width

    # flux share: the strip's long outer side plus, at the leading strip end,
    # the short end that also lies on the outer boundary
    cx, cy = problem.center
    ho = problem.r2 / 2.0
    side_coord = {"south": cy - ho, "east": cx + ho,
                  "north": cy + ho, "west": cx - ho}[outer_side]
    if along_axis == 0:
        bpts = np.column_stack([mid, np.full(n_fine, side_coord)])
    else:
        bpts = np.column_stack([np.full(n_fine, side_coord), mid])
    g = np.asarray(problem.boundary_flux(bpts), dtype=float)
    density = density - g / (2.0 * np.pi)
    return s, mid, density


def _short_end_flux(problem, rect, direction, n_quad=256):
    """Flux through the strip's short end that lies on the outer boundary."""
    x0, x1, y0, y1 = rect
    cx, cy = problem.center
    ho = problem.r2 / 2.0
    # the leading end in the walk direction touches the outer square
    if direction == "x+":
        xe = x0 if abs(x0 - (cx - ho)) < 1e-9 else None
        if xe is None:
            return 0.0, None
        t = np.linspace(y0, y1, n_quad + 1)
        mid = 0.5 * (t[1:] + t[:-1])
        pts = np.column_stack([np.full(n_quad, xe), mid])
        ds = (y1 - y0) / n_quad
    elif direction == "x-":
        xe = x1 if abs(x1 - (cx + ho)) < 1e-9 else None
        if xe is None:
            return 0.0, None
        t = np.linspace(y0, y1, n_quad + 1)
        mid = 0.5 * (t[1:] + t[:-1])
        pts = np.column_stack([np.full(n_quad, xe), mid])
        ds = (y1 - y0) / n_quad
    elif direction == "y+":
        ye = y0 if abs(y0 - (cy - ho)) < 1e-9 else None
        if ye is None:
            return 0.0, None
        t = np.linspace(x0, x1, n_quad + 1)
        mid = 0.5 * (t[1:] + t[:-1])
        pts = np.column_stack([mid, np.full(n_quad, ye)])
        ds = (x1 - x0) / n_quad
    else:
        ye = y1 if abs(y1 - (cy + ho)) < 1e-9 else None
        if ye is None:
            return 0.0, None
        t = np.linspace(x0, x1, n_quad + 1)
        mid = 0.5 * (t[1:] + t[:-1])
        pts = np.column_stack([mid, np.full(n_quad, ye)])
        ds = (x1 - x0) / n_quad
    g = np.asarray(problem.boundary_flux(pts), dtype=float)
    return float(g.sum() * ds), pts[0]


def tile_annulus(problem):
    """Split the annulus into integer-charge tiles.

    Walks the four pinwheel strips counterclockwise keeping a cumulative
    charge (background mass minus flux/2pi); interior tile edges are placed
    where the cumulative crosses integers (a perturbation of at most a tenth
    of the tile scale from the uniform splits), and the walk's running
    remainder is absorbed by rescaling m_i within the allowed slack.  Raises
    the screening-inequality error when the boundary flux is too energetic.
    """
    problem.check_gate()
    el = problem.tile_scale
    tiles = []
    running = 0.0   # cumulative exact charge over the whole walk
    assigned = 0    # integer charge handed out so far
    for rect, direction, outer_side in _strips(problem.center, problem.r1, problem.r2):
        x0, x1, y0, y1 = rect
        along = (x1 - x0) if direction in ("x+", "x-") else (y1 - y0)
        n_tiles = max(1, int(round(along / el)))
        if not (el / 2.0 <= along / n_tiles <= 2.0 * el):
            n_tiles = max(1, int(np.ceil(along / (2.0 * el))))
        s, mid, density = _strip_line_density(problem, rect, direction, outer_side)
        if density.min() <= 0.0:
            raise ValidationError("boundary flux overwhelms the background locally")
        end_flux, end_point = _short_end_flux(problem, rect, direction)
        cum = np.concatenate([[0.0], np.cumsum(density * np.diff(s))])
        reversed_walk = direction in ("x-", "y-")
        if reversed_walk:
            cum = cum[-1] - cum[::-1]
            s_walk = s[::-1]
        else:
            s_walk = s
        offsets_fine = np.abs(s_walk - s_walk[0])

        # uniform candidate edges, snapped (up to el/10) so the cumulative
        # charge at interior edges is integer
        length = offsets_fine[-1]
        uniform = np.linspace(0.0, length, n_tiles + 1)
        start_charge = running - (end_flux / (2.0 * np.pi))
        edges_off = [0.0]
        for k in range(1, n_tiles):
            natural = start_charge + np.interp(uniform[k], offsets_fine, cum)
            want = round(natural) - start_charge
            pos = float(np.interp(want, cum, offsets_fine))
            pos = float(np.clip(pos, uniform[k] - el / 10.0, uniform[k] + el / 10.0))
            edges_off.append(pos)
        edges_off.append(length)
        sign = np.sign(s_walk[-1] - s_walk[0])
        edges = [s_walk[0] + sign * o for o in edges_off]
        charges_cum = np.interp(edges_off, offsets_fine, cum)

        for k in range(n_tiles):
            lo = min(edges[k], edges[k + 1])
            hi = max(edges[k], edges[k + 1])
            if direction in ("x+", "x-"):
                trect = (lo, hi, y0, y1)
            else:
                trect = (x0, x1, lo, hi)
            q_exact = charges_cum[k + 1] - charges_cum[k]
            # the walk's first tile also owns the strip's short outer end
            extra_edges = (outer_side,)
            if k == 0 and end_point is not None:
                end_side = {"x+": "west", "x-": "east",
                            "y+": "south", "y-": "north"}[direction]
                extra_edges = (outer_side, end_side)
                q_exact -= end_flux / (2.0 * np.pi)
            running += q_exact
            q_int = int(round(running) - assigned)
            assigned += q_int
            if q_int < 1:
                raise ValidationError(
                    "tile received a non-positive charge; background too thin "
                    "for this tile scale"
                )
            area = (trect[1] - trect[0]) * (trect[3] - trect[2])
            tiles.append(Tile(
                rect=trect,
                m_bar=_tile_mu_average(problem, trect),
                m_i=q_int / area,
                charge=q_int,
                outer_edges=extra_edges,
            ))
    for t in tiles:
        if abs(t.m_i - t.m_bar) >= 0.5 * problem.m_low:
            raise ValidationError(
                f"tile density adjustment too large: |m_i - m_bar| = "
                f"{abs(t.m_i - t.m_bar):.3g} vs m_low/2 = {0.5 * problem.m_low:.3g}"
            )
    return tiles


def _tile_mu_average(problem, rect, n=48):
    x0, x1, y0, y1 = rect
    t = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(x0 + t * (x1 - x0), y0 + t * (y1 - y0), indexing="ij")
    return float(np.asarray(problem.mu(np.column_stack([X.ravel(), Y.ravel()]))).mean())


def _split_subrects(rect, q):
    """Split a rectangle into q equal-area sub-rectangles of aspect <= 2.2.

    Rows-then-columns split; a row with c columns gets height h*c/q so every
    cell has area exactly w*h/q even when q does not factor evenly.
    """
    x0, x1, y0, y1 = rect
    w, h = x1 - x0, y1 - y0

    def layout(rows):
        base = q // rows
        extra = q % rows
        cols = [base + (1 if r < extra else 0) for r in range(rows)]
        if min(cols) == 0:
            return None, np.inf
        worst = 0.0
        for c in cols:
            cw = w / c
            ch = h * c / q
            worst = max(worst, cw / ch, ch / cw)
        return cols, worst

    guess = max(1, int(round(np.sqrt(q * h / w))))
    best = None
    for rows in range(max(1, guess - 1), min(q, guess + 1) + 1):
        cols, worst = layout(rows)
        if cols is not None and (best is None or worst < best[1]):
            best = (rows, worst, cols)
    rows, worst, cols = best
    rects = []
    yy = y0
    for c in cols:
        yy1 = yy + h * c / q
        for k in range(c):
            rects.append((x0 + w * k / c, x0 + w * (k + 1) / c, yy, yy1))
        yy = yy1
    return rects, worst


def _solve_tile(problem, tile):
    """Neumann solve driving the tile's field: -Lap h = 2 pi (m_i - mu)."""

    def rhs_fn(pts):
        return tile.m_i - np.asarray(problem.mu(pts), dtype=float)

    def flux_fn(pts, normal):
        x0, x1, y0, y1 = tile.rect
        side = {(0.0, -1.0): "south", (0.0, 1.0): "north",
                (1.0, 0.0): "east", (-1.0, 0.0): "west"}[tuple(normal)]
        if side in tile.outer_edges:
            return np.asarray(problem.boundary_flux(pts), dtype=float)
        return np.zeros(len(pts))

    # charge quantization leaves a genuine compatibility remainder on the
    # tiles that absorb the walk's fractional carry; it is removed uniformly
    # (a background perturbation well inside the m_low/2 slack) and recorded
    return _neumann_box_solve(tile.rect, TILE_CELLS, rhs_fn, flux_fn,
                              defect_tol=np.inf)


def _solve_point_cell(m_i, rect, point):
    """Smooth part phi of the unit charge's field in its sub-rectangle.

    The full local potential is -log|x - p| + phi with zero total Neumann
    flux; phi solves -Lap phi = -2 pi m_i with the radial kernel's flux on
    the boundary (compatible because the kernel's winding contributes 2 pi
    and m_i times the cell area is exactly one).
    """

    def rhs_fn(pts):
        return np.full(len(pts), -m_i)

    def flux_fn(pts, normal):
        d = pts - point
        r2 = np.maximum((d * d).sum(axis=1), 1e-300)
        return (d @ normal) / r2

    return _neumann_box_solve(rect, SUBRECT_CELLS, rhs_fn, flux_fn)


def _point_cell_energy(sol, rect, point, m_i, eta1):
    """Truncated energy of grad(phi) - (x-p)/|x-p|^2 over the sub-rectangle.

    Decomposed as smooth Dirichlet energy, the own-field annulus (analytic
    inside the largest safe disk, quadrature outside it), and the cross term,
    which integration by parts turns into a boundary loop plus 2 pi phi(p).
    """
    smooth = sol.dirichlet_energy()
    x0, x1, y0, y1 = rect
    d_edge = min(point[0] - x0, x1 - point[0], point[1] - y0, y1 - point[1])
    r_in = 0.5 * d_edge
    own = 2.0 * np.pi * np.log(r_in / eta1)
    X, Y = np.meshgrid(sol.x(), sol.y(), indexing="ij")
    dx = X - point[0]
    dy = Y - point[1]
    r2 = dx * dx + dy * dy
    outside = r2 >= r_in * r_in
    own += float((1.0 / r2[outside]).sum() * sol.cell_area)
    # cross term: 2 int grad(phi) . K = 2 (loop integral + 2 pi phi(p))
    spline = sol.spline()
    phi_p = float(spline(point[0], point[1], grid=False))
    south, east, north, west = sol.meta["flux"]
    xs = sol.x()
    ys = sol.y()
    loop = 0.0
    for pts, normal, ds in (
        (np.column_stack([xs, np.full(sol.nx, y0)]), np.array([0.0, -1.0]), sol.hx),
        (np.column_stack([np.full(sol.ny, x1), ys]), np.array([1.0, 0.0]), sol.hy),
        (np.column_stack([xs, np.full(sol.nx, y1)]), np.array([0.0, 1.0]), sol.hx),
        (np.column_stack([np.full(sol.ny, x0), ys]), np.array([-1.0, 0.0]), sol.hy),
    ):
        d = pts - point
        r2b = np.maximum((d * d).sum(axis=1), 1e-300)
        k_n = -(d @ normal) / r2b
        phi_b = spline(pts[:, 0], pts[:, 1], grid=False)
        loop += float((phi_b * k_n).sum() * ds)
    cross = 2.0 * (loop + 2.0 * np.pi * phi_p)
    return smooth + own + cross


def build_transition(problem, tiles=None):
    """Construct the transition configuration and its screened field."""
    if tiles is None:
        tiles = tile_annulus(problem)
    points = []
    subrects = []
    tile_solutions = []
    point_solutions = []
    energy = 0.0
    for ti, tile in enumerate(tiles):
        sol = _solve_tile(problem, tile)
        tile_solutions.append(sol)
        energy += sol.dirichlet_energy()
        rects, worst = _split_subrects(tile.rect, tile.charge)
        if worst > 2.2:
            raise ValidationError(
                f"sub-rectangle aspect ratio {worst:.2f} exceeds bound in tile {ti}"
            )
        for rect in rects:
            p = np.array([(rect[0] + rect[1]) / 2.0, (rect[2] + rect[3]) / 2.0])
            subrects.append((rect, len(points), ti))
            points.append(p)
            psol = _solve_point_cell(tile.m_i, rect, p)
            point_solutions.append(psol)
            energy += _point_cell_energy(psol, rect, p, tile.m_i, problem.eta1)
    config = PointConfiguration(np.asarray(points).reshape(-1, 2), frame=BLOWN_UP)
    result = ScreeningResult(
        problem=problem,
        tiles=tiles,
        points=config,
        n_tran=len(points),
        energy=energy,
        subrects=subrects,
        tile_solutions=tile_solutions,
        point_solutions=point_solutions,
    )
    result.field = assemble_field(result)
    result.check_separation()
    return result


def predicted_transition_count(problem):
    """Background mass minus flux/2pi over the annulus (the target count)."""
    mass = 0.0
    for rect, direction, outer_side in _strips(problem.center, problem.r1, problem.r2):
        s, mid, density = _strip_line_density(problem, rect, direction, outer_side)
        # density already contains the long-side flux share
        mass += float((density * np.diff(s)).sum())
        end_flux, _ = _short_end_flux(problem, rect, direction)
        mass -= end_flux / (2.0 * np.pi)
    return mass


def assemble_field(result, spacing=None):
    """Evaluate the transition field on one grid over the annulus box.

    Inside each tile the field is the tile solve's gradient plus, inside each
    sub-rectangle, the point's radial kernel and its smooth correction.  The
    field is zero inside the inner square and outside the outer one.
    """
    problem = result.problem
    if spacing is None:
        spacing = problem.tile_scale / TILE_CELLS
    cx, cy = problem.center
    half = problem.r2 / 2.0
    grid = Grid.from_box(cx - half, cx + half, cy - half, cy + half, spacing)
    X, Y = grid.centers()
    values = np.zeros((grid.nx, grid.ny, 2))

    def paint(sol, rect, extra=None):
        x0, x1, y0, y1 = rect
        sel = (X >= x0) & (X < x1) & (Y >= y0) & (Y < y1)
        if not sel.any():
            return
        gx, gy = sol.gradient()
        sx = RectBivariateSpline(sol.x(), sol.y(), gx, kx=1, ky=1)
        sy = RectBivariateSpline(sol.x(), sol.y(), gy, kx=1, ky=1)
        values[sel, 0] += sx(X[sel], Y[sel], grid=False)
        values[sel, 1] += sy(X[sel], Y[sel], grid=False)
        if extra is not None:
            p = extra
            dx = X[sel] - p[0]
            dy = Y[sel] - p[1]
            r2 = np.maximum(dx * dx + dy * dy, 1e-300)
            values[sel, 0] -= dx / r2
            values[sel, 1] -= dy / r2

    for tile, sol in zip(result.tiles, result.tile_solutions):
        paint(sol, tile.rect)
    for (rect, pi, ti), psol in zip(result.subrects, result.point_solutions):
        paint(psol, rect, extra=result.points.points[pi])
    return fieldgrid.GridField(grid, values)


def jitter_family(result, radius_fraction, seed=0):
    """Displace every transition point inside its jitter disk and re-solve.

    The admissible radius is ``radius_fraction / sqrt(m_high)`` with
    ``radius_fraction <= 1/10``, preserving the separation guarantees; the
    per-point solves are redone for the moved charges.
    """
    if radius_fraction > SEPARATION_CONSTANT:
        raise ValidationError("radius_fraction must not exceed 1/10")
    problem = result.problem
    if radius_fraction == 0.0:
        return result
    rng = np.random.default_rng(seed)
    radius = radius_fraction / np.sqrt(problem.m_high)
    theta = rng.uniform(0.0, 2.0 * np.pi, result.n_tran)
    rho = radius * np.sqrt(rng.uniform(0.0, 1.0, result.n_tran))
    moved = result.points.points + np.column_stack(
        [rho * np.cos(theta), rho * np.sin(theta)]
    )
    energy = result.energy
    point_solutions = list(result.point_solutions)
    for (rect, pi, ti), old_sol in zip(result.subrects, result.point_solutions):
        tile = result.tiles[ti]
        p = moved[pi]
        x0, x1, y0, y1 = rect
        if not (x0 < p[0] < x1 and y0 < p[1] < y1):
            raise ValidationError("jitter pushed a point out of its cell")
        energy -= _point_cell_energy(old_sol, rect, result.points.points[pi],
                                     tile.m_i, problem.eta1)
        new_sol = _solve_point_cell(tile.m_i, rect, p)
        point_solutions[pi] = new_sol
        energy += _point_cell_energy(new_sol, rect, p, tile.m_i, problem.eta1)
    jittered = replace(
        result,
        points=PointConfiguration(moved, frame=BLOWN_UP),
        point_solutions=point_solutions,
        energy=energy,
    )
    jittered.field = assemble_field(jittered)
    jittered.check_separation()
    return jittered


def jitter_log_volume(result, radius_fraction):
    """log of the displacement-family volume: n log(pi r^2)."""
    radius = radius_fraction / np.sqrt(result.problem.m_high)
    return result.n_tran * np.log(np.pi * radius * radius)


def flux_callable_from_samples(center, side, values_per_side):
    """Interpolating flux function from per-side sample arrays (s, e, n, w)."""
    half = side / 2.0
    cx, cy = center
    south, east, north, west = [np.asarray(v, dtype=float) for v in values_per_side]

    def interp(coords, samples, lo, hi):
        m = len(samples)
        s = (np.asarray(coords) - lo) / (hi - lo) * m - 0.5
        return np.interp(s, np.arange(m), samples)

    def flux(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.empty(len(pts))
        on_south = np.isclose(pts[:, 1], cy - half)
        on_north = np.isclose(pts[:, 1], cy + half)
        on_east = np.isclose(pts[:, 0], cx + half) & ~on_south & ~on_north
        on_west = np.isclose(pts[:, 0], cx - half) & ~on_south & ~on_north
        out[on_south] = interp(pts[on_south, 0], south, cx - half, cx + half)
        out[on_north] = interp(pts[on_north, 0], north, cx - half, cx + half)
        out[on_east] = interp(pts[on_east, 1], east, cy - half, cy + half)
        out[on_west] = interp(pts[on_west, 1], west, cy - half, cy + half)
        rest = ~(on_south | on_north | on_east | on_west)
        if rest.any():
            raise ValidationError("flux requested off the outer boundary")
        return out

    return flux
