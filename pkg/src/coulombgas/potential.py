"""Confining potentials, equilibrium measures, and the effective potential.

The equilibrium measure of a smooth confining potential V is supported where
the variational quantity ``phi = (-log * mu) + V/2`` is at its minimum level
and has density ``Laplacian(V) / (4 pi)`` there.  The solver below iterates on
the support: starting from the cells where V is smallest, it repeatedly
re-selects the sublevel set of phi holding unit mass until phi is constant on
the support to tolerance.  The marginal cell carries a fractional weight so
the total mass is exactly one at every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import logkernel
from .errors import NonConvergenceError, ValidationError
from .grids import Grid, overlap_lengths

SUPPORT_THRESHOLD = 1e-12  # density below this is masked out


def _as_points(x):
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


@dataclass
class Potential:
    """Confining potential with an explicit gradient.

    ``evaluate`` and ``gradient`` accept an (n, 2) array of positions (a bare
    2-vector is promoted).  ``kappa`` is the declared Hölder exponent of the
    equilibrium density (1 for C^{2,1} potentials); ``bounding_box`` is the
    half-side of the square on which all gridded computations happen.
    """

    evaluate: callable
    gradient: callable
    kappa: float = 1.0
    name: str = "custom"
    bounding_box: float = 2.2

    def __post_init__(self):
        if not (0.0 < self.kappa <= 1.0):
            raise ValidationError("kappa must lie in (0, 1]")
        if self.bounding_box <= 0:
            raise ValidationError("bounding_box must be positive")

    def __call__(self, points):
        return self.evaluate(_as_points(points))

    def validate(self):
        """Check finiteness on the box and the confinement growth proxy."""
        L = self.bounding_box
        xs = np.linspace(-L, L, 21)
        X, Y = np.meshgrid(xs, xs)
        vals = self.evaluate(np.column_stack([X.ravel(), Y.ravel()]))
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"potential '{self.name}' is not finite on its box")
        # growth proxy: V/2 - log|x| larger at the corners than on a reference
        # ring (the literal value at the origin is +inf, so a ring stands in)
        corners = np.array([[L, L], [L, -L], [-L, L], [-L, -L]])
        gc = self.evaluate(corners) / 2.0 - np.log(np.hypot(corners[:, 0], corners[:, 1]))
        r = min(1.0, L / 4.0)
        theta = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        ring = r * np.column_stack([np.cos(theta), np.sin(theta)])
        gr = self.evaluate(ring) / 2.0 - np.log(r)
        if not np.all(gc.min() > gr.max()):
            raise ValidationError(
                f"potential '{self.name}' fails the confinement growth check"
            )
        return True


def quadratic(coefficient=1.0):
    """V(x) = coefficient * |x|^2; equilibrium: disk of radius 1/sqrt(c)."""
    c = float(coefficient)
    if c <= 0:
        raise ValidationError("coefficient must be positive")
    return Potential(
        evaluate=lambda p: c * (np.asarray(p)[..., 0] ** 2 + np.asarray(p)[..., 1] ** 2),
        gradient=lambda p: 2.0 * c * np.asarray(p, dtype=float),
        kappa=1.0,
        name=f"quadratic[{c:g}]",
        bounding_box=2.2 / np.sqrt(c),
    )


def quartic(coefficient=1.0):
    """V(x) = coefficient * |x|^4."""
    c = float(coefficient)
    if c <= 0:
        raise ValidationError("coefficient must be positive")

    def _eval(p):
        p = np.asarray(p, dtype=float)
        return c * (p[..., 0] ** 2 + p[..., 1] ** 2) ** 2

    def _grad(p):
        p = np.asarray(p, dtype=float)
        r2 = (p[..., 0] ** 2 + p[..., 1] ** 2)[..., None]
        return 4.0 * c * r2 * p

    return Potential(_eval, _grad, kappa=1.0, name=f"quartic[{c:g}]",
                     bounding_box=1.9 / c ** 0.25)


def make_potential(name, **params):
    """Construct a registered potential by name (used by the CLI)."""
    registry = {"quadratic": quadratic, "quartic": quartic}
    if name not in registry:
        raise ValidationError(f"unknown potential '{name}'; known: {sorted(registry)}")
    return registry[name](**params)


@dataclass
class EquilibriumMeasure:
    """Gridded probability density with an explicit support mask."""

    grid: Grid
    density: np.ndarray
    support_mask: np.ndarray
    total_mass: float
    el_residual: float = float("nan")
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def max_density(self):
        return float(self.density.max())

    def validate(self, expected_mass=1.0, tol=1e-8):
        if np.any(self.density < 0):
            raise ValidationError("equilibrium density has negative cells")
        if np.any((self.density > 0) & ~self.support_mask):
            raise ValidationError("positive density off the support mask")
        mass = float(self.density.sum() * self.grid.cell_area)
        if abs(mass - expected_mass) > tol * max(1.0, abs(expected_mass)):
            raise ValidationError(
                f"total mass {mass!r} differs from expected {expected_mass!r}"
            )
        if not np.isfinite(self.max_density):
            raise ValidationError("density is unbounded")
        return True

    def interior_mask(self):
        """Support cells all of whose 8 neighbours are also in the support."""
        m = self.support_mask
        inner = m.copy()
        inner[1:, :] &= m[:-1, :]
        inner[:-1, :] &= m[1:, :]
        inner[:, 1:] &= m[:, :-1]
        inner[:, :-1] &= m[:, 1:]
        inner[1:, 1:] &= m[:-1, :-1]
        inner[:-1, :-1] &= m[1:, 1:]
        inner[1:, :-1] &= m[:-1, 1:]
        inner[:-1, 1:] &= m[1:, :-1]
        inner[0, :] = inner[-1, :] = False
        inner[:, 0] = inner[:, -1] = False
        return inner

    def support_cells(self):
        """Centers (x, y) and masses of the occupied cells."""
        if "support_cells" not in self._cache:
            X, Y = self.grid.centers()
            m = self.support_mask
            self._cache["support_cells"] = (
                X[m].copy(), Y[m].copy(), (self.density[m] * self.grid.cell_area).copy()
            )
        return self._cache["support_cells"]

    def log_potential_grid(self):
        """(-log * density) at all cell centers of the own grid (cached)."""
        if "logpot" not in self._cache:
            self._cache["logpot"] = logkernel.log_potential_grid(
                self.density, self.grid.spacing
            )
        return self._cache["logpot"]

    def log_potential_at(self, points):
        sx, sy, masses = self.support_cells()
        return logkernel.log_potential_at_points(
            points, sx, sy, masses, self.grid.spacing
        )

    def log_self_energy(self):
        """Double integral of -log|x - y| against the density twice (cached)."""
        if "selfenergy" not in self._cache:
            U = self.log_potential_grid()
            self._cache["selfenergy"] = float(
                (U * self.density).sum() * self.grid.cell_area
            )
        return self._cache["selfenergy"]

    def mass_in_rect(self, x0, x1, y0, y1):
        """Exact mass of the cell-wise constant density inside a rectangle."""
        h = self.grid.spacing
        wx = overlap_lengths(x0, x1, self.grid.x(), h)
        wy = overlap_lengths(y0, y1, self.grid.y(), h)
        return float(wx @ self.density @ wy)

    def mass_in_window(self, window):
        return self.mass_in_rect(*window.bounds())

    def density_at(self, points):
        """Cell-wise constant density value at arbitrary points (0 outside)."""
        pts = _as_points(points)
        i, j = self.grid.index_of(pts)
        ok = (i >= 0) & (i < self.grid.nx) & (j >= 0) & (j < self.grid.ny)
        out = np.zeros(len(pts))
        out[ok] = self.density[i[ok], j[ok]]
        return out

    def sample(self, rng, n):
        """Draw n i.i.d. points from the density (cell choice + in-cell jitter)."""
        sx, sy, masses = self.support_cells()
        p = masses / masses.sum()
        idx = rng.choice(len(p), size=n, p=p)
        h = self.grid.spacing
        pts = np.column_stack([sx[idx], sy[idx]])
        pts += rng.uniform(-h / 2.0, h / 2.0, size=(n, 2))
        return pts


@dataclass
class EffectivePotential:
    """zeta = (-log * mu) + V/2, normalised to vanish on the support."""

    grid: Grid
    values: np.ndarray
    support_mask: np.ndarray
    level: float               # the subtracted constant
    interior_residual: float   # max |zeta| over interior support cells
    _measure: EquilibriumMeasure = field(repr=False, default=None)
    _potential: Potential = field(repr=False, default=None)

    def validate(self, support_tol=1e-3, sign_tol=1e-6):
        if np.any(self.values < -sign_tol):
            raise ValidationError("effective potential dips below -tolerance")
        m = self._measure.interior_mask() if self._measure is not None else self.support_mask
        if np.any(np.abs(self.values[m]) > support_tol):
            raise ValidationError("effective potential not flat on the support")
        return True

    def evaluate_at(self, points):
        """zeta at arbitrary points via direct quadrature (not interpolation)."""
        pts = _as_points(points)
        u = self._measure.log_potential_at(pts)
        v = self._potential.evaluate(pts)
        return u + v / 2.0 - self.level


def _laplacian(values, h):
    lap = np.zeros_like(values)
    lap[1:-1, 1:-1] = (
        values[2:, 1:-1] + values[:-2, 1:-1]
        + values[1:-1, 2:] + values[1:-1, :-2]
        - 4.0 * values[1:-1, 1:-1]
    ) / (h * h)
    lap[0, :] = lap[1, :]
    lap[-1, :] = lap[-2, :]
    lap[:, 0] = lap[:, 1]
    lap[:, -1] = lap[:, -2]
    return lap


def _select_support(order, masses, target=1.0):
    """Weights in [0, 1] picking cells along ``order`` until mass == target."""
    cum = np.cumsum(masses[order])
    k = int(np.searchsorted(cum, target))
    if k >= len(order):
        raise ValidationError(
            "candidate density mass below 1: enlarge the grid or the potential's box"
        )
    w = np.zeros(len(masses))
    w[order[:k]] = 1.0
    prev = cum[k - 1] if k > 0 else 0.0
    w[order[k]] = (target - prev) / masses[order[k]]
    return w


def _project_unit_mass(values, cell_area):
    """Euclidean projection onto {rho >= 0, sum rho * cell_area = 1}."""
    v = values.ravel()
    u = np.sort(v)[::-1]
    cum = np.cumsum(u)
    k = np.arange(1, len(u) + 1)
    tau_k = (cum - 1.0 / cell_area) / k
    feasible = np.nonzero(u > tau_k)[0]
    if len(feasible) == 0:
        raise ValidationError("mass projection failed: all-negative candidate")
    kk = feasible[-1] + 1
    tau = (cum[kk - 1] - 1.0 / cell_area) / kk
    return np.maximum(values - tau, 0.0)


def equilibrium_measure(potential, grid=None, tol=1e-4, max_iter=400):
    """Solve for the equilibrium measure of ``potential`` on a grid.

    ``grid`` is a :class:`Grid` or a cell spacing (the box then comes from the
    potential's declared bounding box).

    The gridded problem is the convex program: minimise the discrete energy
    ``rho^T K rho + V . rho`` over cell densities with unit mass, where K is
    the exactly integrated -log kernel.  Its optimality condition is the
    Euler-Lagrange characterisation: ``phi = (-log * rho) + V/2`` constant on
    the support.  The solve starts from the cells of smallest V carrying
    density ``Laplacian(V)/(4 pi)`` and runs spectrally preconditioned
    projected gradient steps (Barzilai-Borwein lengths) until phi is flat on
    the support to ``tol`` (sup norm, relative to the level); the flattest
    iterate seen is the one returned.

    Raises :class:`NonConvergenceError` with the final residual if the target
    is not reached, and :class:`ValidationError` if ``Laplacian(V)`` is
    nowhere positive (no equilibrium density of this form on the grid).
    """
    if grid is None:
        grid = 0.01
    if not isinstance(grid, Grid):
        L = potential.bounding_box
        grid = Grid.from_box(-L, L, -L, L, float(grid))

    h = grid.spacing
    cell_area = grid.cell_area
    X, Y = grid.centers()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    V = potential.evaluate(pts).reshape(grid.shape)
    if not np.all(np.isfinite(V)):
        raise ValidationError("potential not finite on the requested grid")
    # the solve depends on V only through differences; canonicalize the gauge
    # (subtract the minimum, round at relative 2^-26) so adding a constant to
    # V reproduces the iteration bit for bit
    V = V - V.min()
    quantum = max(float(V.max()), 1.0) * 2.0 ** -26
    V = np.round(V / quantum) * quantum

    f = _laplacian(V, h) / (4.0 * np.pi)
    np.clip(f, 0.0, None, out=f)
    if f.max() <= 0.0:
        raise ValidationError("Laplacian(V) is nowhere positive: no equilibrium density")

    # warm start: cells of smallest V, candidate density Laplacian(V)/(4 pi)
    candidate = f.ravel()
    order0 = np.argsort(np.where(candidate > 0, V.ravel(), np.inf), kind="stable")
    rho = (candidate * _select_support(order0, candidate * cell_area)).reshape(grid.shape)

    def residual_of(phi, support):
        level = float((phi[support]).mean())
        spread = float(phi[support].max() - phi[support].min())
        return spread / max(1.0, abs(level))

    best = None
    step = 500.0
    rho_prev = None
    grad_prev = None
    for _ in range(max_iter):
        U = logkernel.log_potential_grid(rho, h)
        phi = U + V / 2.0
        grad = 2.0 * cell_area * phi
        support = rho > 0
        res = residual_of(phi, support)
        if best is None or res < best[0]:
            best = (res, rho.copy())
        if res <= tol:
            break
        if rho_prev is not None:
            dr = (rho - rho_prev).ravel()
            dg = (grad - grad_prev).ravel()
            denom = dr @ dg
            step = float(np.clip((dr @ dr) / denom, 1.0, 1e5)) if denom > 0 else 500.0
        rho_prev = rho.copy()
        grad_prev = grad.copy()
        rho = _project_unit_mass(rho - step * grad, cell_area)
    else:
        if best[0] > tol:
            raise NonConvergenceError(
                f"equilibrium solve did not reach tolerance: residual {best[0]:.3e} "
                f"after {max_iter} iterations (tol {tol:.1e})",
                residual=best[0],
            )

    density = best[1]
    density /= density.sum() * cell_area
    density[density < SUPPORT_THRESHOLD] = 0.0
    mask = density > 0.0
    eq = EquilibriumMeasure(
        grid=grid,
        density=density,
        support_mask=mask,
        total_mass=float(density.sum() * cell_area),
        el_residual=float(best[0]),
    )
    eq.validate()
    return eq


def effective_potential(potential, eq):
    """Effective potential zeta of the pair (V, mu): zero on the support.

    The normalising constant is the grid-wide minimum of the variational
    quantity ``(-log * mu) + V/2``.  For a converged equilibrium measure of a
    confining potential that minimum sits on the support, so zeta vanishes
    there (within the solver residual) and is non-negative everywhere exactly
    by construction.
    """
    grid = eq.grid
    X, Y = grid.centers()
    V = potential.evaluate(np.column_stack([X.ravel(), Y.ravel()])).reshape(grid.shape)
    phi = eq.log_potential_grid() + V / 2.0
    level = float(phi.min())
    values = phi - level
    inner = eq.interior_mask()
    region = inner if inner.any() else eq.support_mask
    return EffectivePotential(
        grid=grid,
        values=values,
        support_mask=eq.support_mask,
        level=level,
        interior_residual=float(np.abs(values[region]).max()),
        _measure=eq,
        _potential=potential,
    )


def blowup_density(eq, n):
    """Rescale lengths by sqrt(n): same density values, total mass n."""
    if n < 1:
        raise ValidationError("particle count must be at least 1")
    s = float(np.sqrt(n))
    blown = EquilibriumMeasure(
        grid=eq.grid.scaled(s),
        density=eq.density,
        support_mask=eq.support_mask,
        total_mass=eq.total_mass * n,
        el_residual=eq.el_residual,
    )
    return blown
