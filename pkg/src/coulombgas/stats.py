"""Mesoscopic statistics: discrepancy, local laws, empirical fields, deltas.

Everything here works in the blown-up frame, where the background density is
order one and the typical inter-particle distance is order one.  Windows are
squares C(z, R) of side R around a center z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .energy import renormalized_energy
from .errors import ValidationError
from .grids import Window
from .points import BLOWN_UP, MACROSCOPIC, PointConfiguration


def blow_up(config, n):
    """Scale positions by sqrt(n) and flip the frame tag."""
    config.require_frame(MACROSCOPIC)
    if n < 1:
        raise ValidationError("particle count must be at least 1")
    return PointConfiguration(config.points * np.sqrt(n), frame=BLOWN_UP)


def blow_down(config, n):
    """Inverse of :func:`blow_up`."""
    config.require_frame(BLOWN_UP)
    return PointConfiguration(config.points / np.sqrt(n), frame=MACROSCOPIC)


def _require_window_inside(mu_prime, window):
    x0, x1, y0, y1 = window.bounds()
    if not mu_prime.grid.contains_box(x0, x1, y0, y1):
        raise ValidationError("window exceeds the background measure's grid")


def discrepancy(config, mu_prime, window):
    """Point count in the window minus the background mass there."""
    config.require_frame(BLOWN_UP)
    _require_window_inside(mu_prime, window)
    count = int(window.contains_points(config.points).sum()) if config.n else 0
    return count - mu_prime.mass_in_window(window)


def discrepancy_energy_check(config, mu_prime, window, eta=0.5):
    """Left and right sides of the discrepancy-energy inequality.

    lhs = D^2 min(1, D_+ / R^2) with D the discrepancy in the window (the
    cubic regime only bites for a positive excess); rhs = the field energy
    over the doubled window at truncation eta, without counterterm.  Callers
    assert lhs <= C rhs for a calibrated constant C.
    """
    d = discrepancy(config, mu_prime, window)
    r_sq = window.side ** 2
    lhs = d * d * min(1.0, max(d, 0.0) / r_sq)
    doubled = Window(window.center, 2.0 * window.half_side)
    rhs = renormalized_energy(config, mu_prime, doubled, eta, counterterm=False)
    return lhs, rhs


@dataclass
class BumpFunction:
    """C^1 bump with exactly known sup norms, supported in a disk/square.

    ``radius`` is the support radius (radial kind) or half-width (tensor
    kind); both have height 1 at the center and gradient sup norm
    ``pi / (2 radius)``.
    """

    center: tuple
    radius: float
    kind: str = "radial_cosine"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("bump radius must be positive")
        if self.kind not in ("radial_cosine", "tensor_cosine"):
            raise ValidationError("unknown bump kind")

    @property
    def sup_norm(self):
        return 1.0

    @property
    def grad_sup_norm(self):
        return np.pi / (2.0 * self.radius)

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        if self.kind == "radial_cosine":
            r = np.hypot(dx, dy)
            inside = r < self.radius
            out = np.zeros(len(pts))
            out[inside] = 0.5 * (1.0 + np.cos(np.pi * r[inside] / self.radius))
            return out
        bx = np.where(np.abs(dx) < self.radius,
                      0.5 * (1.0 + np.cos(np.pi * dx / self.radius)), 0.0)
        by = np.where(np.abs(dy) < self.radius,
                      0.5 * (1.0 + np.cos(np.pi * dy / self.radius)), 0.0)
        return bx * by


@dataclass
class LocalLawReport:
    n: int
    delta: float
    delta1: float
    statistic: float
    discrepancy: float
    window: Window
    test_function: str


def local_law_statistic(config, mu_prime, z0, delta, n, test_function="radial_cosine",
                        delta1=float("nan")):
    """Rescaled linear statistic n^{-2 delta} |sum f(x_i) - integral f dmu|.

    ``f`` is a bump from the fixed library, scaled to fill the window
    C(z0, n^delta); its sup norms are exact by construction.  The integral
    against the background uses cell-midpoint quadrature.
    """
    config.require_frame(BLOWN_UP)
    side = float(n) ** delta
    window = Window.of_side(z0, side)
    _require_window_inside(mu_prime, window)
    if isinstance(test_function, BumpFunction):
        bump = test_function
        half = bump.radius if bump.kind == "radial_cosine" else bump.radius
        if (abs(bump.center[0] - z0[0]) + half > side / 2.0 + 1e-9
                or abs(bump.center[1] - z0[1]) + half > side / 2.0 + 1e-9):
            raise ValidationError("test function support exceeds the window")
    else:
        bump = BumpFunction(tuple(z0), side / 2.0, kind=test_function)
    point_sum = float(bump(config.points).sum()) if config.n else 0.0
    cx, cy, masses = mu_prime.support_cells()
    background = float((bump(np.column_stack([cx, cy])) * masses).sum())
    stat = float(n) ** (-2.0 * delta) * abs(point_sum - background)
    return LocalLawReport(
        n=n,
        delta=delta,
        delta1=delta1,
        statistic=stat,
        discrepancy=discrepancy(config, mu_prime, window),
        window=window,
        test_function=bump.kind,
    )


@dataclass
class FieldStatistics:
    """Translation-averaged summaries of a windowed configuration."""

    window: Window
    stride: float
    n_translates: int
    disk_radii: np.ndarray
    count_mean: np.ndarray
    count_var: np.ndarray
    nn_bin_edges: np.ndarray
    nn_density: np.ndarray
    pair_bin_edges: np.ndarray
    pair_correlation: np.ndarray
    intensity: float


def empirical_field_stats(config, z0, delta1, n, translation_stride=1.0,
                          disk_radii=None, pair_radius=5.0):
    """Finite-stride version of the translation-averaged empirical field.

    Scans a stride grid of translation centers inside C(z0, n^delta1) and
    aggregates: counts in disks (number-variance curve), nearest-neighbour
    distances, and the pair correlation up to ``pair_radius``.
    """
    config.require_frame(BLOWN_UP)
    side = float(n) ** delta1
    window = Window.of_side(z0, side)
    inside = window.contains_points(config.points)
    pts = config.points[inside]
    if len(pts) < 10:
        raise ValidationError("fewer than 10 points in the averaging window")
    intensity = len(pts) / window.area

    if disk_radii is None:
        r_max = min(side / 4.0, 8.0)
        disk_radii = np.linspace(0.5, max(r_max, 1.0), 8)
    disk_radii = np.asarray(disk_radii, dtype=float)

    tree = cKDTree(pts)
    x0, x1, y0, y1 = window.bounds()
    r_big = disk_radii.max()
    gx = np.arange(x0 + r_big, x1 - r_big + 1e-9, translation_stride)
    gy = np.arange(y0 + r_big, y1 - r_big + 1e-9, translation_stride)
    if len(gx) == 0 or len(gy) == 0:
        raise ValidationError("window too small for the requested disk radii")
    centers = np.column_stack([g.ravel() for g in np.meshgrid(gx, gy, indexing="ij")])

    count_mean = np.empty(len(disk_radii))
    count_var = np.empty(len(disk_radii))
    for k, r in enumerate(disk_radii):
        counts = tree.query_ball_point(centers, r, return_length=True)
        count_mean[k] = counts.mean()
        count_var[k] = counts.var()

    # nearest neighbours, restricted to points whose ball stays in the window
    nn = tree.query(pts, k=2)[0][:, 1]
    edge_dist = np.minimum.reduce([
        pts[:, 0] - x0, x1 - pts[:, 0], pts[:, 1] - y0, y1 - pts[:, 1]
    ])
    valid = nn <= edge_dist
    nn_edges = np.linspace(0.0, 3.0 / np.sqrt(intensity), 25)
    nn_hist, _ = np.histogram(nn[valid], bins=nn_edges, density=True)

    # pair correlation: centers eroded by the maximal pair radius
    eroded = edge_dist >= pair_radius
    pair_edges = np.linspace(0.0, pair_radius, 26)
    if eroded.sum() >= 2:
        dd = tree.query_ball_point(pts[eroded], pair_radius)
        dists = []
        for i, neigh in zip(np.nonzero(eroded)[0], dd):
            for j in neigh:
                if j != i:
                    dists.append(np.linalg.norm(pts[i] - pts[j]))
        hist, _ = np.histogram(dists, bins=pair_edges)
        shell = np.pi * (pair_edges[1:] ** 2 - pair_edges[:-1] ** 2)
        norm = eroded.sum() * intensity * shell
        pair_corr = hist / np.maximum(norm, 1e-300)
    else:
        pair_corr = np.zeros(len(pair_edges) - 1)

    return FieldStatistics(
        window=window,
        stride=translation_stride,
        n_translates=len(centers),
        disk_radii=disk_radii,
        count_mean=count_mean,
        count_var=count_var,
        nn_bin_edges=nn_edges,
        nn_density=nn_hist,
        pair_bin_edges=pair_edges,
        pair_correlation=pair_corr,
        intensity=intensity,
    )


@dataclass
class DeltaSchedule:
    """Exponent schedule delta > delta1 > delta2 > delta3 with its constants."""

    delta: float
    delta1: float
    delta2: float
    delta3: float
    gamma: float
    alpha: float
    kappa: float

    def validate(self):
        d, d1, d2, d3 = self.delta, self.delta1, self.delta2, self.delta3
        checks = [
            0.0 < d3 < d2 < d1 < d,
            d1 > 2.0 * d / 3.0,
            3.0 * d3 > d,
            d1 + 3.0 * d3 + self.kappa * (d3 - 0.5) < 2.0 * d1,
            2.0 * d - d2 < 2.0 * d1,
            2.0 * d < d2 + 3.0 * d3,
        ]
        if not all(checks):
            raise ValidationError(f"delta schedule violates its inequalities: {self}")
        return True


def delta1_lower_bound(delta, kappa):
    """Smallest admissible delta1 for a given (delta, kappa)."""
    gamma = np.sqrt((1.0 + kappa / 2.0) / (1.0 + kappa / 3.0))
    alpha = (gamma - 1.0) / (1.0 - gamma / 3.0)
    return max(
        0.75 * delta,
        delta * (1.0 - alpha) / (1.0 - alpha * alpha),
        delta * (1.0 + kappa / 2.0) - kappa / 2.0,
    )


def choose_deltas(delta, kappa, delta1_position=0.5):
    """Build the full exponent schedule for one bootstrap step.

    ``delta1`` sits at the given position inside its admissible interval;
    ``delta3 = delta gamma / 3`` and ``delta2`` interpolates between delta3
    and delta1 with weight alpha^2.  All schedule inequalities are asserted.
    """
    if not (0.0 < delta <= 0.5):
        raise ValidationError("delta must lie in (0, 1/2]")
    if not (0.0 < kappa <= 1.0):
        raise ValidationError("kappa must lie in (0, 1]")
    if not (0.0 < delta1_position < 1.0):
        raise ValidationError("delta1_position must lie in (0, 1)")
    gamma = float(np.sqrt((1.0 + kappa / 2.0) / (1.0 + kappa / 3.0)))
    alpha = float((gamma - 1.0) / (1.0 - gamma / 3.0))
    delta3 = delta * gamma / 3.0
    lower = delta1_lower_bound(delta, kappa)
    delta1 = lower + delta1_position * (delta - lower)
    # the nominal lower bound leaves the inequality 2 delta < delta2 + 3 delta3
    # without margin in a sliver near the endpoint; nudge delta1 above the
    # sharp threshold delta (3 - a - a^2 - a^3)/((3 + a)(1 - a^2)) there
    sharp = delta * (3.0 - alpha - alpha ** 2 - alpha ** 3) / (
        (3.0 + alpha) * (1.0 - alpha * alpha)
    )
    delta1 = max(delta1, sharp + 1e-9 * delta)
    delta2 = alpha * alpha * delta3 + (1.0 - alpha * alpha) * delta1
    schedule = DeltaSchedule(
        delta=delta, delta1=delta1, delta2=delta2, delta3=delta3,
        gamma=gamma, alpha=alpha, kappa=kappa,
    )
    schedule.validate()
    return schedule


def points_in_square_check(config, mu_prime, z0, delta1, n):
    """Observed vs predicted count in the square C(z0, n^delta1).

    Returns ``(count, prediction, gap_ratio)`` with the prediction
    ``density(z0) * R^2`` and the gap measured against ``n^{2 delta1}``.
    """
    config.require_frame(BLOWN_UP)
    side = float(n) ** delta1
    window = Window.of_side(z0, side)
    _require_window_inside(mu_prime, window)
    count = int(window.contains_points(config.points).sum()) if config.n else 0
    density = float(mu_prime.density_at(np.asarray(z0, dtype=float)[None, :])[0])
    prediction = density * side * side
    gap_ratio = abs(count - prediction) / float(n) ** (2.0 * delta1)
    return count, prediction, gap_ratio
