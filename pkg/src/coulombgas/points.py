"""Finite planar point configurations with an explicit coordinate frame."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .errors import CoincidentPointsError, ValidationError

MACROSCOPIC = "macroscopic"
BLOWN_UP = "blown_up"
FRAMES = (MACROSCOPIC, BLOWN_UP)


@dataclass
class PointConfiguration:
    """An ordered list of planar positions tagged with its frame."""

    points: np.ndarray
    frame: str = MACROSCOPIC
    jittered: tuple = field(default=())

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValidationError("points must be an (n, 2) array")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points contain non-finite coordinates")
        if self.frame not in FRAMES:
            raise ValidationError(f"frame must be one of {FRAMES}")
        self.points = pts

    @property
    def n(self):
        return len(self.points)

    def min_gap(self):
        if self.n < 2:
            return np.inf
        return float(pdist(self.points).min())

    def require_distinct(self):
        if self.n >= 2 and self.min_gap() <= 0.0:
            raise CoincidentPointsError(
                "configuration has coincident points (infinite energy)"
            )

    def require_frame(self, frame):
        if self.frame != frame:
            raise ValidationError(
                f"expected a {frame} configuration, got {self.frame}"
            )

    def translated(self, shift):
        return PointConfiguration(self.points + np.asarray(shift, dtype=float),
                                  frame=self.frame)
