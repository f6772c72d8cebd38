"""The screening construction, step by step.

Given the normal flux of a field on the outer boundary of a square annulus,
screening builds a point configuration and a field inside the annulus that
reproduce that flux exactly, have zero flux on the inner boundary, and cost
a controlled amount of energy.  The interior is thereby decoupled: anything
with zero outward flux glues onto the inner boundary.
"""

import numpy as np

from coulombgas import ScreeningProblem, build_transition, tile_annulus
from coulombgas.screening import (
    jitter_family,
    jitter_log_volume,
    predicted_transition_count,
)

el = 8.0
r1, r2 = 4.0 * el, 6.0 * el


def background(p):
    p = np.atleast_2d(p)
    return 1.0 + 0.1 * np.sin(p[:, 0] / 5.0) * np.cos(p[:, 1] / 7.0)


def boundary_flux(p):
    p = np.atleast_2d(p)
    return 0.03 * np.sin(2.0 * np.pi * (p[:, 0] + 0.3 * p[:, 1]) / r2)


problem = ScreeningProblem(
    center=(0.0, 0.0), r1=r1, r2=r2, tile_scale=el,
    mu=background, m_low=0.9, m_high=1.1,
    boundary_flux=boundary_flux, eta1=1e-20,
    c_mu=0.1 * np.sqrt(1 / 25 + 1 / 49), kappa=1.0,
)

m_energy = problem.check_gate()
print(f"step 0  flux energy M = {m_energy:.4f} passes the smallness gate "
      f"(bound {0.01 * min(problem.m_low ** 2, 1) * el ** 3:.2f})")

tiles = tile_annulus(problem)
charges = [t.charge for t in tiles]
print(f"step 1  annulus tiled into {len(tiles)} rectangles, integer charges "
      f"{min(charges)}..{max(charges)}, total {sum(charges)}")
print(f"        target count from mass and flux: "
      f"{predicted_transition_count(problem):.3f}")
print(f"        largest density adjustment |m_i - mean| = "
      f"{max(abs(t.m_i - t.m_bar) for t in tiles):.4f} "
      f"(allowed {problem.m_low / 2})")

result = build_transition(problem, tiles)
print(f"step 2  one Neumann solve per tile and per point cell: "
      f"{result.n_tran} transition points placed")
print(f"        min separation {result.min_separation():.3f}, boundary "
      f"clearance {result.boundary_clearance():.3f} "
      f"(floor {0.1 / np.sqrt(problem.m_high):.3f})")
print(f"step 3  assembled field energy {result.energy:.1f} "
      f"(dominated by {result.n_tran} x 2 pi log(1/eta1) = "
      f"{result.n_tran * 2 * np.pi * np.log(1 / problem.eta1):.1f})")

moved = jitter_family(result, 0.1, seed=1)
print(f"step 4  the family: each point may move in a disk of radius "
      f"{0.1 / np.sqrt(problem.m_high):.3f};")
print(f"        jittered energy {moved.energy:.1f}, separation still "
      f"{moved.min_separation():.3f}")
print(f"        log phase-space volume of the family: "
      f"{jitter_log_volume(result, 0.1):.1f}")
