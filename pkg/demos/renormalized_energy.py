"""Two routes to the same energy: pairwise sums vs truncated grid fields.

The second-order energy w_N has a field-theoretic twin: integrate the squared
electric field of points-minus-background, truncated at radius eta around
each point, and add 2 pi N log(eta).  As eta shrinks the two agree; the
difference at finite eta is the energy hidden inside the truncation disks.
"""

import numpy as np

from coulombgas import (
    blowup_density,
    equilibrium_measure,
    quadratic,
    renormalized_energy_profile,
    w_n_pairwise,
)
from coulombgas.energy import exterior_field_energy
from coulombgas.grids import Window
from coulombgas.points import PointConfiguration

potential = quadratic()
eq = equilibrium_measure(potential, grid=0.02, tol=5e-5, max_iter=800)
n = 32
mu_p = blowup_density(eq, n)
rng = np.random.default_rng(3)
config = PointConfiguration(eq.sample(rng, n) * np.sqrt(n), frame="blown_up")

w = w_n_pairwise(config, mu_p)
print(f"pairwise w_N = {w:.4f}   (N = {n}, min gap "
      f"{config.min_gap():.3f} in blown-up units)")

window = Window((0.0, 0.0), 9.0)
exterior = exterior_field_energy(config, mu_p, window)
etas = [0.1, 0.05, 0.02, 0.01, 0.005]
profile = renormalized_energy_profile(config, mu_p, window, etas)
print(f"\n{'eta':>7} {'field energy / 2 pi':>20} {'gap vs w_N':>12}")
for eta in etas:
    value = (profile[eta] + exterior) / (2 * np.pi)
    print(f"{eta:>7} {value:>20.4f} {value - w:>12.4f}")

small = np.array([0.02, 0.013, 0.008])
prof = renormalized_energy_profile(config, mu_p, window, list(small))
vals = np.array([prof[e] + exterior for e in small]) / (2 * np.pi)
intercept = np.polyfit(small, vals, 1)[1]
print(f"\nlinear-in-eta extrapolation to eta = 0: {intercept:.4f} "
      f"(gap {intercept - w:+.4f}, {abs(intercept - w) / abs(w):.3%})")
print("the leading finite-eta defect is the positive charge-background")
print(f"cross term ~ N eta^2: at eta = 0.1 that is ~ {n * 0.01:.2f}")
