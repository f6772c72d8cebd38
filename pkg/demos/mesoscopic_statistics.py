"""Mesoscopic windows: discrepancy, local laws, and number variance.

Coulomb samples are hyperuniform: the count fluctuation in a window grows
like its perimeter, not its area, and rescaled linear statistics vanish at
every mesoscopic scale.  Poisson points make a good foil.
"""

import numpy as np

from coulombgas import (
    SamplerConfig,
    blowup_density,
    discrepancy,
    empirical_field_stats,
    equilibrium_measure,
    local_law_statistic,
    quadratic,
    sample_gibbs,
)
from coulombgas.grids import Window
from coulombgas.points import PointConfiguration

potential = quadratic()
eq = equilibrium_measure(potential, grid=0.02, tol=1e-4, max_iter=600)
n = 256
cfg = SamplerConfig(n=n, beta=2.0, n_sweeps=2200, burn_in_sweeps=200,
                    thin=25, seed=99)
chain = sample_gibbs(cfg, potential, eq=eq)
mu_p = blowup_density(eq, n)

print("discrepancy in centered squares, per sample (count minus mass):")
for side in (4.0, 8.0, 12.0):
    window = Window.of_side((0.0, 0.0), side)
    values = [discrepancy(
        PointConfiguration(s.points * np.sqrt(n), frame="blown_up"),
        mu_p, window) for s in chain.samples]
    print(f"  side {side:5.1f}: median |D| = {np.median(np.abs(values)):.2f} "
          f"(window mass {mu_p.mass_in_window(window):.1f})")

print("\nrescaled bump statistic at delta = 0.4 (local law: should be small):")
values = []
for s in chain.samples:
    config = PointConfiguration(s.points * np.sqrt(n), frame="blown_up")
    values.append(local_law_statistic(config, mu_p, (0.0, 0.0), 0.4, n).statistic)
print(f"  median over {len(values)} samples: {np.median(values):.5f}")

print("\nnumber variance in disks (Coulomb vs Poisson):")
sample = PointConfiguration(chain.samples[-1].points * np.sqrt(n),
                            frame="blown_up")
coulomb = empirical_field_stats(sample, (0.0, 0.0), 0.45, n,
                                translation_stride=1.0,
                                disk_radii=np.array([1.0, 2.0, 4.0]))
rng = np.random.default_rng(1)
side = coulomb.window.side
pois = rng.uniform(-side / 2, side / 2,
                   size=(rng.poisson(side * side / np.pi), 2))
poisson = empirical_field_stats(
    PointConfiguration(pois, frame="blown_up"), (0.0, 0.0), 0.45, n,
    translation_stride=1.0, disk_radii=np.array([1.0, 2.0, 4.0]))
print(f"  {'radius':>8} {'Coulomb var':>12} {'Poisson var':>12} {'disk mass':>10}")
for r, cv, pv in zip(coulomb.disk_radii, coulomb.count_var, poisson.count_var):
    print(f"  {r:>8.1f} {cv:>12.3f} {pv:>12.3f} {r * r:>10.2f}")
print("  (the Poisson curve keeps growing with the disk; the Coulomb")
print("   curve flattens out: hyperuniformity. Overlapping windows in a")
print("   single realization damp both estimates below ensemble values.)")
