"""Equilibrium measures and effective potentials for radial confinements.

The density of the equilibrium measure of a smooth confining potential is
Laplacian(V)/(4 pi) on its support: constant 1/pi on the unit disk for
V = |x|^2, a growing parabola for V = |x|^4.  The effective potential zeta
vanishes on the support and grows outside, pinning the particles to the bulk.
"""

import numpy as np

from coulombgas import effective_potential, equilibrium_measure, quadratic, quartic

for potential, note in (
    (quadratic(), "circular law: density 1/pi on the unit disk"),
    (quadratic(2.0), "steeper well: density 2/pi on the disk of radius 2^-1/2"),
    (quartic(), "quartic well: density 4 r^2 / pi, support radius 2^-1/4"),
):
    eq = equilibrium_measure(potential, grid=0.02, tol=1e-4, max_iter=800)
    X, Y = eq.grid.centers()
    r = np.hypot(X, Y)
    support_radius = r[eq.support_mask].max()
    print(f"\n{potential.name}: {note}")
    print(f"  total mass        {eq.total_mass:.12f}")
    print(f"  support radius    {support_radius:.4f}")
    print(f"  max density       {eq.max_density:.4f}")
    print(f"  EL residual       {eq.el_residual:.2e}")

    zeta = effective_potential(potential, eq)
    print(f"  zeta level        {zeta.level:.6f}")
    print(f"  zeta on support   <= {zeta.interior_residual:.2e}")
    probes = np.array([[0.0, 0.0], [support_radius * 1.5, 0.0],
                       [support_radius * 2.0, 0.0]])
    values = zeta.evaluate_at(probes)
    for p, v in zip(probes, values):
        print(f"  zeta({p[0]:5.2f}, 0)    = {v: .5f}")

print("\nFor V = |x|^2 the exact level is 1/2 and zeta(2, 0) = 2 - 1/2 - log 2"
      f" = {2 - 0.5 - np.log(2):.5f}.")
