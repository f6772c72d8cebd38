"""The exponent bookkeeping behind the multiscale bootstrap.

Each bootstrap step takes control at scale delta down to a slightly smaller
delta1, with intermediate exponents delta2 (boundary selection) and delta3
(tile scale) chosen so every inequality the argument needs holds at once.
Iterating the lower bound walks delta down to zero: that is what lets the
analysis reach arbitrarily fine mesoscopic scales.
"""

from coulombgas import choose_deltas, delta1_lower_bound

print("schedules at kappa = 1 (smooth equilibrium density):")
print(f"{'delta':>7} {'delta1':>8} {'delta2':>8} {'delta3':>8} {'N^d3 (N=1e6)':>13}")
for delta in (0.5, 0.4, 0.3, 0.2, 0.1):
    s = choose_deltas(delta, 1.0)
    print(f"{delta:>7.2f} {s.delta1:>8.4f} {s.delta2:>8.4f} {s.delta3:>8.4f} "
          f"{1e6 ** s.delta3:>13.1f}")

print("\nthe same at kappa = 0.3 (rougher density => smaller steps):")
for delta in (0.5, 0.3):
    s = choose_deltas(delta, 0.3)
    print(f"{delta:>7.2f} {s.delta1:>8.4f} {s.delta2:>8.4f} {s.delta3:>8.4f}")

print("\niterating the lower bound from delta = 1/2, kappa = 1:")
d, path = 0.5, []
while d >= 0.01:
    d = delta1_lower_bound(d, 1.0)
    path.append(d)
print("  " + " -> ".join(f"{v:.3f}" for v in path[:8]) + " -> ...")
print(f"  reaches below 0.01 after {len(path)} steps")

s = choose_deltas(0.5, 1.0, 0.5)
print(f"\nreference values at delta = 0.5, kappa = 1: gamma = {s.gamma:.5f}, "
      f"alpha = {s.alpha:.5f}")
