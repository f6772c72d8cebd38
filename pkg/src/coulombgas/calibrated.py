"""Frozen constants for inequality checks whose theory constant is implicit.

Each bound below has the shape ``quantity <= C * budget``.  The constants
were fitted once on calibration sweeps (see demos/calibrate_constants.py,
which reproduces the measurements) and then frozen with a safety margin;
they are part of the verification contract, not ground truth.
"""

#: slack constant for the eta-monotonicity of the counterterm-corrected
#: window energy: drops are bounded by C * N_window * max_density * eta_big
#: (measured worst 1.68 over lemma-compliant windows)
MONOTONICITY_SLACK_C = 3.0

#: energy of a Neumann solve against l * flux^2-integral + l^4 * sup|rhs-mean|^2
#: (measured worst 0.35)
NEUMANN_ENERGY_C = 1.0

#: discrepancy-energy inequality D^2 min(1, D/R^2) <= C * window field energy
#: (measured worst 0.12 including planted surpluses)
DISCREPANCY_ENERGY_C = 0.5

#: screened-field energy against l*M + n_tiles*l^4*(C_mu (2 sqrt2 l)^kappa)^2
#: + n_tran * log(1/eta1)  (measured worst 5.99 across tile scales and two
#: decades of flux amplitude)
SCREENING_ENERGY_C = 9.0
