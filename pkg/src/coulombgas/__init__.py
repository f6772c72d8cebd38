"""Numerical laboratory for 2D Coulomb gases.

Sampling of the N-point Gibbs measure, exact energy decompositions,
renormalized electric-field energies on grids, screened transition fields,
and mesoscopic point statistics, with the beta = 2 quadratic case wired to
the exact Ginibre radial law as an external oracle.
"""

__version__ = "0.1.0"

from .energy import (
    EnergyReport,
    TruncationParam,
    blow_up_points,
    hamiltonian,
    minimality_probe,
    renormalized_energy,
    renormalized_energy_profile,
    splitting_check,
    truncation_gradient,
    truncation_kernel,
    w_n_pairwise,
)
from .errors import (
    CoincidentPointsError,
    IncompatibleFluxError,
    NonConvergenceError,
    NumericalError,
    ScreeningInequalityError,
    UnderResolvedError,
    ValidationError,
)
from .fieldgrid import (
    GridField,
    ScalarGrid,
    divergence,
    local_field,
    neumann_poisson,
    rotated_gradient,
    truncate_field,
)
from .grids import Grid, Window
from .points import BLOWN_UP, MACROSCOPIC, PointConfiguration
from .potential import (
    EffectivePotential,
    EquilibriumMeasure,
    Potential,
    blowup_density,
    effective_potential,
    equilibrium_measure,
    make_potential,
    quadratic,
    quartic,
)
from .sampler import (
    Chain,
    ChainDiagnostics,
    SamplerConfig,
    diagnose_chain,
    ginibre_radial_cdf,
    ginibre_radial_oracle,
    sample_gibbs,
)
from .screening import (
    ScreeningProblem,
    ScreeningResult,
    Tile,
    build_transition,
    jitter_family,
    tile_annulus,
)
from .stats import (
    BumpFunction,
    DeltaSchedule,
    FieldStatistics,
    LocalLawReport,
    blow_up,
    choose_deltas,
    delta1_lower_bound,
    discrepancy,
    discrepancy_energy_check,
    empirical_field_stats,
    local_law_statistic,
    points_in_square_check,
)
